from fractions import Fraction

import sympy
from hypothesis import settings, strategies as st

from metriplectic.poly import Polynomial

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

small_rationals = st.builds(
    Fraction, st.integers(-6, 6), st.integers(1, 4))


def monomials(dim, max_degree):
    # a multiset of variable indices of size <= max_degree
    def counts(idx):
        m = [0] * dim
        for i in idx:
            m[i] += 1
        return tuple(m)
    return st.lists(st.integers(0, dim - 1), max_size=max_degree).map(counts)


def polynomials(dim=3, max_degree=3, max_terms=5):
    return st.dictionaries(monomials(dim, max_degree), small_rationals,
                           max_size=max_terms).map(lambda t: Polynomial(dim, t))


def points(dim):
    return st.lists(small_rationals, min_size=dim, max_size=dim)


def to_sympy(p: Polynomial, syms=None):
    syms = syms or sympy.symbols(f"x0:{p.dim}")
    expr = sympy.Integer(0)
    for m, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, m):
            term *= s ** e
        expr += term
    return expr


def from_sympy(expr, syms):
    poly = sympy.Poly(sympy.expand(expr), *syms)
    terms = {}
    for m, c in poly.terms():
        c = sympy.Rational(c)
        terms[tuple(m)] = Fraction(int(c.p), int(c.q))
    return Polynomial(len(syms), terms)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for block in RESULTS:
            terminalreporter.line(block.splitlines()[0])
