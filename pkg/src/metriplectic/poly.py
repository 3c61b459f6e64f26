"""Exact multivariate polynomials with rational coefficients.

Coefficients are stored as ``int`` when integral and ``fractions.Fraction``
otherwise; both compare equal across types, so the term map is canonical.
Monomials are exponent tuples ordered graded-lexicographically (highest
total degree first, then ``x0 > x1 > ...``).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

Monomial = tuple[int, ...]
Coefficient = int | Fraction


class DimensionError(ValueError):
    """Raised when polynomials or points on different charts are combined."""


def as_rational(value) -> Coefficient:
    """Convert ``value`` to the canonical exact scalar (int or Fraction)."""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, Rational):
        return as_rational(Fraction(value.numerator, value.denominator))
    if isinstance(value, str):
        return as_rational(Fraction(value))
    raise TypeError(f"not an exact rational: {value!r}")


def _norm(c: Coefficient) -> Coefficient:
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def grlex_key(m: Monomial) -> tuple:
    return (-sum(m), tuple(-e for e in m))


class Polynomial:
    """Immutable polynomial in ``dim`` variables over the rationals."""

    __slots__ = ("_dim", "_terms", "_hash", "_order")

    def __init__(self, dim: int, terms: Mapping[Monomial, object] | None = None):
        if dim < 0:
            raise ValueError("dimension must be non-negative")
        clean: dict[Monomial, Coefficient] = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != dim:
                raise DimensionError(
                    f"monomial {mono} has length {len(mono)}, expected {dim}")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = as_rational(coeff)
            if c:
                clean[mono] = _norm(clean.get(mono, 0) + c)
                if not clean[mono]:
                    del clean[mono]
        self._dim = dim
        self._terms = clean
        self._hash = None
        self._order = None

    @classmethod
    def _raw(cls, dim: int, terms: dict) -> "Polynomial":
        # trusted constructor: terms already canonical, no zeros
        p = object.__new__(cls)
        p._dim = dim
        p._terms = terms
        p._hash = None
        p._order = None
        return p

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls._raw(dim, {})

    @classmethod
    def constant(cls, dim: int, value) -> "Polynomial":
        c = as_rational(value)
        return cls._raw(dim, {(0,) * dim: c} if c else {})

    @classmethod
    def variable(cls, dim: int, index: int) -> "Polynomial":
        if not 0 <= index < dim:
            raise IndexError(f"variable index {index} out of range for dimension {dim}")
        mono = tuple(1 if k == index else 0 for k in range(dim))
        return cls._raw(dim, {mono: 1})

    @classmethod
    def variables(cls, dim: int) -> list["Polynomial"]:
        return [cls.variable(dim, i) for i in range(dim)]

    # -- basic accessors --------------------------------------------------
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> Mapping[Monomial, Coefficient]:
        return dict(self._terms)

    def items(self) -> list[tuple[Monomial, Coefficient]]:
        """Terms in graded-lex order."""
        if self._order is None:
            self._order = sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))
        return self._order

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def constant_value(self) -> Coefficient:
        return self._terms.get((0,) * self._dim, 0)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._dim == other._dim and self._terms == other._terms
        try:
            c = as_rational(other)
        except TypeError:
            return NotImplemented
        return self == Polynomial.constant(self._dim, c)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dim, frozenset(self._terms.items())))
        return self._hash

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._dim != self._dim:
                raise DimensionError(
                    f"dimension mismatch: {self._dim} vs {other._dim}")
            return other
        return Polynomial.constant(self._dim, other)

    def __add__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for m, c in small.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = _norm(v + c)
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Polynomial._raw(self._dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self._dim, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def scale(self, r) -> "Polynomial":
        r = as_rational(r)
        if not r:
            return Polynomial.zero(self._dim)
        return Polynomial._raw(self._dim, {m: _norm(c * r) for m, c in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        other = self._coerce(other)
        out: dict[Monomial, Coefficient] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = out.get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
        return Polynomial._raw(self._dim, {m: _norm(c) for m, c in out.items() if c})

    def __rmul__(self, other) -> "Polynomial":
        return self.__mul__(other)

    def __truediv__(self, other) -> "Polynomial":
        r = as_rational(other)
        if not r:
            raise ZeroDivisionError("polynomial division by zero")
        return self.scale(Fraction(1) / r)

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(self._dim, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus and evaluation -----------------------------------------
    def diff(self, i: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``i``."""
        if not 0 <= i < self._dim:
            raise IndexError(f"coordinate index {i} out of range for dimension {self._dim}")
        out = {}
        for m, c in self._terms.items():
            e = m[i]
            if e:
                out[m[:i] + (e - 1,) + m[i + 1:]] = _norm(c * e)
        return Polynomial._raw(self._dim, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self._dim)]

    def __call__(self, point: Sequence):
        return self.eval(point)

    def eval(self, point: Sequence):
        """Evaluate at ``point``.

        Exact (Fraction/int result) when every coordinate is an exact
        rational, floating otherwise. Floating evaluation sums terms in
        graded-lex order so results are reproducible.
        """
        if len(point) != self._dim:
            raise DimensionError(
                f"point has length {len(point)}, expected {self._dim}")
        if all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in point):
            return self._eval_exact(point)
        xs = [float(x) for x in point]
        total = 0.0
        for m, c in self.items():
            term = float(c)
            for x, e in zip(xs, m):
                if e:
                    term *= x ** e
            total += term
        return total

    def _eval_exact(self, point) -> Coefficient:
        # common-denominator integer evaluation; one Fraction at the end
        if not self._terms:
            return 0
        den = 1
        for x in point:
            if isinstance(x, Fraction):
                den = den * x.denominator // math.gcd(den, x.denominator)
        nums = [int(x * den) for x in point]
        top = self.degree()
        cden = 1
        for c in self._terms.values():
            if isinstance(c, Fraction):
                cden = cden * c.denominator // math.gcd(cden, c.denominator)
        acc = 0
        den_pows = [den ** k for k in range(top + 1)]
        for m, c in self._terms.items():
            t = int(c * cden)
            for n, e in zip(nums, m):
                if e:
                    t *= n ** e
            acc += t * den_pows[top - sum(m)]
        return _norm(Fraction(acc, cden * den_pows[top]))

    def subs(self, index: int, value) -> "Polynomial":
        """Substitute an exact rational for variable ``index`` (dimension kept)."""
        v = as_rational(value)
        out: dict[Monomial, Coefficient] = {}
        for m, c in self._terms.items():
            e = m[index]
            nm = m[:index] + (0,) + m[index + 1:]
            out[nm] = out.get(nm, 0) + c * v ** e
        return Polynomial(self._dim, out)

    def embed(self, new_dim: int, positions: Sequence[int] | None = None) -> "Polynomial":
        """Re-express on a larger chart; variable k maps to ``positions[k]``."""
        if positions is None:
            positions = range(self._dim)
        positions = list(positions)
        if len(positions) != self._dim:
            raise DimensionError("positions must list every variable")
        out = {}
        for m, c in self._terms.items():
            nm = [0] * new_dim
            for k, e in zip(positions, m):
                nm[k] = e
            out[tuple(nm)] = c
        return Polynomial._raw(new_dim, out)

    # -- text ------------------------------------------------------------
    def render(self, names: Sequence[str] | None = None) -> str:
        """Canonical text: graded-lex terms, ``*`` products, ``^`` powers."""
        if names is None:
            names = [f"x{i}" for i in range(self._dim)]
        if not self._terms:
            return "0"
        parts = []
        for k, (m, c) in enumerate(self.items()):
            neg = c < 0
            a = -c if neg else c
            factors = []
            for name, e in zip(names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            if a != 1 or not factors:
                factors.insert(0, str(a))
            body = "*".join(factors)
            if k == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.render()!r}, dim={self._dim})"

    __str__ = render


def poly_from_terms(dim: int, pairs: Iterable[tuple[Monomial, object]]) -> Polynomial:
    out: dict[Monomial, object] = {}
    for m, c in pairs:
        out[m] = as_rational(out.get(m, 0)) + as_rational(c)
    return Polynomial(dim, out)


class CompiledPolynomials:
    """A batch of polynomials compiled for fast repeated float evaluation.

    The monomials of all members are gathered into one exponent matrix;
    each member's value is the exactly rounded sum (``math.fsum``) of its
    coefficient-times-monomial products, which makes results independent
    of term order and unchanged by terms that evaluate to zero.
    """

    def __init__(self, polys: Sequence[Polynomial]):
        if not polys:
            raise ValueError("nothing to compile")
        dim = polys[0].dim
        index: dict[Monomial, int] = {}
        rows, coeffs, bounds = [], [], [0]
        for p in polys:
            if p.dim != dim:
                raise DimensionError("all compiled polynomials must share a dimension")
            for m, c in p.items():
                if m not in index:
                    index[m] = len(index)
                rows.append(index[m])
                coeffs.append(float(c))
            bounds.append(len(rows))
        self.dim = dim
        self.size = len(polys)
        monos = sorted(index, key=lambda m: index[m])
        self._exps = np.array(monos, dtype=np.int64).reshape(len(monos), dim)
        self._rows = np.array(rows, dtype=np.int64)
        self._coeffs = np.array(coeffs, dtype=float)
        self._bounds = bounds

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"state has shape {x.shape}, expected ({self.dim},)")
        # overflow yields inf/nan, which callers check for explicitly
        with np.errstate(over="ignore", invalid="ignore"):
            if len(self._exps):
                monos = np.prod(np.power(x[None, :], self._exps), axis=1)
            else:
                monos = np.empty(0)
            prods = (self._coeffs * monos[self._rows]).tolist()
        b = self._bounds
        return np.array([math.fsum(prods[b[k]:b[k + 1]]) for k in range(self.size)])
