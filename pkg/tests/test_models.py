import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metriplectic.brackets import IsentropicWarning, reversible_field
from metriplectic.models import (
    SE2_STRUCTURE_CONSTANTS,
    GroupElementSE2,
    JacobiError,
    build_bargmann,
    build_canonical,
    build_galilei,
    build_lie_poisson,
    build_lotka_volterra,
    build_se2,
    build_se2_extended,
    galilei_coadjoint_algebra,
    get_model,
    registry,
    se2_algebra_matrix,
    se2_coadjoint,
    se2_exp,
    se2_V,
)
from metriplectic.multivector import schouten_bb, sharp
from metriplectic.verify import random_polynomial

finite = st.floats(-3.0, 3.0, allow_nan=False)


def series_expm(A, terms=20):
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


@pytest.mark.parametrize("d", registry(), ids=lambda d: d.name)
def test_registry_invariants(d):
    assert schouten_bb(d.base, d.base).is_zero()
    if d.cocycle is not None:
        assert schouten_bb(d.base, d.cocycle).is_zero()
        assert schouten_bb(d.cocycle, d.cocycle).is_zero()
    for _, C in d.casimirs:
        assert sharp(d.base, C).is_zero()
    for _, C in d.extended_casimirs:
        assert sharp(d.deformed(), C).is_zero()


def test_canonical():
    d = build_canonical(1)
    q1, p1 = d.chart.coordinates()
    assert d.chart.names == ("q1", "p1")
    assert d.base[0, 1] == 1
    assert not sharp(d.base, q1).is_zero()
    assert d.casimirs == ()
    with pytest.raises(ValueError):
        build_canonical(0)


def test_se2_matrix_matches_display():
    d = build_se2()
    z, p1, p2 = d.chart.coordinates()
    assert d.base.matrix() == [[0, -p2, p1], [p2, 0, 0], [-p1, 0, 0]]
    assert d.default_entropy == (p1 ** 2 + p2 ** 2) / 2


def test_lie_poisson_se2_constants():
    # with {x_i, x_j} = sum_k c^k_ij x_k the algebra constants give minus the displayed matrix
    plus = build_lie_poisson(["zeta", "p1", "p2"], SE2_STRUCTURE_CONSTANTS)
    minus = build_lie_poisson(["zeta", "p1", "p2"], SE2_STRUCTURE_CONSTANTS, sign=-1)
    assert minus.base == build_se2().base
    assert plus.base == -build_se2().base


def test_lie_poisson_so3():
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (2, 1, 0): -1, (0, 2, 1): -1}
    d = build_lie_poisson(["m1", "m2", "m3"], eps)
    assert schouten_bb(d.base, d.base).is_zero()
    m = d.chart.coordinates()
    assert d.base[0, 1] == m[2]


def test_lie_poisson_rejects_jacobi_failure():
    # [x1,x2] = x2, [x2,x3] = x1 is not a Lie algebra
    with pytest.raises(JacobiError) as info:
        build_lie_poisson(["x1", "x2", "x3"], {(0, 1, 1): 1, (1, 2, 0): 1})
    assert info.value.triple == ("x1", "x2", "x3")
    assert info.value.residual != 0


def test_lie_poisson_nested_constants():
    # c[k][i][j]
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    c[2][0][1], c[2][1][0] = 1, -1
    d = build_lie_poisson(["a", "b", "z"], c)
    assert d.base[0, 1] == d.chart.coordinate("z")


def test_lotka_volterra():
    d2 = build_lotka_volterra([[0, 1], [-1, 0]])
    x1, x2 = d2.chart.coordinates()
    assert d2.base[0, 1] == x1 * x2
    d3 = build_lotka_volterra([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]])
    assert schouten_bb(d3.base, d3.base).is_zero()
    dz = build_lotka_volterra([[0, 0], [0, 0]])
    assert dz.base.is_zero()
    with pytest.raises(ValueError):
        build_lotka_volterra([[0, 1], [1, 0]])


def test_se2_extended_casimirs():
    d = build_se2_extended()
    z, p1, p2, c = d.chart.coordinates()
    assert sharp(d.deformed(), c).is_zero()
    assert list(sharp(d.deformed(), (p1 ** 2 + p2 ** 2) / 2)) == [0, c * p2, -c * p1, 0]
    assert d.cocycle.upper == {(1, 2): c}


def test_galilei_and_bargmann():
    g = build_galilei()
    assert g.dim == 10 and schouten_bb(g.base, g.base).is_zero()
    names = dict(g.casimirs)
    assert sharp(g.base, names["C2"]).is_zero()
    b = build_bargmann()
    assert b.dim == 11
    ext = dict(b.extended_casimirs)
    assert set(ext) == {"M", "mass_shell", "spin"}
    assert sharp(b.deformed(), ext["spin"]).is_zero()
    # the Galilei casimirs are not casimirs of the deformed bracket
    assert not sharp(b.deformed(), dict(b.casimirs)["C1"]).is_zero()


@pytest.mark.parametrize("name,param", [("se2ext", "c"), ("bargmann", "M")])
def test_embedding_coherence(name, param):
    d = get_model(name)
    k = d.chart.index(param)
    D = d.deformed()
    for i in range(d.dim):
        for j in range(d.dim):
            assert D[i, j].subs(k, 0) == d.base[i, j].subs(k, 0)


def test_get_model():
    assert get_model("canonical:3").dim == 6
    assert get_model("lv:0,1;-1,0").dim == 2
    for bad in ("nosuch", "canonical:x", "lv:0,1;1"):
        with pytest.raises((KeyError, ValueError)):
            get_model(bad)


def test_rotation_is_orthogonal():
    for phi in np.linspace(-7, 7, 29):
        R = GroupElementSE2(float(phi), np.zeros(2)).R
        assert np.allclose(R @ R.T, np.eye(2), atol=1e-12)
        assert abs(np.linalg.det(R) - 1) < 1e-12


def test_se2_exp_examples():
    m = se2_exp(0.0, [1.0, 2.0])
    assert np.allclose(m, [[1, 0, 1], [0, 1, 2], [0, 0, 1]])
    m = se2_exp(math.pi, [0.0, 0.0])
    assert np.allclose(m[:2, :2], [[-1, 0], [0, -1]], atol=1e-12)
    assert np.allclose(m[:2, 2], 0)
    m = se2_exp(1.0, [1.0, 0.0])
    assert np.allclose(m[:2, 2], [math.sin(1), 1 - math.cos(1)], atol=1e-12)
    assert np.allclose(se2_V(1.0) @ [1, 0], [math.sin(1), 1 - math.cos(1)])


@given(st.floats(-math.pi, math.pi), finite, finite)
def test_se2_exp_matches_converged_series(omega, u1, u2):
    A = se2_algebra_matrix(omega, [u1, u2])
    assert np.max(np.abs(se2_exp(omega, [u1, u2]) - series_expm(A, terms=40))) < 1e-12


def test_twenty_term_series_error_is_its_truncation_tail():
    # the first omitted term bounds the gap; it exceeds 1e-10 only near |omega| = pi
    for omega in (1.0, 2.5, math.pi):
        gap = np.max(np.abs(se2_exp(omega, [0.0, 0.0]) - series_expm(se2_algebra_matrix(omega, [0, 0]))))
        tail = omega ** 20 / math.factorial(20)
        assert gap <= 1.1 * tail + 1e-15
    assert math.pi ** 20 / math.factorial(20) > 1e-10


def test_se2_coadjoint_examples():
    g = GroupElementSE2(math.pi / 2, np.array([1.0, 0.0]))
    zeta, p = se2_coadjoint(g, 2.0, [1.0, 0.0])
    assert zeta == 2.0 and np.allclose(p, [0, 3])
    zeta, p = se2_coadjoint(GroupElementSE2(0.0, np.zeros(2)), 1.5, [0.3, -0.2])
    assert zeta == 1.5 and np.allclose(p, [0.3, -0.2])


@given(finite, finite, finite, finite, finite, finite)
def test_se2_coadjoint_preserves_casimir(phi, v1, v2, zeta, a, b):
    _, p = se2_coadjoint(GroupElementSE2(phi, np.array([v1, v2])), zeta, [a, b])
    if zeta == 0:
        assert abs(p @ p - (a * a + b * b)) < 1e-12


@given(finite, finite, finite, finite, finite)
def test_se2_coadjoint_orbit_radius_for_zero_angular_momentum(phi, v1, v2, a, b):
    _, p = se2_coadjoint(GroupElementSE2(phi, np.array([v1, v2])), 0.0, [a, b])
    assert abs(p @ p - (a * a + b * b)) < 1e-12


def test_galilei_coadjoint_algebra_examples():
    z = np.zeros(3)
    mu = (np.array([1.0, 2, 3]), np.array([0.5, -1, 2]), np.array([1.0, 0, -1]), 2.0)
    out = galilei_coadjoint_algebra(z, z, z, 0.0, *mu)
    assert all(np.allclose(o, 0) for o in out)
    beta = np.array([0.3, -0.1, 0.7])
    zeta, g, p, E = galilei_coadjoint_algebra(z, beta, z, 0.0, *mu)
    assert np.allclose(zeta, -np.cross(beta, mu[1]))
    assert np.allclose(g, 0) and np.allclose(p, 0)
    assert E == pytest.approx(-beta @ mu[2])


def _galilei_residual(H, pt, sign):
    d = build_galilei()
    with warnings.catch_warnings():
        # no cocycle, so every entropy is isentropic here
        warnings.simplefilter("ignore", IsentropicWarning)
        X = reversible_field(d.system(H))
    lhs = np.array([c.eval(pt) for c in X])
    grad = [q.eval(pt) for q in H.gradient()]
    out = galilei_coadjoint_algebra(grad[0:3], grad[3:6], grad[6:9], grad[9],
                                    pt[0:3], pt[3:6], pt[6:9], pt[9])
    rhs = np.concatenate([np.ravel(o) for o in out])
    return lhs - sign * rhs


def test_galilei_coadjoint_matches_rotation_and_momentum_blocks():
    # with global sign -1 the zeta and p blocks agree for generic H
    rng = random.Random(5)
    for _ in range(20):
        H = random_polynomial(rng, 10, degree=2, n_terms=10)
        pt = [rng.uniform(-1, 1) for _ in range(10)]
        r = _galilei_residual(H, pt, -1)
        assert np.max(np.abs(r[0:3])) < 1e-10 and np.max(np.abs(r[6:9])) < 1e-10


def test_galilei_coadjoint_matches_when_h_ignores_boost_and_energy():
    rng = random.Random(6)
    for _ in range(20):
        H = random_polynomial(rng, 10, degree=2, n_terms=10)
        for k in range(3, 6):
            H = H.subs(k, 0)
        H = H.subs(9, 0)
        pt = [rng.uniform(-1, 1) for _ in range(10)]
        assert np.max(np.abs(_galilei_residual(H, pt, -1))) < 1e-10


def test_galilei_coadjoint_boost_energy_terms_have_opposite_sign():
    # the mismatch is exactly 2*(p*eps) in the g block and 2*(-beta.p) in the E block
    rng = random.Random(7)
    H = random_polynomial(rng, 10, degree=2, n_terms=10)
    pt = [rng.uniform(-1, 1) for _ in range(10)]
    grad = [q.eval(pt) for q in H.gradient()]
    p, beta, eps = np.array(pt[6:9]), np.array(grad[3:6]), grad[9]
    r = _galilei_residual(H, pt, -1)
    assert np.allclose(r[3:6], 2 * p * eps, atol=1e-10)
    assert r[9] == pytest.approx(-2 * (beta @ p), abs=1e-10)
