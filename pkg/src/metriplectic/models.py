"""Built-in Poisson structures and the group-level maps used to cross-check them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .multivector import BivectorField, CoordinateChart, schouten_bb
from .poly import Polynomial, as_rational


class JacobiError(ValueError):
    def __init__(self, message: str, triple: tuple[str, str, str], residual: Polynomial,
                 names: Sequence[str]):
        super().__init__(f"{message}: [pi,pi]^({','.join(triple)}) = {residual.render(names)}")
        self.triple = triple
        self.residual = residual


@dataclass(frozen=True)
class ModelDescriptor:
    name: str
    chart: CoordinateChart
    base: BivectorField
    cocycle: BivectorField | None = None
    casimirs: tuple[tuple[str, Polynomial], ...] = ()
    extended_casimirs: tuple[tuple[str, Polynomial], ...] = ()
    default_entropy: Polynomial | None = None
    default_hamiltonian: Polynomial | None = None
    notes: str = ""

    def __post_init__(self):
        if self.default_entropy is None:
            object.__setattr__(self, "default_entropy", self.chart.zero())
        if self.default_hamiltonian is None:
            object.__setattr__(self, "default_hamiltonian", self.chart.zero())

    @property
    def dim(self) -> int:
        return self.chart.dim

    def deformed(self, epsilon=1) -> BivectorField:
        if self.cocycle is None:
            return self.base
        return self.base + self.cocycle.scale(epsilon)

    def system(self, hamiltonian: Polynomial | None = None, entropy: Polynomial | None = None,
               tau=1, epsilon=1, four_bracket=None):
        from .brackets import DeformedPoissonStructure, MetriplecticSystem
        cocycle = self.cocycle if self.cocycle is not None else BivectorField.zero(self.chart)
        return MetriplecticSystem(
            structure=DeformedPoissonStructure(self.base, cocycle, epsilon),
            hamiltonian=self.default_hamiltonian if hamiltonian is None else hamiltonian,
            entropy=self.default_entropy if entropy is None else entropy,
            tau=tau, casimirs=self.casimirs, four_bracket=four_bracket, name=self.name)


def _first_jacobi_failure(P: BivectorField):
    tri = schouten_bb(P, P)
    if tri.is_zero():
        return None
    key = min(tri.components)
    return key, tri.components[key]


def _require_jacobi(P: BivectorField, what: str):
    bad = _first_jacobi_failure(P)
    if bad is not None:
        (i, j, k), res = bad
        names = P.chart.names
        raise JacobiError(f"{what} violates the Jacobi identity",
                          (names[i], names[j], names[k]), res, names)


# -- section 2 classes ------------------------------------------------------

def build_canonical(n: int) -> ModelDescriptor:
    if n < 1:
        raise ValueError("canonical model needs n >= 1")
    names = [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    chart = CoordinateChart.of(names)
    one = Polynomial.constant(chart.dim, 1)
    base = BivectorField(chart, {(i, n + i): one for i in range(n)})
    x = chart.coordinates()
    H = sum((x[i] * x[i] for i in range(2 * n)), chart.zero()) / 2
    return ModelDescriptor(name=f"canonical:{n}", chart=chart, base=base,
                           default_hamiltonian=H,
                           notes="constant Darboux bivector; nondegenerate, no Casimirs")


def build_lie_poisson(names: Sequence[str],
                      constants: Mapping[tuple[int, int, int], object] | Sequence,
                      sign: int = 1, name: str = "lie-poisson") -> ModelDescriptor:
    """Linear Poisson structure pi^{ij} = sign * sum_k c^k_{ij} x_k.

    ``constants`` maps ``(i, j, k)`` to ``c^k_{ij}`` (0-based) or is a nested
    ``c[k][i][j]`` array. Only entries with i<j are read when the mapping
    form lists both orders; they must then be antisymmetric.
    """
    chart = CoordinateChart.of(names)
    n = chart.dim
    table: dict[tuple[int, int, int], Fraction] = {}
    if isinstance(constants, Mapping):
        for (i, j, k), v in constants.items():
            table[(i, j, k)] = as_rational(v)
    else:
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    v = as_rational(constants[k][i][j])
                    if v:
                        table[(i, j, k)] = v
    for (i, j, k), v in table.items():
        if i == j and v:
            raise ValueError(f"structure constant c^{k}_({i}{i}) must vanish")
        if (j, i, k) in table and table[(j, i, k)] != -v:
            raise ValueError(f"structure constants are not antisymmetric in ({i}, {j})")
    x = chart.coordinates()
    upper: dict[tuple[int, int], Polynomial] = {}
    for (i, j, k), v in table.items():
        if i < j:
            upper[(i, j)] = upper.get((i, j), chart.zero()) + x[k] * (v * sign)
        elif (j, i, k) not in table:
            upper[(j, i)] = upper.get((j, i), chart.zero()) - x[k] * (v * sign)
    base = BivectorField(chart, upper)
    _require_jacobi(base, "structure constants")
    return ModelDescriptor(name=name, chart=chart, base=base, notes="Lie-Poisson structure")


def build_lotka_volterra(A: Sequence[Sequence], names: Sequence[str] | None = None) -> ModelDescriptor:
    """Quadratic structure pi^{ij} = a_ij x_i x_j."""
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("Lotka-Volterra matrix must be square")
    a = [[as_rational(v) for v in row] for row in A]
    for i in range(n):
        for j in range(n):
            if a[i][j] != -a[j][i]:
                raise ValueError(f"Lotka-Volterra matrix is not skew-symmetric at ({i}, {j})")
    chart = CoordinateChart.of(names or [f"x{i}" for i in range(1, n + 1)])
    x = chart.coordinates()
    base = BivectorField(chart, {(i, j): x[i] * x[j] * a[i][j]
                                 for i in range(n) for j in range(i + 1, n) if a[i][j]})
    _require_jacobi(base, "Lotka-Volterra coefficients")
    H = sum(x, chart.zero())
    return ModelDescriptor(name="lv", chart=chart, base=base, default_hamiltonian=H,
                           notes="Lotka-Volterra quadratic Poisson structure")


# -- se(2) ----------------------------------------------------------------------

SE2_NAMES = ("zeta", "p1", "p2")
SE2_STRUCTURE_CONSTANTS = {(0, 1, 2): 1, (0, 2, 1): -1}   # [xi1,xi2]=xi3, [xi1,xi3]=-xi2


def build_se2() -> ModelDescriptor:
    chart = CoordinateChart.of(SE2_NAMES)
    z, p1, p2 = chart.coordinates()
    zero = chart.zero()
    base = BivectorField.from_matrix(chart, [[zero, -p2, p1],
                                             [p2, zero, zero],
                                             [-p1, zero, zero]])
    C = p1 * p1 + p2 * p2
    return ModelDescriptor(name="se2", chart=chart, base=base,
                           casimirs=(("C", C),), default_entropy=C / 2,
                           default_hamiltonian=p1,
                           notes="Lie-Poisson structure on se(2)*")


def build_se2_extended() -> ModelDescriptor:
    chart = CoordinateChart.of(SE2_NAMES + ("c",))
    z, p1, p2, c = chart.coordinates()
    se2 = build_se2()
    base = BivectorField(chart, {k: v.embed(4) for k, v in se2.base.upper.items()})
    cocycle = BivectorField(chart, {(1, 2): c})
    C = p1 * p1 + p2 * p2
    return ModelDescriptor(name="se2ext", chart=chart, base=base, cocycle=cocycle,
                           casimirs=(("C", C),), extended_casimirs=(("c", c),),
                           default_entropy=C / 2, default_hamiltonian=p1,
                           notes="se(2)* embedded in the affine Lie-Poisson dual of the "
                                 "central extension; cocycle {p1,p2} = c")


# -- Galilei / Bargmann ---------------------------------------------------------

GALILEI_NAMES = ("zeta1", "zeta2", "zeta3", "g1", "g2", "g3", "p1", "p2", "p3", "E")

_EPS = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}


def _cross(a: Sequence[Polynomial], b: Sequence[Polynomial]) -> list[Polynomial]:
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _dot(a, b) -> Polynomial:
    out = a[0] * b[0]
    for u, v in zip(a[1:], b[1:]):
        out = out + u * v
    return out


def _galilei_upper(chart: CoordinateChart) -> dict[tuple[int, int], Polynomial]:
    # {f,g} = zeta.(f_z x g_z) + g.(f_z x g_g - g_z x f_g)
    #         + p.(f_z x g_p - g_z x f_p) + p.(f_g g_E - g_g f_E)
    x = chart.coordinates()
    zeta, g, p = x[0:3], x[3:6], x[6:9]
    upper: dict[tuple[int, int], Polynomial] = {}

    def add(i, j, v):
        if i > j:
            i, j, v = j, i, -v
        upper[(i, j)] = upper.get((i, j), chart.zero()) + v

    for (a, b, k), s in _EPS.items():
        if a < b:
            add(a, b, zeta[k] * s)           # {zeta_a, zeta_b} = eps_abk zeta_k
        add(a, 3 + b, g[k] * s)              # {zeta_a, g_b} = eps_abk g_k
        add(a, 6 + b, p[k] * s)              # {zeta_a, p_b} = eps_abk p_k
    for a in range(3):
        add(3 + a, 9, p[a])                  # {g_a, E} = p_a
    return {k: v for k, v in upper.items() if v}


def build_galilei() -> ModelDescriptor:
    chart = CoordinateChart.of(GALILEI_NAMES)
    base = BivectorField(chart, _galilei_upper(chart))
    x = chart.coordinates()
    g, p = x[3:6], x[6:9]
    C1 = _dot(p, p)
    pg = _cross(p, g)
    C2 = _dot(pg, pg)
    E = x[9]
    return ModelDescriptor(name="galilei", chart=chart, base=base,
                           casimirs=(("C1", C1), ("C2", C2)),
                           default_entropy=(C1 + C2) / 2,
                           default_hamiltonian=C1 / 2 + E,
                           notes="Lie-Poisson structure on sgal(3)* in hat-map coordinates")


def build_bargmann() -> ModelDescriptor:
    chart = CoordinateChart.of(GALILEI_NAMES + ("M",))
    gal = build_galilei()
    base = BivectorField(chart, {k: v.embed(11) for k, v in gal.base.upper.items()})
    x = chart.coordinates()
    zeta, g, p, E, M = x[0:3], x[3:6], x[6:9], x[9], x[10]
    cocycle = BivectorField(chart, {(3 + a, 6 + a): M for a in range(3)})
    C1 = _dot(p, p)
    pg = _cross(p, g)
    C2 = _dot(pg, pg)
    spin = [M * zeta[a] - v for a, v in enumerate(_cross(g, p))]
    return ModelDescriptor(
        name="bargmann", chart=chart, base=base, cocycle=cocycle,
        casimirs=(("C1", C1), ("C2", C2)),
        extended_casimirs=(("M", M), ("mass_shell", M * E * 2 - C1), ("spin", _dot(spin, spin))),
        default_entropy=(C1 + C2) / 2, default_hamiltonian=C1 / 2 + E,
        notes="Galilei structure embedded in the Bargmann dual; cocycle {g_i,p_i} = M")


# -- registry -------------------------------------------------------------------

BUILTIN_NAMES = ("se2", "se2ext", "galilei", "bargmann", "canonical:N", "lv:<matrix>")


def _parse_lv(spec: str) -> list[list[Fraction]]:
    # "lv:0,1,1;-1,0,1;-1,-1,0"
    rows = [r for r in spec.split(";") if r.strip()]
    return [[as_rational(v.strip()) for v in r.split(",")] for r in rows]


def get_model(name: str) -> ModelDescriptor:
    """Resolve a registry name such as ``se2ext``, ``canonical:2`` or ``lv:0,1;-1,0``."""
    fixed = {"se2": build_se2, "se2ext": build_se2_extended,
             "galilei": build_galilei, "bargmann": build_bargmann}
    if name in fixed:
        return fixed[name]()
    if name.startswith("canonical:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise KeyError(f"bad canonical model name {name!r}") from None
        return build_canonical(n)
    if name.startswith("lv:"):
        try:
            return build_lotka_volterra(_parse_lv(name[3:]))
        except (ValueError, ZeroDivisionError) as exc:
            raise KeyError(f"bad Lotka-Volterra matrix in {name!r}: {exc}") from None
    raise KeyError(f"unknown model {name!r}")


def registry() -> list[ModelDescriptor]:
    return [build_se2(), build_se2_extended(), build_galilei(), build_bargmann(),
            build_canonical(1), build_canonical(2),
            build_lotka_volterra([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]])]


# -- group-level float maps ---------------------------------------------------------

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class GroupElementSE2:
    angle: float
    translation: tuple[float, float] = (0.0, 0.0)

    @property
    def R(self) -> np.ndarray:
        return rotation(self.angle)

    def matrix(self) -> np.ndarray:
        m = np.eye(3)
        m[:2, :2] = self.R
        m[:2, 2] = self.translation
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "GroupElementSE2":
        return cls(math.atan2(m[1, 0], m[0, 0]), (float(m[0, 2]), float(m[1, 2])))


def se2_V(omega: float) -> np.ndarray:
    if omega == 0.0:
        return np.eye(2)
    # 1 - cos w = 2 sin^2(w/2) avoids cancellation for small w
    half = math.sin(omega / 2)
    return (math.sin(omega) / omega) * np.eye(2) + (2.0 * half * half / omega) * J2


def se2_exp(omega: float, u: Sequence[float]) -> np.ndarray:
    """Closed-form exponential of [[omega J, u], [0, 0]] as a 3x3 matrix."""
    m = np.eye(3)
    m[:2, :2] = rotation(omega)
    m[:2, 2] = se2_V(omega) @ np.asarray(u, dtype=float)
    return m


def se2_algebra_matrix(omega: float, u: Sequence[float]) -> np.ndarray:
    m = np.zeros((3, 3))
    m[:2, :2] = omega * J2
    m[:2, 2] = u
    return m


def se2_coadjoint(g: GroupElementSE2, zeta: float, p: Sequence[float]) -> tuple[float, np.ndarray]:
    """Ad*_{g^-1}(zeta, p) = (zeta, R p + zeta J v)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(g.translation, dtype=float)
    return zeta, g.R @ p + zeta * (J2 @ v)


def galilei_coadjoint_algebra(xi: Sequence[float], beta: Sequence[float], gamma: Sequence[float],
                              eps: float, zeta: Sequence[float], g: Sequence[float],
                              p: Sequence[float], E: float):
    """Algebra coadjoint action in hat-map form, as displayed:

    (-xi x zeta - beta x g - gamma x p, -xi x g + p eps, -xi x p, -beta . p)
    """
    xi, beta, gamma = (np.asarray(v, dtype=float) for v in (xi, beta, gamma))
    zeta, g, p = (np.asarray(v, dtype=float) for v in (zeta, g, p))
    z_out = -np.cross(xi, zeta) - np.cross(beta, g) - np.cross(gamma, p)
    g_out = -np.cross(xi, g) + p * eps
    p_out = -np.cross(xi, p)
    e_out = -float(beta @ p)
    return z_out, g_out, p_out, e_out
