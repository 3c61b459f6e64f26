"""Polynomial multivector fields on a coordinate chart.

Skew tensors are stored by their strict upper triangle and symmetric
tensors by their upper triangle including the diagonal; the index
accessors supply the remaining entries with the right sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .poly import DimensionError, Polynomial, as_rational


class ChartMismatchError(DimensionError):
    pass


@dataclass(frozen=True)
class CoordinateChart:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate coordinate names: {', '.join(dupes)}")

    @classmethod
    def of(cls, *names: str) -> "CoordinateChart":
        if len(names) == 1 and not isinstance(names[0], str):
            names = tuple(names[0])
        return cls(tuple(names))

    @classmethod
    def standard(cls, dim: int, prefix: str = "x") -> "CoordinateChart":
        return cls(tuple(f"{prefix}{i}" for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown coordinate {name!r}") from None

    def coordinate(self, name_or_index) -> Polynomial:
        i = name_or_index if isinstance(name_or_index, int) else self.index(name_or_index)
        return Polynomial.variable(self.dim, i)

    def coordinates(self) -> list[Polynomial]:
        return Polynomial.variables(self.dim)

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.dim)

    def render(self, p: Polynomial) -> str:
        return p.render(self.names)


def _same_chart(*fields) -> CoordinateChart:
    chart = fields[0].chart
    for f in fields[1:]:
        if f.chart != chart:
            raise ChartMismatchError(
                f"chart mismatch: {chart.names} vs {f.chart.names}")
    return chart


def _check_dim(chart: CoordinateChart, p: Polynomial):
    if p.dim != chart.dim:
        raise DimensionError(
            f"polynomial has dimension {p.dim}, chart has dimension {chart.dim}")


@dataclass(frozen=True, eq=True)
class VectorField:
    chart: CoordinateChart
    components: tuple[Polynomial, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.chart.dim:
            raise DimensionError(
                f"vector field has {len(comps)} components, chart has {self.chart.dim}")
        for c in comps:
            _check_dim(self.chart, c)

    @classmethod
    def zero(cls, chart: CoordinateChart) -> "VectorField":
        return cls(chart, tuple(chart.zero() for _ in range(chart.dim)))

    def __getitem__(self, i: int) -> Polynomial:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self, other)
        return VectorField(self.chart, tuple(a + b for a, b in zip(self, other)))

    def scale(self, r) -> "VectorField":
        return VectorField(self.chart, tuple(c * r for c in self))

    def times(self, p: Polynomial) -> "VectorField":
        return VectorField(self.chart, tuple(c * p for c in self))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def apply(self, f: Polynomial) -> Polynomial:
        """Directional derivative X(f) = sum_i X^i df/dx_i."""
        _check_dim(self.chart, f)
        total = self.chart.zero()
        for i, c in enumerate(self.components):
            if c:
                d = f.diff(i)
                if d:
                    total = total + c * d
        return total

    def render(self, skip_zero: bool = False) -> str:
        names = self.chart.names
        lines = [f"{names[i]}: {c.render(names)}" for i, c in enumerate(self.components)
                 if c or not skip_zero]
        return "\n".join(lines) or "0"


def _upper_key(i: int, j: int) -> tuple[tuple[int, int], int]:
    if i < j:
        return (i, j), 1
    return (j, i), -1


@dataclass(frozen=True)
class BivectorField:
    """Skew-symmetric contravariant 2-tensor; ``upper`` holds pi^{ij}, i<j."""

    chart: CoordinateChart
    upper: Mapping[tuple[int, int], Polynomial] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), p in dict(self.upper).items():
            if not (0 <= i < j < self.chart.dim):
                raise ValueError(f"bivector key {(i, j)} is not an upper-triangle index pair")
            _check_dim(self.chart, p)
            if p:
                clean[(i, j)] = p
        object.__setattr__(self, "upper", clean)

    @classmethod
    def zero(cls, chart: CoordinateChart) -> "BivectorField":
        return cls(chart, {})

    @classmethod
    def from_entries(cls, chart: CoordinateChart,
                     entries: Iterable[tuple[int | str, int | str, Polynomial]]) -> "BivectorField":
        """Build from (i, j, pi^{ij}) triples in any index order; pairs must be distinct."""
        upper: dict[tuple[int, int], Polynomial] = {}
        for i, j, p in entries:
            i = i if isinstance(i, int) else chart.index(i)
            j = j if isinstance(j, int) else chart.index(j)
            if i == j:
                raise ValueError(f"diagonal entry ({chart.names[i]}, {chart.names[j]}) is not allowed")
            key, sign = _upper_key(i, j)
            if key in upper:
                raise ValueError(
                    f"pair ({chart.names[key[0]]}, {chart.names[key[1]]}) listed twice")
            upper[key] = p if sign > 0 else -p
        return cls(chart, upper)

    @classmethod
    def from_matrix(cls, chart: CoordinateChart, rows: Sequence[Sequence]) -> "BivectorField":
        """Read the upper triangle of a coefficient matrix; checks skew-symmetry."""
        n = chart.dim
        mat = [[r if isinstance(r, Polynomial) else Polynomial.constant(n, r) for r in row]
               for row in rows]
        if len(mat) != n or any(len(row) != n for row in mat):
            raise DimensionError(f"matrix must be {n}x{n}")
        for i in range(n):
            for j in range(n):
                if mat[i][j] != -mat[j][i]:
                    raise ValueError(f"matrix is not skew-symmetric at ({i}, {j})")
        return cls(chart, {(i, j): mat[i][j] for i in range(n) for j in range(i + 1, n)})

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __getitem__(self, ij: tuple[int, int]) -> Polynomial:
        i, j = ij
        if i == j:
            return self.chart.zero()
        key, sign = _upper_key(i, j)
        p = self.upper.get(key)
        if p is None:
            return self.chart.zero()
        return p if sign > 0 else -p

    def matrix(self) -> list[list[Polynomial]]:
        n = self.dim
        return [[self[i, j] for j in range(n)] for i in range(n)]

    def __add__(self, other: "BivectorField") -> "BivectorField":
        _same_chart(self, other)
        out = dict(self.upper)
        for k, p in other.upper.items():
            out[k] = out[k] + p if k in out else p
        return BivectorField(self.chart, out)

    def __sub__(self, other: "BivectorField") -> "BivectorField":
        return self + other.scale(-1)

    def __neg__(self) -> "BivectorField":
        return self.scale(-1)

    def scale(self, r) -> "BivectorField":
        r = as_rational(r)
        return BivectorField(self.chart, {k: p.scale(r) for k, p in self.upper.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivectorField):
            return NotImplemented
        return self.chart == other.chart and self.upper == other.upper

    def __hash__(self):
        return hash((self.chart, frozenset(self.upper.items())))

    def is_zero(self) -> bool:
        return not self.upper

    def map_coefficients(self, fn) -> "BivectorField":
        return BivectorField(self.chart, {k: fn(p) for k, p in self.upper.items()})

    def pair(self, f: Polynomial, g: Polynomial) -> Polynomial:
        """pi(df, dg) = sum_{i<j} pi^{ij} (f_i g_j - f_j g_i)."""
        _check_dim(self.chart, f)
        _check_dim(self.chart, g)
        df = [f.diff(i) for i in range(self.dim)]
        dg = [g.diff(i) for i in range(self.dim)]
        total = self.chart.zero()
        for (i, j), p in self.upper.items():
            w = df[i] * dg[j] - df[j] * dg[i]
            if w:
                total = total + p * w
        return total

    def render(self) -> str:
        names = self.chart.names
        if not self.upper:
            return "0"
        return "\n".join(f"{names[i]},{names[j]}: {p.render(names)}"
                         for (i, j), p in sorted(self.upper.items()))


def _sort_sign(idx: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    idx = list(idx)
    sign = 1
    for a in range(len(idx)):
        for b in range(len(idx) - 1 - a):
            if idx[b] > idx[b + 1]:
                idx[b], idx[b + 1] = idx[b + 1], idx[b]
                sign = -sign
    return tuple(idx), sign


@dataclass(frozen=True)
class TrivectorField:
    """Fully antisymmetric 3-tensor; ``components`` holds T^{ijk}, i<j<k."""

    chart: CoordinateChart
    components: Mapping[tuple[int, int, int], Polynomial] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, p in dict(self.components).items():
            i, j, k = key
            if not (0 <= i < j < k < self.chart.dim):
                raise ValueError(f"trivector key {key} is not strictly increasing")
            _check_dim(self.chart, p)
            if p:
                clean[key] = p
        object.__setattr__(self, "components", clean)

    def __getitem__(self, ijk: tuple[int, int, int]) -> Polynomial:
        if len(set(ijk)) < 3:
            return self.chart.zero()
        key, sign = _sort_sign(ijk)
        p = self.components.get(key)
        if p is None:
            return self.chart.zero()
        return p if sign > 0 else -p

    def is_zero(self) -> bool:
        return not self.components

    @property
    def trivially_zero(self) -> bool:
        """True when the chart is too small to carry any trivector."""
        return self.chart.dim < 3

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrivectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components

    def __hash__(self):
        return hash((self.chart, frozenset(self.components.items())))

    def render(self) -> str:
        names = self.chart.names
        if not self.components:
            return "0"
        return "\n".join(f"{names[i]},{names[j]},{names[k]}: {p.render(names)}"
                         for (i, j, k), p in sorted(self.components.items()))


@dataclass(frozen=True)
class SymmetricTensorField:
    """Symmetric contravariant 2-tensor; ``entries`` holds sigma^{ij}, i<=j."""

    chart: CoordinateChart
    entries: Mapping[tuple[int, int], Polynomial] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), p in dict(self.entries).items():
            if not (0 <= i <= j < self.chart.dim):
                raise ValueError(f"symmetric key {(i, j)} is not upper-triangular")
            _check_dim(self.chart, p)
            if p:
                clean[(i, j)] = p
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, ij: tuple[int, int]) -> Polynomial:
        i, j = ij
        key = (i, j) if i <= j else (j, i)
        return self.entries.get(key, self.chart.zero())

    def pair(self, f: Polynomial, g: Polynomial) -> Polynomial:
        """sigma(df, dg) = sum_{ij} sigma^{ij} f_i g_j."""
        df = [f.diff(i) for i in range(self.chart.dim)]
        dg = [g.diff(i) for i in range(self.chart.dim)]
        total = self.chart.zero()
        for (i, j), p in self.entries.items():
            w = df[i] * dg[j] if i == j else df[i] * dg[j] + df[j] * dg[i]
            if w:
                total = total + p * w
        return total

    def render(self) -> str:
        names = self.chart.names
        if not self.entries:
            return "0"
        return "\n".join(f"{names[i]},{names[j]}: {p.render(names)}"
                         for (i, j), p in sorted(self.entries.items()))


# -- operations --------------------------------------------------------------

def schouten_bb(P: BivectorField, Q: BivectorField) -> TrivectorField:
    """Schouten-Nijenhuis bracket of two bivectors.

    [P,Q]^{ijk} = sum_l (P^{li} d_l Q^{jk} + Q^{li} d_l P^{jk}) + cyclic(i,j,k),
    with no 1/2 normalisation, so [P,P]^{ijk} = -2 Jac_P(x_i, x_j, x_k).
    """
    chart = _same_chart(P, Q)
    n = chart.dim
    if n < 3:
        return TrivectorField(chart, {})
    # derivatives of the stored upper entries, computed once
    dP = {k: [p.diff(l) for l in range(n)] for k, p in P.upper.items()}
    dQ = dP if Q is P else {k: [q.diff(l) for l in range(n)] for k, q in Q.upper.items()}
    zero = chart.zero()

    def d_entry(dtab, a, b, l):
        if a == b:
            return zero
        key, sign = _upper_key(a, b)
        row = dtab.get(key)
        if row is None:
            return zero
        return row[l] if sign > 0 else -row[l]

    out = {}
    for i, j, k in combinations(range(n), 3):
        total = zero
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for l in range(n):
                pla = P[l, a]
                if pla:
                    d = d_entry(dQ, b, c, l)
                    if d:
                        total = total + pla * d
                qla = Q[l, a]
                if qla:
                    d = d_entry(dP, b, c, l)
                    if d:
                        total = total + qla * d
        if total:
            out[(i, j, k)] = total
    return TrivectorField(chart, out)


def lie_derivative_bivector(X: VectorField, P: BivectorField) -> BivectorField:
    """(L_X P)^{ij} = sum_l X^l d_l P^{ij} - P^{lj} d_l X^i - P^{il} d_l X^j."""
    chart = _same_chart(X, P)
    n = chart.dim
    dX = [[X[i].diff(l) for l in range(n)] for i in range(n)]
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            total = X.apply(P[i, j])
            for l in range(n):
                if dX[i][l]:
                    total = total - P[l, j] * dX[i][l]
                if dX[j][l]:
                    total = total - P[i, l] * dX[j][l]
            if total:
                out[(i, j)] = total
    return BivectorField(chart, out)


def sharp(P: BivectorField, f: Polynomial) -> VectorField:
    """Hamiltonian-type vector field with components sum_j P^{ij} df/dx_j."""
    _check_dim(P.chart, f)
    n = P.dim
    df = [f.diff(j) for j in range(n)]
    comps = []
    for i in range(n):
        total = P.chart.zero()
        for j in range(n):
            if df[j]:
                pij = P[i, j]
                if pij:
                    total = total + pij * df[j]
        comps.append(total)
    return VectorField(P.chart, tuple(comps))


def poisson_bracket(P: BivectorField, f: Polynomial, g: Polynomial) -> Polynomial:
    """{f, g} = P(df, dg) = sum_{ij} P^{ij} df/dx_i dg/dx_j."""
    _check_dim(P.chart, g)
    return P.pair(f, g)
