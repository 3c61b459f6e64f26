"""Metriplectic structure: deformed Poisson brackets, 4-brackets and flows.

The state evolves as ``dx^i/dt = {x^i, H} + tau * ((S, x^i))`` where the
symmetric bracket is ``((f, g)) = (f, H; g, H)`` for a chosen 4-bracket.
By default the 4-bracket is the tensor square of the (epsilon-scaled)
cocycle, giving ``((f, g)) = a(df, dH) a(dg, dH)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .multivector import (
    BivectorField,
    ChartMismatchError,
    CoordinateChart,
    SymmetricTensorField,
    VectorField,
    _same_chart,
    poisson_bracket,
    sharp,
)
from .poly import Coefficient, DimensionError, Polynomial, as_rational


class StructureError(ValueError):
    """A system violates a metriplectic construction requirement."""

    def __init__(self, message: str, residual: str = ""):
        super().__init__(message)
        self.residual = residual


class IsentropicWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DeformedPoissonStructure:
    base: BivectorField
    cocycle: BivectorField
    epsilon: Coefficient = 1

    def __post_init__(self):
        _same_chart(self.base, self.cocycle)
        object.__setattr__(self, "epsilon", as_rational(self.epsilon))

    @property
    def chart(self) -> CoordinateChart:
        return self.base.chart

    def scaled_cocycle(self) -> BivectorField:
        return self.cocycle.scale(self.epsilon)

    def deformed(self) -> BivectorField:
        return self.base + self.scaled_cocycle()


@dataclass(frozen=True)
class TensorProduct:
    """T = a (x) a, i.e. (f,g;h,k) = a(df,dg) a(dh,dk)."""
    a: BivectorField

    @property
    def chart(self) -> CoordinateChart:
        return self.a.chart


@dataclass(frozen=True)
class KulkarniNomizu:
    """Contravariant Kulkarni-Nomizu-type product of two symmetric tensors."""
    sigma: SymmetricTensorField
    mu: SymmetricTensorField

    def __post_init__(self):
        if self.sigma.chart != self.mu.chart:
            raise ChartMismatchError("sigma and mu live on different charts")

    @property
    def chart(self) -> CoordinateChart:
        return self.sigma.chart


FourBracketSpec = TensorProduct | KulkarniNomizu


def _check(chart: CoordinateChart, *polys: Polynomial):
    for p in polys:
        if p.dim != chart.dim:
            raise DimensionError(f"polynomial dimension {p.dim} does not match chart {chart.dim}")


def four_bracket(spec: FourBracketSpec, f: Polynomial, g: Polynomial,
                 h: Polynomial, k: Polynomial) -> Polynomial:
    """(f,g;h,k) = T(df,dg,dh,dk)."""
    _check(spec.chart, f, g, h, k)
    if isinstance(spec, TensorProduct):
        left = spec.a.pair(f, g)
        if not left:
            return left
        return left * spec.a.pair(h, k)
    if isinstance(spec, KulkarniNomizu):
        s, m = spec.sigma.pair, spec.mu.pair
        return (s(f, g) * m(h, k) - s(f, k) * m(g, h)
                + m(f, g) * s(h, k) - m(f, k) * s(g, h))
    raise TypeError(f"unknown 4-bracket kind {type(spec).__name__}")


@dataclass(frozen=True)
class MetriplecticSystem:
    """Complete dynamical specification of a metriplectic flow.

    ``four_bracket`` defaults to the tensor square of the epsilon-scaled
    cocycle. Construction rejects an entropy that is not a Casimir of the
    base structure; an entropy that is also a Casimir of the deformed
    structure is accepted but flagged ``isentropic``.
    """

    structure: DeformedPoissonStructure
    hamiltonian: Polynomial
    entropy: Polynomial
    tau: Coefficient = 1
    casimirs: tuple[tuple[str, Polynomial], ...] = ()
    four_bracket: FourBracketSpec | None = None
    name: str = ""
    isentropic: bool = field(init=False, default=False)

    def __post_init__(self):
        chart = self.structure.chart
        _check(chart, self.hamiltonian, self.entropy, *(c for _, c in self.casimirs))
        object.__setattr__(self, "tau", as_rational(self.tau))
        object.__setattr__(self, "casimirs", tuple((str(n), c) for n, c in self.casimirs))
        if self.tau <= 0:
            raise StructureError(f"temperature tau must be positive, got {self.tau}")
        if self.four_bracket is None:
            object.__setattr__(self, "four_bracket", TensorProduct(self.structure.scaled_cocycle()))
        elif self.four_bracket.chart != chart:
            raise ChartMismatchError("4-bracket tensor lives on a different chart")
        residual = sharp(self.structure.base, self.entropy)
        if not residual.is_zero():
            raise StructureError("entropy is not a Casimir of the base Poisson structure",
                                 residual.render(skip_zero=True))
        if sharp(self.structure.deformed(), self.entropy).is_zero():
            object.__setattr__(self, "isentropic", True)
            warnings.warn(f"entropy of {self.name or 'system'} is also a Casimir of the "
                          "deformed structure; the flow is isentropic",
                          IsentropicWarning, stacklevel=3)

    @property
    def chart(self) -> CoordinateChart:
        return self.structure.chart

    @property
    def base(self) -> BivectorField:
        return self.structure.base

    @property
    def dissipative_bivector(self) -> BivectorField | None:
        spec = self.four_bracket
        return spec.a if isinstance(spec, TensorProduct) else None

    def production_factor(self) -> Polynomial:
        """a(dS, dH) for tensor-product dissipation (its square is the production)."""
        a = self.dissipative_bivector
        if a is None:
            return self.chart.zero()
        return a.pair(self.entropy, self.hamiltonian)

    def with_(self, **changes) -> "MetriplecticSystem":
        params = dict(structure=self.structure, hamiltonian=self.hamiltonian,
                      entropy=self.entropy, tau=self.tau, casimirs=self.casimirs,
                      four_bracket=self.four_bracket, name=self.name)
        if "structure" in changes and "four_bracket" not in changes \
                and isinstance(self.four_bracket, TensorProduct):
            params["four_bracket"] = None
        params.update(changes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IsentropicWarning)
            return MetriplecticSystem(**params)


def symmetric_bracket(system: MetriplecticSystem, f: Polynomial, g: Polynomial) -> Polynomial:
    """((f, g)) = (f, H; g, H)."""
    H = system.hamiltonian
    return four_bracket(system.four_bracket, f, H, g, H)


def reversible_field(system: MetriplecticSystem) -> VectorField:
    """Conservative part: component i is {x_i, H} on the base structure."""
    return sharp(system.base, system.hamiltonian)


def dissipative_field(system: MetriplecticSystem) -> VectorField:
    """Component i is tau * ((S, x_i))."""
    chart = system.chart
    spec = system.four_bracket
    if isinstance(spec, TensorProduct):
        factor = system.production_factor()
        if not factor:
            return VectorField.zero(chart)
        return sharp(spec.a, system.hamiltonian).times(factor * system.tau)
    comps = [symmetric_bracket(system, system.entropy, x) * system.tau
             for x in chart.coordinates()]
    return VectorField(chart, tuple(comps))


def metriplectic_field(system: MetriplecticSystem) -> VectorField:
    return reversible_field(system) + dissipative_field(system)


def entropy_production(system: MetriplecticSystem) -> Polynomial:
    """tau * ((S, S)), the exact entropy production rate."""
    return symmetric_bracket(system, system.entropy, system.entropy) * system.tau


def hamiltonian_field(P: BivectorField, H: Polynomial) -> VectorField:
    return sharp(P, H)


def bracket_table(P: BivectorField) -> dict[tuple[str, str], Polynomial]:
    """Nonzero coordinate brackets {x_i, x_j}, i<j, keyed by name."""
    names = P.chart.names
    return {(names[i], names[j]): p for (i, j), p in sorted(P.upper.items())}


def pairing(X: VectorField, f: Polynomial) -> Polynomial:
    """<df, X>, the rate of change of f along X."""
    return X.apply(f)


__all__ = [
    "DeformedPoissonStructure", "TensorProduct", "KulkarniNomizu", "FourBracketSpec",
    "MetriplecticSystem", "StructureError", "IsentropicWarning", "four_bracket",
    "symmetric_bracket", "reversible_field", "dissipative_field", "metriplectic_field",
    "entropy_production", "bracket_table", "pairing", "poisson_bracket",
]
