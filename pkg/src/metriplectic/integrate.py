"""Fixed-step integration of metriplectic fields with per-step diagnostics."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .brackets import MetriplecticSystem, metriplectic_field
from .multivector import VectorField
from .poly import CompiledPolynomials

SCHEMES = ("rk4", "midpoint")
MIDPOINT_MAX_ITER = 50
MIDPOINT_TOL = 1e-13


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float | None = None, trajectory: "Trajectory | None" = None):
        super().__init__(message)
        self.t = t
        self.trajectory = trajectory


class NonFiniteStateError(IntegrationError):
    pass


class MidpointDivergenceError(IntegrationError):
    pass


def compile_field(field_: VectorField) -> Callable[[np.ndarray], np.ndarray]:
    return CompiledPolynomials(list(field_.components))


def _rk4(f, x, dt):
    k1 = f(x)
    k2 = f(x + (dt / 2) * k1)
    k3 = f(x + (dt / 2) * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _midpoint(f, x, dt):
    y = x + dt * f(x)
    for it in range(MIDPOINT_MAX_ITER):
        y_new = x + dt * f((x + y) / 2)
        delta = float(np.max(np.abs(y_new - y))) if len(y) else 0.0
        y = y_new
        if not math.isfinite(delta):
            break
        # absolute tolerance, scaled once the state is larger than one
        if delta <= MIDPOINT_TOL * max(1.0, float(np.max(np.abs(y)))):
            return y
    raise MidpointDivergenceError(
        f"implicit midpoint fixed point did not converge in {MIDPOINT_MAX_ITER} iterations "
        f"(last update {delta:.3e})")


def step(field_, x, dt: float, scheme: str = "rk4", t: float = 0.0) -> np.ndarray:
    """Advance ``x`` by one step of ``dt``.

    ``field_`` is a VectorField or an already compiled callable.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    f = compile_field(field_) if isinstance(field_, VectorField) else field_
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError(f"non-finite state at t={t}", t)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    # overflow is detected below and reported with context
    with np.errstate(over="ignore", invalid="ignore"):
        if scheme == "rk4":
            y = _rk4(f, x, dt)
        else:
            try:
                y = _midpoint(f, x, dt)
            except MidpointDivergenceError as exc:
                raise MidpointDivergenceError(f"{exc} at t={t}", t) from None
    bad = np.flatnonzero(~np.isfinite(y))
    if len(bad):
        raise NonFiniteStateError(
            f"state component {int(bad[0])} became non-finite stepping from t={t}", t)
    return y


@dataclass(frozen=True)
class DiagnosticRecord:
    t: float
    state: np.ndarray
    H: float
    S: float
    casimir_values: dict[str, float]
    production_rate: float


@dataclass
class Trajectory:
    dt: float
    scheme: str
    coordinate_names: tuple[str, ...]
    casimir_names: tuple[str, ...]
    records: list[DiagnosticRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def states(self) -> np.ndarray:
        return np.array([r.state for r in self.records])

    def column(self, name: str) -> np.ndarray:
        if name == "H":
            return np.array([r.H for r in self.records])
        if name == "S":
            return np.array([r.S for r in self.records])
        if name == "production":
            return np.array([r.production_rate for r in self.records])
        if name in self.coordinate_names:
            return self.states[:, self.coordinate_names.index(name)]
        name = name.removeprefix("casimir:")
        return np.array([r.casimir_values[name] for r in self.records])

    def header(self) -> list[str]:
        # casimir columns are prefixed so they cannot collide with coordinates
        return ["t", *self.coordinate_names, "H", "S",
                *(f"casimir:{n}" for n in self.casimir_names), "production"]

    def rows(self):
        for r in self.records:
            yield [r.t, *r.state.tolist(), r.H, r.S,
                   *(r.casimir_values[n] for n in self.casimir_names), r.production_rate]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for row in self.rows():
                w.writerow([f"{v:.17g}" for v in row])


class _Diagnostics:
    def __init__(self, system: MetriplecticSystem, extra_casimirs=()):
        self.names = tuple(n for n, _ in system.casimirs) + tuple(n for n, _ in extra_casimirs)
        polys = [system.hamiltonian, system.entropy, system.production_factor()]
        polys += [c for _, c in system.casimirs] + [c for _, c in extra_casimirs]
        self._eval = CompiledPolynomials(polys)
        self.tau = float(system.tau)

    def record(self, t: float, x: np.ndarray) -> DiagnosticRecord:
        v = self._eval(x)
        return DiagnosticRecord(
            t=t, state=x.copy(), H=float(v[0]), S=float(v[1]),
            casimir_values={n: float(c) for n, c in zip(self.names, v[3:])},
            production_rate=self.tau * float(v[2]) ** 2)


def simulate(system: MetriplecticSystem, x0: Sequence[float], dt: float, n_steps: int,
             scheme: str = "rk4", extra_casimirs=(), compiled=None) -> Trajectory:
    """Integrate the metriplectic field from ``x0`` for ``n_steps`` steps.

    Records at step k carry time ``k * dt`` (multiplied, not accumulated).
    ``extra_casimirs`` adds named invariants (e.g. of the deformed
    structure) to the diagnostics. On failure the partial trajectory is
    attached to the raised IntegrationError.
    """
    chart = system.chart
    x = np.asarray(x0, dtype=float)
    if x.shape != (chart.dim,):
        raise ValueError(f"initial state has length {len(x0)}, chart {chart.names} needs {chart.dim}")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    f = compiled or compile_field(metriplectic_field(system))
    diag = _Diagnostics(system, extra_casimirs)
    traj = Trajectory(dt=dt, scheme=scheme, coordinate_names=chart.names,
                      casimir_names=diag.names)
    traj.records.append(diag.record(0.0, x))
    for k in range(n_steps):
        t = k * dt
        try:
            x = step(f, x, dt, scheme, t=t)
        except IntegrationError as exc:
            exc.trajectory = traj
            raise
        traj.records.append(diag.record((k + 1) * dt, x))
    return traj


def _simulate_job(args):
    system, x0, dt, n_steps, scheme, extra = args
    return simulate(system, x0, dt, n_steps, scheme, extra)


def simulate_batch(system: MetriplecticSystem, initial_states: Sequence[Sequence[float]],
                   dt: float, n_steps: int, scheme: str = "rk4", jobs: int = 1,
                   extra_casimirs=()) -> list[Trajectory]:
    """One trajectory per initial state; ``jobs > 1`` runs them in worker processes."""
    args = [(system, list(x0), dt, n_steps, scheme, tuple(extra_casimirs)) for x0 in initial_states]
    if jobs <= 1 or len(args) <= 1:
        return [_simulate_job(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_simulate_job, args))


def final_state(f, x0, dt: float, n_steps: int, scheme: str) -> np.ndarray:
    x = np.asarray(x0, dtype=float)
    for k in range(n_steps):
        x = step(f, x, dt, scheme, t=k * dt)
    return x


def estimate_order(system: MetriplecticSystem, x0, dt: float = 0.1, scheme: str = "rk4",
                   t_final: float = 1.0) -> float:
    """Empirical convergence order from runs at dt, dt/2, dt/4 against dt/16.

    Returns the least-squares slope of log(error) vs log(dt), or ``nan``
    (with a warning) when the errors vanish and the order is undefined.
    """
    f = compile_field(metriplectic_field(system))
    n = int(round(t_final / dt))
    if n < 1 or not math.isclose(n * dt, t_final, rel_tol=1e-12):
        raise ValueError("t_final must be a positive multiple of dt")
    ref = final_state(f, x0, dt / 16, 16 * n, scheme)
    hs, errs = [], []
    for m in (1, 2, 4):
        x = final_state(f, x0, dt / m, m * n, scheme)
        hs.append(dt / m)
        errs.append(float(np.max(np.abs(x - ref))))
    if min(errs) <= 0.0:
        warnings.warn("errors vanish at every step size; convergence order is undefined",
                      RuntimeWarning, stacklevel=2)
        return math.nan
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    return float(slope)
