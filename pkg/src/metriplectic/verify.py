"""Pass/fail reports for the Poisson, cocycle, Casimir and metriplectic conditions."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .brackets import (
    MetriplecticSystem,
    TensorProduct,
    entropy_production,
    metriplectic_field,
    symmetric_bracket,
)
from .multivector import BivectorField, _same_chart, schouten_bb, sharp
from .poly import Polynomial

PASS, FAIL, TRIVIAL = "pass", "fail", "trivial"
DEFAULT_SEED = 20240917


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    residual: str = ""

    def __post_init__(self):
        if self.status not in (PASS, FAIL, TRIVIAL):
            raise ValueError(f"bad status {self.status!r}")
        if (self.status == FAIL) != bool(self.residual):
            raise ValueError("a check fails exactly when it carries a residual")


@dataclass
class VerificationReport:
    subject: str
    checks: list[Check] = field(default_factory=list)
    seed: int | None = None

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def add(self, name: str, status: str, residual: str = "") -> Check:
        c = Check(name, status, residual)
        self.checks.append(c)
        return c

    def extend(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.status, c.residual))
        return self

    def to_text(self) -> str:
        head = f"# {self.subject}"
        if self.seed is not None:
            head += f" (seed={self.seed})"
        lines = [head]
        for c in self.checks:
            lines.append(f"{c.status.upper():7s} {c.name}")
            for r in c.residual.splitlines():
                lines.append(f"        {r}")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [{"subject": self.subject, "name": c.name, "status": c.status,
                 "residual": c.residual} for c in self.checks]

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.to_records())


def _status_of(zero: bool, trivial: bool = False) -> str:
    if trivial:
        return TRIVIAL
    return PASS if zero else FAIL


def check_jacobi(P: BivectorField, subject: str = "bivector") -> VerificationReport:
    report = VerificationReport(subject)
    tri = schouten_bb(P, P)
    if tri.trivially_zero:
        report.add("jacobi [pi,pi]=0", TRIVIAL)
    else:
        report.add("jacobi [pi,pi]=0", _status_of(tri.is_zero()),
                   "" if tri.is_zero() else tri.render())
    return report


def check_cocycle(P: BivectorField, a: BivectorField, subject: str = "cocycle") -> VerificationReport:
    _same_chart(P, a)
    report = VerificationReport(subject)
    for name, tri in (("cocycle [pi,a]=0", schouten_bb(P, a)),
                      ("cocycle [a,a]=0", schouten_bb(a, a))):
        if tri.trivially_zero:
            report.add(name, TRIVIAL)
        else:
            report.add(name, _status_of(tri.is_zero()), "" if tri.is_zero() else tri.render())
    return report


def check_casimir(P: BivectorField, C: Polynomial, name: str = "C",
                  subject: str = "casimir") -> VerificationReport:
    report = VerificationReport(subject)
    res = sharp(P, C)
    report.add(f"casimir {name}", _status_of(res.is_zero()),
               "" if res.is_zero() else res.render(skip_zero=True))
    return report


def random_rational_point(rng: random.Random, dim: int, max_den: int = 64) -> list[Fraction]:
    out = []
    for _ in range(dim):
        d = rng.randint(1, max_den)
        out.append(Fraction(rng.randint(-2 * d, 2 * d), d))
    return out


def random_polynomial(rng: random.Random, dim: int, degree: int = 2, n_terms: int = 6,
                      coeff_range: int = 5) -> Polynomial:
    terms = {}
    for _ in range(n_terms):
        remaining = rng.randint(0, degree)
        mono = [0] * dim
        for _ in range(remaining):
            mono[rng.randrange(dim)] += 1
        terms[tuple(mono)] = rng.randint(-coeff_range, coeff_range)
    return Polynomial(dim, terms)


def check_metriplectic_axioms(system: MetriplecticSystem, seed: int = DEFAULT_SEED,
                              n_functions: int = 10, n_points: int = 1000,
                              subject: str | None = None) -> VerificationReport:
    """Entropy Casimir, degenerate Hamiltonian, production identity, positivity."""
    chart = system.chart
    report = VerificationReport(subject or system.name or "system", seed=seed)
    H, S = system.hamiltonian, system.entropy

    res = sharp(system.base, S)
    report.add("entropy is a base Casimir", _status_of(res.is_zero()),
               "" if res.is_zero() else res.render(skip_zero=True))

    bad = []
    for i, x in enumerate(chart.coordinates()):
        v = symmetric_bracket(system, H, x)
        if v:
            bad.append(f"{chart.names[i]}: {chart.render(v)}")
    report.add("((H,x_i))=0", _status_of(not bad), "\n".join(bad))

    field_ = metriplectic_field(system)
    dH = field_.apply(H)
    report.add("dH/dt=0", _status_of(dH.is_zero()), "" if dH.is_zero() else chart.render(dH))

    production = entropy_production(system)
    dS = field_.apply(S)
    diff = dS - production
    if diff:
        report.add("dS/dt=tau((S,S))", FAIL, chart.render(diff))
    else:
        report.add("dS/dt=tau((S,S))", _status_of(True, trivial=production.is_zero()))

    rng = random.Random(seed)
    negative = []
    spec = system.four_bracket
    for _ in range(n_functions):
        f = random_polynomial(rng, chart.dim)
        if isinstance(spec, TensorProduct):
            # ((f,f)) = a(df,dH)^2: evaluate the factor exactly, then square
            factor = spec.a.pair(f, H)
            value_at = lambda pt, q=factor: q.eval(pt) ** 2
        else:
            ff = symmetric_bracket(system, f, f)
            value_at = ff.eval
        for _ in range(n_points):
            pt = random_rational_point(rng, chart.dim)
            v = value_at(pt)
            if v < 0:
                negative.append(f"(({chart.render(f)})) = {v} at {[str(t) for t in pt]}")
                break
    report.add("((f,f))>=0 spot check", _status_of(not negative), "\n".join(negative))
    return report


def gradient_fd_check(f: Polynomial, points: int = 100, seed: int = DEFAULT_SEED,
                      h: float = 1e-5, rtol: float = 1e-6, subject: str = "gradient",
                      names: Sequence[str] | None = None) -> VerificationReport:
    """Symbolic gradient vs central differences at random points in [-1, 1]^n."""
    import numpy as np

    report = VerificationReport(subject, seed=seed)
    rng = np.random.default_rng(seed)
    grad = f.gradient()
    worst = 0.0
    worst_at = None
    for _ in range(points):
        x = rng.uniform(-1.0, 1.0, f.dim)
        exact = np.array([g.eval(list(x)) for g in grad], dtype=float)
        fd = np.empty(f.dim)
        for i in range(f.dim):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd[i] = (f.eval(list(xp)) - f.eval(list(xm))) / (2 * h)
        scale = max(np.max(np.abs(exact)), 1.0)
        err = float(np.max(np.abs(exact - fd))) / scale
        if err > worst:
            worst, worst_at = err, x
    if worst < rtol:
        report.add(f"fd gradient (max rel err {worst:.2e})", PASS)
    else:
        report.add(f"fd gradient (max rel err {worst:.2e})", FAIL,
                   f"at {np.array2string(worst_at, precision=6)}")
    return report


def full_battery(system: MetriplecticSystem, extended_casimirs: Iterable[tuple[str, Polynomial]] = (),
                 seed: int = DEFAULT_SEED, subject: str | None = None,
                 n_points: int = 1000) -> VerificationReport:
    """Jacobi, cocycle, every declared Casimir, and the metriplectic axioms."""
    s = system.structure
    report = VerificationReport(subject or system.name or "system", seed=seed)
    report.extend(check_jacobi(s.base))
    if not s.cocycle.is_zero():
        report.extend(check_cocycle(s.base, s.cocycle))
    for name, C in system.casimirs:
        report.extend(check_casimir(s.base, C, name))
    deformed = s.deformed()
    for name, C in extended_casimirs:
        report.extend(check_casimir(deformed, C, name), prefix="deformed ")
    report.extend(check_metriplectic_axioms(system, seed=seed, n_points=n_points))
    return report
