"""Command-line interface: ``metriplectic {models,check,simulate,eval}``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 runtime error. Every run ends with one summary line on stderr::

    cmd=<name> status=<ok|fail|error> elapsed_ms=<int>
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .brackets import IsentropicWarning, StructureError, symmetric_bracket
from .integrate import SCHEMES, IntegrationError, simulate_batch
from .models import BUILTIN_NAMES, ModelDescriptor, get_model, registry
from .multivector import poisson_bracket
from .parser import (ModelVerificationError, ParseError, build_system, load_model_file,
                     parse_expression, parse_rational)
from .verify import DEFAULT_SEED, full_battery

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
OUTPUT_DIR_ENV = "METRIPLECTIC_OUTPUT_DIR"
_STATUS = {EXIT_OK: "ok", EXIT_FAIL: "fail", EXIT_USAGE: "error", EXIT_RUNTIME: "error"}


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    pass


@dataclass
class ResolvedModel:
    """A builtin descriptor or a parsed model file, viewed uniformly."""
    name: str
    chart: object
    extended_casimirs: tuple
    descriptor: ModelDescriptor | None = None
    model_file: object = None

    def system(self, hamiltonian=None, entropy=None, tau=None, epsilon=None):
        if self.descriptor is not None:
            kw = {} if epsilon is None else {"epsilon": epsilon}
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", IsentropicWarning)
                    return self.descriptor.system(hamiltonian, entropy,
                                                  tau=1 if tau is None else tau, **kw)
            except StructureError as exc:
                raise VerificationFailed(f"{exc}\n{exc.residual}") from None
        mf = self.model_file
        if epsilon is not None:
            mf.epsilon = epsilon
        try:
            system, _ = build_system(mf, hamiltonian, entropy, tau)
        except ModelVerificationError as exc:
            raise VerificationFailed(f"{exc}\n{exc.report.to_text()}") from None
        return system


def _is_path(target: str) -> bool:
    return target.endswith(".model") or os.sep in target or Path(target).is_file()


def resolve(target: str) -> ResolvedModel:
    if _is_path(target):
        path = Path(target)
        if not path.is_file():
            raise UsageError(f"model file not found: {target}")
        mf = load_model_file(path)
        return ResolvedModel(mf.name, mf.chart, tuple(mf.extended_casimirs), model_file=mf)
    try:
        d = get_model(target)
    except KeyError as exc:
        raise UsageError(f"{exc.args[0]}; builtins are {', '.join(BUILTIN_NAMES)}") from None
    return ResolvedModel(d.name, d.chart, d.extended_casimirs, descriptor=d)


def _rational_flag(text: str, flag: str):
    try:
        return parse_rational(text)
    except ParseError:
        raise UsageError(f"{flag} expects an integer or p/q rational, got {text!r}") from None


def _expr(text: str | None, chart, flag: str):
    if text is None:
        return None
    try:
        return parse_expression(text, chart)
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, exc.col, flag) from None


def _parse_point(text: str, dim: int, exact_ok: bool = True):
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if len(parts) != dim:
        raise UsageError(f"point {text!r} has {len(parts)} components, chart needs {dim}")
    try:
        if exact_ok and all(_looks_rational(s) for s in parts):
            return [Fraction(s) for s in parts], True
        return [float(s) for s in parts], False
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot read point {text!r}") from None


def _looks_rational(s: str) -> bool:
    head, _, tail = s.lstrip("+-").partition("/")
    return head.isdigit() and (not tail or tail.isdigit())


def _format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


# -- commands -------------------------------------------------------------------

def cmd_models(args, out) -> int:
    if args.name is None:
        out.write(f"{'name':14s} {'dim':>3s}  casimirs{'':12s} cocycle\n")
        for d in registry():
            cas = ",".join(n for n, _ in d.casimirs) or "-"
            cocycle = "yes" if d.cocycle is not None and not d.cocycle.is_zero() else "no"
            out.write(f"{d.name:14s} {d.dim:3d}  {cas:20s} {cocycle}\n")
        out.write(f"parametric: {', '.join(n for n in BUILTIN_NAMES if ':' in n)}\n")
        return EXIT_OK
    try:
        d = get_model(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    names = d.chart.names
    out.write(f"model: {d.name}\n")
    if d.notes:
        out.write(f"notes: {d.notes}\n")
    out.write(f"coordinates: {', '.join(names)}  (dim {d.dim})\n")
    out.write("bivector matrix:\n")
    out.write(_matrix_text(d.base) + "\n")
    if d.cocycle is not None:
        out.write("cocycle matrix:\n" + _matrix_text(d.cocycle) + "\n")
    for label, items in (("casimirs", d.casimirs), ("extended casimirs", d.extended_casimirs)):
        if items:
            out.write(f"{label}:\n")
            for n, c in items:
                out.write(f"  {n} = {c.render(names)}\n")
    out.write(f"default hamiltonian: {d.default_hamiltonian.render(names)}\n")
    out.write(f"default entropy: {d.default_entropy.render(names)}\n")
    return EXIT_OK


def _matrix_text(P) -> str:
    names = P.chart.names
    cells = [[P[i, j].render(names) for j in range(P.dim)] for i in range(P.dim)]
    width = max([len(c) for row in cells for c in row] + [len(n) for n in names])
    lines = [" " * (width + 2) + " ".join(n.rjust(width) for n in names)]
    for n, row in zip(names, cells):
        lines.append(n.rjust(width) + "  " + " ".join(c.rjust(width) for c in row))
    return "\n".join(lines)


def cmd_check(args, out) -> int:
    m = resolve(args.target)
    if m.model_file is not None:
        try:
            _, report = build_system(m.model_file)
        except ModelVerificationError as exc:
            out.write(exc.report.to_text() + "\n")
            out.write(f"rejected: {exc}\n")
            return EXIT_FAIL
        report.seed = args.seed
    else:
        system = m.system()
        report = full_battery(system, m.extended_casimirs, seed=args.seed, n_points=args.points)
    if args.format == "jsonl":
        out.write(report.to_jsonl() + "\n")
    else:
        out.write(report.to_text() + "\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def _read_initial(text: str, dim: int) -> list[list[float]]:
    if text.startswith("@"):
        path = Path(text[1:])
        if not path.is_file():
            raise UsageError(f"initial-condition file not found: {path}")
        rows = [ln.split("#", 1)[0].strip() for ln in path.read_text().splitlines()]
        rows = [r for r in rows if r]
        if not rows:
            raise UsageError(f"no initial conditions in {path}")
        return [_parse_point(r, dim, exact_ok=False)[0] for r in rows]
    return [_parse_point(text, dim, exact_ok=False)[0]]


def _output_paths(output: str | None, name: str, count: int) -> list[Path]:
    if output is None:
        base = Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{name.replace(':', '_')}.csv"
    else:
        base = Path(output)
    if count == 1:
        return [base]
    return [base.with_name(f"{base.stem}_{k}{base.suffix or '.csv'}") for k in range(count)]


def cmd_simulate(args, out) -> int:
    m = resolve(args.model)
    H = _expr(args.hamiltonian, m.chart, "--hamiltonian")
    S = _expr(args.entropy, m.chart, "--entropy")
    tau = None if args.tau is None else _rational_flag(args.tau, "--tau")
    eps = None if args.epsilon is None else _rational_flag(args.epsilon, "--epsilon")
    if args.dt <= 0 or args.steps < 1:
        raise UsageError("--dt must be positive and --steps at least 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    initial = _read_initial(args.initial, m.chart.dim)
    system = m.system(H, S, tau, eps)
    trajectories = simulate_batch(system, initial, args.dt, args.steps, args.scheme,
                                  jobs=args.jobs, extra_casimirs=m.extended_casimirs)
    for path, traj in zip(_output_paths(args.output, m.name, len(initial)), trajectories):
        path.parent.mkdir(parents=True, exist_ok=True)
        traj.to_csv(path)
        out.write(f"wrote {path} ({len(traj)} rows)\n")
    return EXIT_OK


def cmd_eval(args, out) -> int:
    m = resolve(args.model)
    if args.expr is None and args.bracket is None:
        raise UsageError("eval needs --expr and/or --bracket")
    point, exact = _parse_point(args.at, m.chart.dim)
    if args.expr is not None:
        p = _expr(args.expr, m.chart, "--expr")
        out.write(_format_value(p.eval(point)) + "\n")
    if args.bracket is not None:
        parts = args.bracket.split(",")
        if len(parts) != 2:
            raise UsageError("--bracket expects two expressions separated by a comma")
        f = _expr(parts[0], m.chart, "--bracket")
        g = _expr(parts[1], m.chart, "--bracket")
        H = _expr(args.hamiltonian, m.chart, "--hamiltonian")
        S = _expr(args.entropy, m.chart, "--entropy")
        system = m.system(H, S)
        pb = poisson_bracket(system.structure.deformed(), f, g)
        sb = symmetric_bracket(system, f, g)
        out.write(f"poisson = {_format_value(pb.eval(point))}\n")
        out.write(f"symmetric = {_format_value(sb.eval(point))}\n")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="metriplectic",
                 description="Verify and simulate metriplectic systems built on Poisson structures.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("models", help="list builtin models, or show one in detail")
    p.add_argument("--name")

    p = sub.add_parser("check", help="run the verification battery on a builtin or model file")
    p.add_argument("target")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--points", type=int, default=1000, help="sample points for the positivity spot check")
    p.add_argument("--format", choices=("text", "jsonl"), default="text")

    p = sub.add_parser("simulate", help="integrate the metriplectic flow and write CSV")
    p.add_argument("model")
    p.add_argument("--hamiltonian")
    p.add_argument("--entropy")
    p.add_argument("--initial", required=True, help="comma-separated state, or @file with one per line")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--scheme", choices=SCHEMES, default="rk4")
    p.add_argument("--tau", help="temperature as integer or p/q (default 1)")
    p.add_argument("--epsilon", help="cocycle scale as integer or p/q")
    p.add_argument("--output", help=f"CSV path (default ${OUTPUT_DIR_ENV}/<model>.csv)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="recorded for reproducibility; integration itself is deterministic")

    p = sub.add_parser("eval", help="evaluate an expression or brackets at a point")
    p.add_argument("model")
    p.add_argument("--expr")
    p.add_argument("--bracket", help="f,g")
    p.add_argument("--at", required=True)
    p.add_argument("--hamiltonian")
    p.add_argument("--entropy")
    return ap


COMMANDS = {"models": cmd_models, "check": cmd_check, "simulate": cmd_simulate, "eval": cmd_eval}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    start = time.perf_counter()
    name = "none"
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:   # --help
            code = EXIT_OK if not exc.code else EXIT_USAGE
            return _finish(code, name, start, err)
        name = args.command or "none"
        if args.command is None:
            raise UsageError("a command is required: models, check, simulate or eval")
        code = COMMANDS[args.command](args, out)
    except (UsageError, ParseError) as exc:
        err.write(f"error: {exc}\n")
        code = EXIT_USAGE
    except VerificationFailed as exc:
        err.write(f"verification failed: {exc}\n")
        code = EXIT_FAIL
    except IntegrationError as exc:
        last = exc.trajectory.records[-1].t if exc.trajectory and exc.trajectory.records else None
        err.write(f"integration failed: {exc} (last good t={last})\n")
        code = EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last-resort runtime error
        err.write(f"runtime error: {type(exc).__name__}: {exc}\n")
        code = EXIT_RUNTIME
    return _finish(code, name, start, err)


def _finish(code: int, name: str, start: float, err) -> int:
    elapsed = int((time.perf_counter() - start) * 1000)
    err.write(f"cmd={name} status={_STATUS[code]} elapsed_ms={elapsed}\n")
    err.flush()
    return code


def run() -> None:
    sys.exit(main())
