"""Polynomial expressions and model definition files.

Expression grammar (whitespace insignificant, no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' uint)?
    atom   := rational | identifier | '(' expr ')' | '-' factor

A divisor must be free of identifiers and nonzero.

Model files hold one ``key = value`` line or one ``section {`` / ``}``
line at a time; ``#`` starts a comment. See ``docs/model_format.md``.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .multivector import BivectorField, CoordinateChart
from .poly import Polynomial, as_rational

MAX_EXPONENT = 256
MAX_DEGREE = 256
MAX_TERMS = 20_000
MAX_PRODUCT_WORK = 4_000_000
MAX_COEFF_BITS = 65_536
MAX_LITERAL_DIGITS = 4000


class ParseError(ValueError):
    """Malformed input, located by 1-based line and column."""

    kind = "syntax error"

    def __init__(self, message: str, line: int = 1, col: int = 1, source: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {self.kind}: {message}")


class UnknownIdentifierError(ParseError):
    kind = "unknown identifier"


class DivisionError(ParseError):
    kind = "invalid division"


class LimitError(ParseError):
    kind = "size limit"


class ModelSemanticError(ParseError):
    kind = "semantic error"


class ModelVerificationError(ValueError):
    """A model parsed cleanly but failed a structural check."""

    def __init__(self, message: str, report):
        super().__init__(message)
        self.report = report


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def _line_col(text: str, pos: int, line0: int = 1, col0: int = 1) -> tuple[int, int]:
    line = text.count("\n", 0, pos)
    if line == 0:
        return line0, col0 + pos
    return line0 + line, pos - text.rfind("\n", 0, pos)


def tokenize(text: str):
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            yield Token("bad", text[pos], pos)
            return
        kind = m.lastgroup
        if kind != "ws":
            yield Token(kind, m.group(), pos)
        pos = m.end()
    yield Token("eof", "", n)


@dataclass(frozen=True)
class ExpressionSource:
    text: str
    chart: CoordinateChart


class _ExprParser:
    def __init__(self, text: str, chart: CoordinateChart, line0=1, col0=1, source=None):
        self.text = text
        self.chart = chart
        self.dim = chart.dim
        self.index = {name: i for i, name in enumerate(chart.names)}
        self.tokens = tokenize(text)
        self.line0, self.col0, self.source = line0, col0, source
        self.tok = None
        self.advance()

    def error(self, cls, message, pos=None):
        line, col = _line_col(self.text, self.tok.pos if pos is None else pos, self.line0, self.col0)
        return cls(message, line, col, self.source)

    def advance(self):
        self.tok = next(self.tokens)
        if self.tok.kind == "bad":
            raise self.error(ParseError, f"unexpected character {self.tok.text!r}")

    def expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise self.error(ParseError, f"expected {text!r}, found {found}")
        self.advance()

    def parse(self) -> Polynomial:
        if self.tok.kind == "eof":
            raise self.error(ParseError, "empty expression")
        p = self.expr()
        if self.tok.kind != "eof":
            if self.tok.text == ")":
                raise self.error(ParseError, "unbalanced ')'")
            raise self.error(ParseError, f"unexpected {self.tok.text!r}"
                             + (" (implicit multiplication is not supported)"
                                if self.tok.kind in ("ident", "num") or self.tok.text == "(" else ""))
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.advance()
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op, pos = self.tok.text, self.tok.pos
            self.advance()
            start = self.tok.pos
            q = self.factor()
            if op == "*":
                if p.degree() + q.degree() > MAX_DEGREE:
                    raise self.error(LimitError, f"degree exceeds {MAX_DEGREE}", pos)
                p = self._product(p, q, pos)
            else:
                if not q.is_constant():
                    raise self.error(DivisionError, "division by non-literal (divisor contains a coordinate)", start)
                c = q.constant_value()
                if not c:
                    raise self.error(DivisionError, "division by zero", start)
                if _coeff_bits(p) + _coeff_bits(q) > MAX_COEFF_BITS:
                    raise self.error(LimitError, "coefficients too large", pos)
                p = p / c
        return p

    def factor(self) -> Polynomial:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            pos = self.tok.pos
            self.advance()
            if self.tok.kind != "num" or not self.tok.text.isdigit():
                raise self.error(ParseError, "exponent must be a non-negative integer literal")
            if len(self.tok.text) > 6:
                raise self.error(LimitError, f"exponent exceeds {MAX_EXPONENT}")
            e = int(self.tok.text)
            if e > MAX_EXPONENT:
                raise self.error(LimitError, f"exponent {e} exceeds {MAX_EXPONENT}")
            if base.degree() * e > MAX_DEGREE:
                raise self.error(LimitError, f"degree exceeds {MAX_DEGREE}", pos)
            if _power_size_bound(base, e) > MAX_TERMS:
                raise self.error(LimitError, "power has too many terms", pos)
            if _coeff_bits(base) * e > MAX_COEFF_BITS:
                raise self.error(LimitError, "coefficients too large", pos)
            self.advance()
            result = Polynomial.constant(self.dim, 1)
            for _ in range(e):
                result = self._product(result, base, pos)
            return result
        return base

    def _product(self, p, q, pos):
        if len(p) * len(q) > MAX_PRODUCT_WORK:
            raise self.error(LimitError, "product too large", pos)
        if _coeff_bits(p) + _coeff_bits(q) > MAX_COEFF_BITS:
            raise self.error(LimitError, "coefficients too large", pos)
        r = p * q
        if len(r) > MAX_TERMS:
            raise self.error(LimitError, "product has too many terms", pos)
        return r

    def atom(self) -> Polynomial:
        tok = self.tok
        if tok.kind == "num":
            if not tok.text.isdigit():
                raise self.error(ParseError, f"malformed rational {tok.text[:40]!r} (use integers or p/q)")
            if len(tok.text) > MAX_LITERAL_DIGITS:
                raise self.error(LimitError, f"integer literal longer than {MAX_LITERAL_DIGITS} digits")
            self.advance()
            return Polynomial.constant(self.dim, int(tok.text))
        if tok.kind == "ident":
            i = self.index.get(tok.text)
            if i is None:
                raise self.error(UnknownIdentifierError,
                                 f"{tok.text!r} is not a coordinate of chart ({', '.join(self.chart.names)})")
            self.advance()
            return Polynomial.variable(self.dim, i)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            if self.tok.kind == "eof":
                raise self.error(ParseError, "unbalanced '(': unexpected end of input")
            p = self.expr()
            if self.tok.kind == "eof":
                raise self.error(ParseError, "unbalanced '(': missing ')'")
            self.expect(")")
            return p
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return -self.factor()
        if tok.kind == "eof":
            raise self.error(ParseError, "unexpected end of input")
        raise self.error(ParseError, f"unexpected {tok.text!r}")


def _coeff_bits(p: Polynomial) -> int:
    bits = 0
    for c in p.terms.values():
        c = Fraction(c)
        bits = max(bits, c.numerator.bit_length() + c.denominator.bit_length())
    return bits


def _power_size_bound(base: Polynomial, e: int) -> int:
    """Upper bound on the number of terms of ``base ** e``."""
    if e == 0 or len(base) <= 1:
        return 1
    nvars = sum(1 for i in range(base.dim) if any(m[i] for m in base.terms))
    by_degree = math.comb(nvars + base.degree() * e, nvars)
    by_terms = math.comb(len(base) + e - 1, e)
    return min(by_degree, by_terms)


def parse_expression(src: ExpressionSource | str | bytes, chart: CoordinateChart | None = None,
                     *, line: int = 1, col: int = 1, source: str | None = None) -> Polynomial:
    """Parse a polynomial expression on ``chart``; raises ParseError on bad input."""
    if isinstance(src, ExpressionSource):
        text, chart = src.text, src.chart
    else:
        text = src
    if chart is None:
        raise TypeError("a chart is required")
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8 (byte {exc.start})", line,
                             col + exc.start, source) from None
    try:
        return _ExprParser(text, chart, line, col, source).parse()
    except RecursionError:
        raise LimitError("expression nested too deeply", line, col, source) from None


def parse_rational(text: str, line: int = 1, col: int = 1, source: str | None = None):
    s = text.strip()
    if not re.fullmatch(r"[-+]?\d+(/\d+)?", s):
        raise ParseError(f"malformed rational {s[:40]!r} (use integers or p/q)", line, col, source)
    if len(s) > 2 * MAX_LITERAL_DIGITS:
        raise LimitError(f"rational literal longer than {2 * MAX_LITERAL_DIGITS} characters", line, col, source)
    v = Fraction(s) if "/" not in s or int(s.split("/")[1]) else None
    if v is None:
        raise ParseError(f"zero denominator in {s!r}", line, col, source)
    return as_rational(v)


# -- model files ---------------------------------------------------------------

SECTIONS = ("bivector", "cocycle", "casimirs", "extended_casimirs")
KEYS = ("name", "coordinates", "hamiltonian", "entropy", "tau", "epsilon")
REQUIRED = ("coordinates", "hamiltonian", "entropy")


@dataclass
class _Entry:
    text: str
    line: int
    col: int


@dataclass
class ModelFile:
    coordinates: list[str]
    bivector: list[tuple[str, str, Polynomial]] = field(default_factory=list)
    cocycle: list[tuple[str, str, Polynomial]] | None = None
    casimirs: list[tuple[str, Polynomial]] = field(default_factory=list)
    extended_casimirs: list[tuple[str, Polynomial]] = field(default_factory=list)
    hamiltonian: Polynomial | None = None
    entropy: Polynomial | None = None
    tau: object = 1
    epsilon: object = 1
    name: str = ""
    chart: CoordinateChart | None = None


_IDENT = re.compile(r"[^\W\d]\w*\Z")


def parse_model_text(text: str, source: str | None = None) -> ModelFile:
    """Parse model-file text into a ModelFile (syntax and semantics, no verification)."""
    scalars: dict[str, _Entry] = {}
    sections: dict[str, list[_Entry]] = {}
    opened: tuple[str, int] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        col = body.index(stripped[0]) + 1
        if opened is not None:
            if stripped == "}":
                opened = None
                continue
            if "{" in stripped or "}" in stripped:
                raise ParseError("braces must appear alone on a section line", lineno, col, source)
            sections[opened[0]].append(_Entry(stripped, lineno, col))
            continue
        m = re.fullmatch(r"([^\W\d]\w*)\s*\{", stripped)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise ParseError(f"unknown section {name!r}", lineno, col, source)
            if name in sections:
                raise ModelSemanticError(f"section {name!r} appears twice", lineno, col, source)
            sections[name] = []
            opened = (name, lineno)
            continue
        if stripped == "}":
            raise ParseError("'}' without an open section", lineno, col, source)
        if "=" not in stripped:
            raise ParseError("expected 'key = value' or 'section {'", lineno, col, source)
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno, col, source)
        if key in scalars:
            raise ModelSemanticError(f"key {key!r} given twice", lineno, col, source)
        vcol = col + stripped.index("=") + 1 + (len(value) - len(value.lstrip()))
        scalars[key] = _Entry(value.strip(), lineno, vcol)
    if opened is not None:
        raise ParseError(f"section {opened[0]!r} is never closed", opened[1], 1, source)
    for key in REQUIRED:
        if key not in scalars:
            raise ModelSemanticError(f"missing required key {key!r}", 1, 1, source)
    if "bivector" not in sections:
        raise ModelSemanticError("missing required section 'bivector'", 1, 1, source)

    ce = scalars["coordinates"]
    names = [n.strip() for n in ce.text.split(",")]
    for n in names:
        if not _IDENT.match(n):
            raise ParseError(f"bad coordinate name {n!r}", ce.line, ce.col, source)
    if len(set(names)) != len(names):
        raise ModelSemanticError("duplicate coordinate name", ce.line, ce.col, source)
    chart = CoordinateChart.of(names)

    def expr(entry: _Entry, text=None, col=None):
        return parse_expression(entry.text if text is None else text, chart,
                                line=entry.line, col=entry.col if col is None else col,
                                source=source)

    def pairs(section: str):
        out, seen = [], set()
        for e in sections[section]:
            m = re.fullmatch(r"(\S+?)\s*,\s*(\S+?)\s*=(.*)", e.text, re.S)
            if not m:
                raise ParseError("expected 'i, j = expression'", e.line, e.col, source)
            i, j = m.group(1), m.group(2)
            for nm, off in ((i, m.start(1)), (j, m.start(2))):
                if nm not in chart.names:
                    raise ModelSemanticError(f"unknown coordinate {nm!r}", e.line, e.col + off, source)
            if i == j:
                raise ModelSemanticError(f"diagonal pair ({i}, {j})", e.line, e.col, source)
            key = frozenset((i, j))
            if key in seen:
                raise ModelSemanticError(f"pair ({i}, {j}) listed twice", e.line, e.col, source)
            seen.add(key)
            out.append((i, j, expr(e, m.group(3), e.col + m.start(3))))
        return out

    def named(section: str):
        out, seen = [], set()
        for e in sections.get(section, []):
            m = re.fullmatch(r"([^\W\d]\w*)\s*=(.*)", e.text, re.S)
            if not m:
                raise ParseError("expected 'name = expression'", e.line, e.col, source)
            if m.group(1) in seen:
                raise ModelSemanticError(f"{section} entry {m.group(1)!r} given twice", e.line, e.col, source)
            seen.add(m.group(1))
            out.append((m.group(1), expr(e, m.group(2), e.col + m.start(2))))
        return out

    mf = ModelFile(coordinates=names, chart=chart)
    mf.name = scalars["name"].text if "name" in scalars else (Path(source).stem if source else "model")
    mf.bivector = pairs("bivector")
    mf.cocycle = pairs("cocycle") if "cocycle" in sections else None
    mf.casimirs = named("casimirs")
    mf.extended_casimirs = named("extended_casimirs")
    mf.hamiltonian = expr(scalars["hamiltonian"])
    mf.entropy = expr(scalars["entropy"])
    for key in ("tau", "epsilon"):
        if key in scalars:
            e = scalars[key]
            setattr(mf, key, parse_rational(e.text, e.line, e.col, source))
    if mf.tau <= 0:
        e = scalars["tau"]
        raise ModelSemanticError("tau must be positive", e.line, e.col, source)
    return mf


def model_file_bivectors(mf: ModelFile) -> tuple[BivectorField, BivectorField]:
    chart = mf.chart
    base = BivectorField.from_entries(chart, mf.bivector)
    cocycle = BivectorField.from_entries(chart, mf.cocycle or [])
    return base, cocycle


def build_system(mf: ModelFile, hamiltonian: Polynomial | None = None,
                 entropy: Polynomial | None = None, tau=None):
    """Assemble the MetriplecticSystem and its full verification report.

    Raises ModelVerificationError when Jacobi, cocycle or entropy-Casimir
    checks fail; the report is attached.
    """
    from .brackets import (DeformedPoissonStructure, IsentropicWarning,
                           MetriplecticSystem, StructureError)
    from .verify import FAIL, VerificationReport, check_casimir, check_cocycle, \
        check_jacobi, check_metriplectic_axioms

    base, cocycle = model_file_bivectors(mf)
    report = VerificationReport(mf.name)
    report.extend(check_jacobi(base))
    if mf.cocycle is not None:
        report.extend(check_cocycle(base, cocycle))
    if not report.ok:
        raise ModelVerificationError(f"model {mf.name!r} is not a valid (deformed) Poisson structure",
                                     report)
    structure = DeformedPoissonStructure(base, cocycle, mf.epsilon)
    for name, C in mf.casimirs:
        report.extend(check_casimir(base, C, name))
    deformed = structure.deformed()
    for name, C in mf.extended_casimirs:
        report.extend(check_casimir(deformed, C, name), prefix="deformed ")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IsentropicWarning)
            system = MetriplecticSystem(
                structure=structure,
                hamiltonian=mf.hamiltonian if hamiltonian is None else hamiltonian,
                entropy=mf.entropy if entropy is None else entropy,
                tau=mf.tau if tau is None else tau,
                casimirs=tuple(mf.casimirs), name=mf.name)
    except StructureError as exc:
        report.add("entropy is a base Casimir", FAIL, exc.residual)
        raise ModelVerificationError(f"model {mf.name!r}: {exc}", report) from None
    report.extend(check_metriplectic_axioms(system))
    return system, report


def load_model(path, **overrides):
    """Read, parse, build and verify a model file; returns (system, report)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    mf = parse_model_text(text, source=str(path))
    return build_system(mf, **overrides)


def load_model_file(path) -> ModelFile:
    path = Path(path)
    return parse_model_text(path.read_text(encoding="utf-8"), source=str(path))


def render_model(name: str, chart: CoordinateChart, base: BivectorField,
                 cocycle: BivectorField | None, hamiltonian: Polynomial, entropy: Polynomial,
                 casimirs: Sequence[tuple[str, Polynomial]] = (),
                 extended_casimirs: Sequence[tuple[str, Polynomial]] = (), tau=1) -> str:
    """Serialize a system in model-file syntax (parse_model_text round-trips it)."""
    names = chart.names
    lines = [f"name = {name}", f"coordinates = {', '.join(names)}", "bivector {"]
    lines += [f"  {names[i]}, {names[j]} = {p.render(names)}" for (i, j), p in sorted(base.upper.items())]
    lines.append("}")
    if cocycle is not None:
        lines.append("cocycle {")
        lines += [f"  {names[i]}, {names[j]} = {p.render(names)}"
                  for (i, j), p in sorted(cocycle.upper.items())]
        lines.append("}")
    for section, items in (("casimirs", casimirs), ("extended_casimirs", extended_casimirs)):
        if items:
            lines.append(f"{section} {{")
            lines += [f"  {n} = {c.render(names)}" for n, c in items]
            lines.append("}")
    lines += [f"hamiltonian = {hamiltonian.render(names)}", f"entropy = {entropy.render(names)}",
              f"tau = {tau}"]
    return "\n".join(lines) + "\n"
