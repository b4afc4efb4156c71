"""Line-oriented parser and canonical printer for ``.cvc`` circuit files.

Grammar (one statement per line, ``#`` starts a comment, header ``cvc 1``)::

    mode <id> vacuum | squeezed vsq=<f> [vanti=<f>] [angle=<deg>] | coherent x=<f> p=<f>
    bs <id> <id> T=<f>        fourier <id>          phase <id> deg=<f>
    squeeze <id> r=<f>        qnd <id> <id> G=<f>   displace <id> x=<f> p=<f>
    homodyne <id> angle=<deg> -> <var>
    ff <var> -> displace <id> <x|p> gain=<f>

Printing is canonical: declarations first, every parameter spelled out, numbers
with 17 significant digits. Comments and blank lines are not preserved.
"""

from __future__ import annotations

import math
import re

from .ast import (
    BeamSplitter,
    CircuitParseError,
    CircuitProgram,
    Diagnostic,
    Displace,
    FeedForward,
    Fourier,
    Homodyne,
    ModeDecl,
    Phase,
    Qnd,
    SourceSpan,
    Squeeze,
)

VERSION = 1
# e^(2r) beyond this leaves nothing resolvable in double precision
MAX_SQUEEZE_R = 15.0
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")


class _Tok:
    __slots__ = ("text", "span")

    def __init__(self, text: str, line: int, col: int):
        self.text = text
        self.span = SourceSpan(line, col, col + len(text) - 1)


class _LineError(Exception):
    def __init__(self, code: str, message: str, span: SourceSpan):
        self.diagnostic = Diagnostic(code, message, span)


def _tokens(line: str, lineno: int) -> list[_Tok]:
    line = line.split("#", 1)[0]
    return [_Tok(m.group(), lineno, m.start() + 1) for m in re.finditer(r"\S+", line)]


def _line_span(toks: list[_Tok]) -> SourceSpan:
    return SourceSpan(toks[0].span.line, toks[0].span.start, toks[-1].span.end)


def _number(tok: _Tok, text: str | None = None) -> float:
    text = tok.text if text is None else text
    if not _NUMBER.match(text):
        raise _LineError("E_TYPE", f"expected a number, got {text!r}", tok.span)
    value = float(text)
    if not math.isfinite(value):
        raise _LineError("E_TYPE", f"number out of range: {text!r}", tok.span)
    return value


def _ident(tok: _Tok) -> str:
    if not _IDENT.match(tok.text):
        raise _LineError("E_BAD_IDENT", f"invalid identifier {tok.text!r}", tok.span)
    return tok.text


def _params(toks: list[_Tok], required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    values: dict = {}
    spans: dict = {}
    for tok in toks:
        key, eq, raw = tok.text.partition("=")
        if not eq:
            raise _LineError("E_ARITY", f"unexpected argument {tok.text!r}", tok.span)
        if key not in required and key not in optional:
            raise _LineError("E_PARAM", f"unknown parameter {key!r}", tok.span)
        if key in values:
            raise _LineError("E_PARAM", f"duplicate parameter {key!r}", tok.span)
        values[key] = _number(tok, raw)
        spans[key] = tok.span
    missing = [k for k in required if k not in values]
    if missing:
        span = toks[-1].span if toks else None
        raise _LineError("E_PARAM", f"missing parameter(s): {', '.join(missing)}", span)
    values["_spans"] = spans
    return values


def _expect_count(toks: list[_Tok], lo: int, hi: int | None = None) -> None:
    hi = lo if hi is None else hi
    if not lo <= len(toks) <= hi:
        raise _LineError(
            "E_ARITY",
            f"{toks[0].text!r} takes {lo if lo == hi else f'{lo}-{hi}'} tokens, got {len(toks)}",
            _line_span(toks),
        )


def _parse_mode(toks: list[_Tok]) -> ModeDecl:
    if len(toks) < 3:
        raise _LineError("E_ARITY", "mode needs an identifier and a source", _line_span(toks))
    name = _ident(toks[1])
    kind = toks[2].text
    span = _line_span(toks)
    rest = toks[3:]
    if kind == "vacuum":
        if rest:
            raise _LineError("E_ARITY", "vacuum takes no parameters", rest[0].span)
        return ModeDecl(name, "vacuum", span=span)
    if kind == "squeezed":
        p = _params(rest, ("vsq",), ("vanti", "angle"))
        vsq = p["vsq"]
        vanti = p.get("vanti", 1.0 / vsq if vsq > 0 else 0.0)
        if vsq <= 0 or vanti <= 0 or vsq * vanti < 1.0 - 1e-9:
            raise _LineError("E_UNPHYSICAL", f"squeezed source needs vsq*vanti >= 1 (got {vsq}, {vanti})", span)
        return ModeDecl(name, "squeezed", vsq=vsq, vanti=vanti, angle=p.get("angle", 0.0), span=span)
    if kind == "coherent":
        p = _params(rest, ("x", "p"))
        return ModeDecl(name, "coherent", x=p["x"], p=p["p"], span=span)
    raise _LineError("E_UNKNOWN_SOURCE", f"unknown source {kind!r}", toks[2].span)


def _parse_statement(toks: list[_Tok]):
    kw = toks[0].text
    span = _line_span(toks)
    if kw == "bs":
        _expect_count(toks, 4)
        p = _params(toks[3:], ("T",))
        if not 0.0 < p["T"] < 1.0:
            raise _LineError("BS_T_RANGE", f"transmittance must lie in (0, 1), got {p['T']}", p["_spans"]["T"])
        return BeamSplitter(_ident(toks[1]), _ident(toks[2]), p["T"], span=span)
    if kw == "fourier":
        _expect_count(toks, 2)
        return Fourier(_ident(toks[1]), span=span)
    if kw == "phase":
        _expect_count(toks, 3)
        return Phase(_ident(toks[1]), _params(toks[2:], ("deg",))["deg"], span=span)
    if kw == "squeeze":
        _expect_count(toks, 3)
        p = _params(toks[2:], ("r",))
        if abs(p["r"]) > MAX_SQUEEZE_R:
            raise _LineError("E_PARAM", f"|r| must not exceed {MAX_SQUEEZE_R:g}", p["_spans"]["r"])
        return Squeeze(_ident(toks[1]), p["r"], span=span)
    if kw == "qnd":
        _expect_count(toks, 4)
        return Qnd(_ident(toks[1]), _ident(toks[2]), _params(toks[3:], ("G",))["G"], span=span)
    if kw == "displace":
        _expect_count(toks, 4)
        p = _params(toks[2:], ("x", "p"))
        return Displace(_ident(toks[1]), p["x"], p["p"], span=span)
    if kw == "homodyne":
        _expect_count(toks, 5)
        if toks[3].text != "->":
            raise _LineError("E_SYNTAX", "expected '->' before the outcome variable", toks[3].span)
        angle = _params(toks[2:3], ("angle",))["angle"]
        return Homodyne(_ident(toks[1]), angle, _ident(toks[4]), span=span)
    if kw == "ff":
        _expect_count(toks, 7)
        if toks[2].text != "->":
            raise _LineError("E_SYNTAX", "expected '->' after the outcome variable", toks[2].span)
        if toks[3].text != "displace":
            raise _LineError("E_SYNTAX", "feedforward target must be 'displace'", toks[3].span)
        if toks[5].text not in ("x", "p"):
            raise _LineError("E_SYNTAX", "feedforward quadrature must be x or p", toks[5].span)
        gain = _params(toks[6:], ("gain",))["gain"]
        return FeedForward(_ident(toks[1]), _ident(toks[4]), toks[5].text, gain, span=span)
    raise _LineError("E_UNKNOWN_KEYWORD", f"unknown keyword {kw!r}", toks[0].span)


def _mode_refs(stmt, toks: list[_Tok]) -> list[tuple[str, SourceSpan]]:
    """Mode identifiers used by a statement, with the span of each token."""
    if isinstance(stmt, (BeamSplitter, Qnd)):
        return [(stmt.a, toks[1].span), (stmt.b, toks[2].span)]
    if isinstance(stmt, FeedForward):
        return [(stmt.mode, toks[4].span)]
    return [(stmt.mode, toks[1].span)]


def parse(text: str) -> CircuitProgram:
    """Parse circuit text; raises :class:`CircuitParseError` with every diagnostic."""
    diags: list[Diagnostic] = []
    modes: list[ModeDecl] = []
    stmts = []
    declared: set[str] = set()
    measured: set[str] = set()
    bound: set[str] = set()
    seen_header = False

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line, lineno)
        if not toks:
            continue
        if not seen_header:
            seen_header = True
            if toks[0].text == "cvc":
                if len(toks) != 2 or toks[1].text != str(VERSION):
                    diags.append(Diagnostic("E_VERSION", f"unsupported header; expected 'cvc {VERSION}'", _line_span(toks)))
                continue
            diags.append(Diagnostic("E_HEADER", f"missing 'cvc {VERSION}' header", toks[0].span))
        try:
            if toks[0].text == "cvc":
                raise _LineError("E_HEADER", "duplicate header", _line_span(toks))
            if toks[0].text == "mode":
                decl = _parse_mode(toks)
                if decl.name in declared:
                    raise _LineError("E_DUPLICATE_MODE", f"mode {decl.name!r} already declared", toks[1].span)
                declared.add(decl.name)
                modes.append(decl)
                continue
            stmt = _parse_statement(toks)
            refs = _mode_refs(stmt, toks)
            for name, sp in refs:
                if name not in declared:
                    raise _LineError("E_UNDECLARED_MODE", f"mode {name!r} is not declared", sp)
                if name in measured:
                    raise _LineError("E_USE_AFTER_MEASURE", f"mode {name!r} was already measured", sp)
            if len(refs) == 2 and refs[0][0] == refs[1][0]:
                raise _LineError("E_SAME_MODE", "two-mode element needs distinct modes", refs[1][1])
            if isinstance(stmt, FeedForward) and stmt.var not in bound:
                raise _LineError("E_UNBOUND_VAR", f"outcome variable {stmt.var!r} is not bound", toks[1].span)
            if isinstance(stmt, Homodyne):
                if stmt.var in bound:
                    raise _LineError("E_DUPLICATE_VAR", f"outcome variable {stmt.var!r} already bound", toks[4].span)
                bound.add(stmt.var)
                measured.add(stmt.mode)
            stmts.append(stmt)
        except _LineError as err:
            diags.append(err.diagnostic if err.diagnostic.span else Diagnostic(err.diagnostic.code, err.diagnostic.message, _line_span(toks)))

    if diags:
        raise CircuitParseError(diags)
    return CircuitProgram(tuple(modes), tuple(stmts), VERSION)


def _num(v: float) -> str:
    return format(v, ".17g")


def _format_stmt(s) -> str:
    if isinstance(s, ModeDecl):
        if s.kind == "vacuum":
            return f"mode {s.name} vacuum"
        if s.kind == "squeezed":
            return f"mode {s.name} squeezed vsq={_num(s.vsq)} vanti={_num(s.vanti)} angle={_num(s.angle)}"
        return f"mode {s.name} coherent x={_num(s.x)} p={_num(s.p)}"
    if isinstance(s, BeamSplitter):
        return f"bs {s.a} {s.b} T={_num(s.T)}"
    if isinstance(s, Fourier):
        return f"fourier {s.mode}"
    if isinstance(s, Phase):
        return f"phase {s.mode} deg={_num(s.deg)}"
    if isinstance(s, Squeeze):
        return f"squeeze {s.mode} r={_num(s.r)}"
    if isinstance(s, Qnd):
        return f"qnd {s.a} {s.b} G={_num(s.G)}"
    if isinstance(s, Displace):
        return f"displace {s.mode} x={_num(s.x)} p={_num(s.p)}"
    if isinstance(s, Homodyne):
        return f"homodyne {s.mode} angle={_num(s.angle)} -> {s.var}"
    if isinstance(s, FeedForward):
        return f"ff {s.var} -> displace {s.mode} {s.quadrature} gain={_num(s.gain)}"
    raise TypeError(f"cannot format {type(s).__name__}")


def format_program(program: CircuitProgram) -> str:
    lines = [f"cvc {program.version}"]
    lines += [_format_stmt(m) for m in program.modes]
    lines += [_format_stmt(s) for s in program.statements]
    return "\n".join(lines) + "\n"
