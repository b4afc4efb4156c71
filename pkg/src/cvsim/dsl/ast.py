"""Syntax tree for ``.cvc`` circuit files."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class SourceSpan:
    """1-based line and inclusive column range."""

    line: int
    start: int
    end: int

    def __post_init__(self):
        if self.line < 1 or self.start < 1 or self.end < self.start:
            raise ValueError(f"invalid span {self.line}:{self.start}-{self.end}")

    def __str__(self) -> str:
        return f"{self.line}:{self.start}-{self.end}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.code}: {self.message}"


class CircuitParseError(Exception):
    """All diagnostics found in a circuit file."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class CircuitCompileError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModeDecl:
    name: str
    kind: str  # vacuum | squeezed | coherent
    vsq: float = 1.0
    vanti: float = 1.0
    angle: float = 0.0  # degrees
    x: float = 0.0
    p: float = 0.0
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class BeamSplitter:
    a: str
    b: str
    T: float
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Fourier:
    mode: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Phase:
    mode: str
    deg: float
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Squeeze:
    mode: str
    r: float
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Qnd:
    a: str
    b: str
    G: float
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Homodyne:
    mode: str
    angle: float  # degrees
    var: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class FeedForward:
    var: str
    mode: str
    quadrature: str  # "x" | "p"
    gain: float
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Displace:
    mode: str
    x: float
    p: float
    span: SourceSpan | None = _span()


Statement = Union[BeamSplitter, Fourier, Phase, Squeeze, Qnd, Homodyne, FeedForward, Displace]


@dataclass(frozen=True)
class CircuitProgram:
    modes: tuple[ModeDecl, ...] = ()
    statements: tuple[Statement, ...] = ()
    version: int = 1

    @property
    def mode_names(self) -> list[str]:
        return [m.name for m in self.modes]

    @property
    def measured(self) -> set[str]:
        return {s.mode for s in self.statements if isinstance(s, Homodyne)}

    @property
    def outputs(self) -> list[str]:
        gone = self.measured
        return [m for m in self.mode_names if m not in gone]
