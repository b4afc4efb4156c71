"""The ``.cvc`` circuit language: parse, print and compile."""

from .ast import CircuitCompileError, CircuitParseError, CircuitProgram, Diagnostic, SourceSpan
from .compiler import Plan, compile_program
from .parser import format_program, parse


def load(path) -> CircuitProgram:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


__all__ = [
    "CircuitCompileError",
    "CircuitParseError",
    "CircuitProgram",
    "Diagnostic",
    "Plan",
    "SourceSpan",
    "compile_program",
    "format_program",
    "load",
    "parse",
]
