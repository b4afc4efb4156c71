"""Compile a :class:`CircuitProgram` into an executable plan.

A plan has two faces:

* ``process``: one :class:`LinearProcess` from the declared source modes to the
  surviving modes. Homodyne outcomes enter only linearly through feedforward, so
  measurement-and-feedforward collapses to an affine map at the ensemble level.
* ``steps``: the statement sequence resolved to live-mode positions, executed
  outcome by outcome by the Monte-Carlo oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .. import elements
from ..gaussian import (
    GaussianState,
    LinearProcess,
    SymplecticOp,
    coherent,
    linear_process,
    squeezed_vacuum,
    tensor,
    vacuum,
)
from ..protocols import qnd_ideal
from .ast import (
    BeamSplitter,
    CircuitCompileError,
    CircuitProgram,
    Displace,
    FeedForward,
    Fourier,
    Homodyne,
    ModeDecl,
    Phase,
    Qnd,
    Squeeze,
)


@dataclass(frozen=True)
class GateStep:
    op: SymplecticOp
    positions: tuple[int, ...]


@dataclass(frozen=True)
class MeasureStep:
    position: int
    angle: float  # radians
    var: str


@dataclass(frozen=True)
class FeedForwardStep:
    var: str
    position: int
    quadrature: int  # 0 = x, 1 = p
    gain: float


Step = Union[GateStep, MeasureStep, FeedForwardStep]


@dataclass(frozen=True)
class Plan:
    modes: tuple[str, ...]
    outputs: tuple[str, ...]
    initial: GaussianState
    process: LinearProcess
    steps: tuple[Step, ...]
    outcome_vars: tuple[str, ...]

    @property
    def has_measurements(self) -> bool:
        return bool(self.outcome_vars)

    @property
    def symplectic(self) -> SymplecticOp | None:
        """The whole plan as one Gaussian unitary when nothing is measured."""
        if self.has_measurements:
            return None
        return SymplecticOp(self.process.M, self.process.d)

    def run(self, state: GaussianState | None = None) -> GaussianState:
        return linear_process(self.process, self.initial if state is None else state)


def source_state(decl: ModeDecl) -> GaussianState:
    if decl.kind == "vacuum":
        return vacuum(1)
    if decl.kind == "squeezed":
        return squeezed_vacuum(decl.vsq, decl.vanti, np.deg2rad(decl.angle))
    return coherent(decl.x, decl.p)


def _gate(stmt) -> tuple[SymplecticOp, tuple[str, ...]]:
    if isinstance(stmt, BeamSplitter):
        return elements.beamsplitter(stmt.T), (stmt.a, stmt.b)
    if isinstance(stmt, Fourier):
        return elements.fourier(), (stmt.mode,)
    if isinstance(stmt, Phase):
        return elements.phase(np.deg2rad(stmt.deg)), (stmt.mode,)
    if isinstance(stmt, Squeeze):
        return elements.squeezer(stmt.r), (stmt.mode,)
    if isinstance(stmt, Qnd):
        return qnd_ideal(stmt.G), (stmt.a, stmt.b)
    if isinstance(stmt, Displace):
        return elements.displace(stmt.x, stmt.p), (stmt.mode,)
    raise CircuitCompileError("E_NONLINEAR", f"unsupported statement {type(stmt).__name__}")


def compile_program(program: CircuitProgram) -> Plan:
    if not program.modes:
        raise CircuitCompileError("E_EMPTY", "program declares no modes")
    names = program.mode_names
    n = len(names)
    # rows[name]: 2 x 2n coefficients of the live quadratures in the source quadratures
    rows = {name: np.eye(2 * n)[2 * i : 2 * i + 2] for i, name in enumerate(names)}
    offsets = {name: np.zeros(2) for name in names}
    outcomes: dict[str, tuple[np.ndarray, float]] = {}
    live = list(names)
    steps: list[Step] = []

    for stmt in program.statements:
        if isinstance(stmt, Homodyne):
            theta = np.deg2rad(stmt.angle)
            c = np.array([np.cos(theta), np.sin(theta)])
            outcomes[stmt.var] = (c @ rows[stmt.mode], float(c @ offsets[stmt.mode]))
            steps.append(MeasureStep(live.index(stmt.mode), theta, stmt.var))
            live.remove(stmt.mode)
            del rows[stmt.mode], offsets[stmt.mode]
        elif isinstance(stmt, FeedForward):
            if stmt.var not in outcomes:
                raise CircuitCompileError("E_UNBOUND_VAR", f"outcome {stmt.var!r} is not bound")
            q = 0 if stmt.quadrature == "x" else 1
            row, off = outcomes[stmt.var]
            rows[stmt.mode] = rows[stmt.mode].copy()
            rows[stmt.mode][q] += stmt.gain * row
            offsets[stmt.mode] = offsets[stmt.mode] + np.eye(2)[q] * stmt.gain * off
            steps.append(FeedForwardStep(stmt.var, live.index(stmt.mode), q, stmt.gain))
        else:
            op, targets = _gate(stmt)
            stacked = np.vstack([rows[t] for t in targets])
            off = np.concatenate([offsets[t] for t in targets])
            stacked = op.S @ stacked
            off = op.S @ off + op.d
            for i, t in enumerate(targets):
                rows[t] = stacked[2 * i : 2 * i + 2]
                offsets[t] = off[2 * i : 2 * i + 2]
            steps.append(GateStep(op, tuple(live.index(t) for t in targets)))

    outputs = [m for m in names if m in rows]
    if not outputs:
        raise CircuitCompileError("E_NO_OUTPUT", "every mode is measured")
    M = np.vstack([rows[m] for m in outputs])
    d = np.concatenate([offsets[m] for m in outputs])
    initial = tensor(*(source_state(m) for m in program.modes))
    return Plan(
        modes=tuple(names),
        outputs=tuple(outputs),
        initial=initial,
        process=LinearProcess(M, d),
        steps=tuple(steps),
        outcome_vars=tuple(outcomes),
    )
