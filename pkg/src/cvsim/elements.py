"""Optical building blocks as symplectic maps and ensemble processes.

Beam splitter convention (fixed; cluster networks depend on it)::

    x1' =  sqrt(T) x1 + sqrt(1-T) x2
    x2' = -sqrt(1-T) x1 + sqrt(T) x2        (same on p)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import (
    GaussianState,
    LinearProcess,
    SymplecticOp,
    UnphysicalStateError,
    apply,
    squeezed_vacuum,
    tensor,
)


def _check_transmittance(T: float) -> None:
    if not 0.0 < T < 1.0:
        raise ValueError(f"transmittance must lie in (0, 1), got {T}")


def beamsplitter(T: float) -> SymplecticOp:
    _check_transmittance(T)
    t, r = np.sqrt(T), np.sqrt(1.0 - T)
    return SymplecticOp(np.kron(np.array([[t, r], [-r, t]]), np.eye(2)))


def phase(theta: float) -> SymplecticOp:
    """Phase-space rotation by ``theta`` (counter-clockwise)."""
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticOp(np.array([[c, -s], [s, c]]))


def fourier() -> SymplecticOp:
    """Rotation by -90 degrees: ``(x, p) -> (p, -x)``."""
    return SymplecticOp(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def squeezer(r: float) -> SymplecticOp:
    return SymplecticOp(np.diag([np.exp(-r), np.exp(r)]))


def displace(dx: float, dp: float) -> SymplecticOp:
    return SymplecticOp(np.eye(2), np.array([dx, dp]))


@dataclass(frozen=True)
class EprParams:
    """Variances of the squeezed inputs that make up an EPR pair.

    ``Var(xA - xB) = 2 v_sq_x`` and ``Var(pA + pB) = 2 v_sq_p``. The anti-squeezed
    variances default to the pure-state values.
    """

    v_sq_x: float
    v_sq_p: float | None = None
    v_anti_x: float | None = None
    v_anti_p: float | None = None

    def __post_init__(self):
        if self.v_sq_p is None:
            object.__setattr__(self, "v_sq_p", self.v_sq_x)
        if self.v_sq_x <= 0 or self.v_sq_p <= 0:
            raise UnphysicalStateError("EPR squeezing variances must be positive")

    @classmethod
    def from_r(cls, r: float) -> "EprParams":
        return cls(np.exp(-2 * r))


def epr_source(p: EprParams) -> GaussianState:
    """Two squeezed vacua (x-squeezed, p-squeezed) combined on a half beam splitter."""
    a = squeezed_vacuum(p.v_sq_x, p.v_anti_x, 0.0)
    b = squeezed_vacuum(p.v_sq_p, p.v_anti_p, np.pi / 2)
    return apply(beamsplitter(0.5), tensor(a, b))


def offline_squeezer_matrix(T: float, gain: float) -> np.ndarray:
    """Ensemble map (input, ancilla) -> output for a given feedforward gain.

    The input and ancilla meet on a beam splitter of transmittance ``T``; ``p`` of
    the tapped port is measured and added to ``p`` of the output with ``gain``.
    """
    _check_transmittance(T)
    B = beamsplitter(T).S
    x_out = B[0]
    p_out = B[1] + gain * B[3]
    return np.vstack([x_out, p_out])


def offline_squeezer(T: float, ancilla: GaussianState) -> LinearProcess:
    """x-squeezing gate by ``sqrt(T)`` using an (ideally x-squeezed) ancilla.

    ``x_out = sqrt(T) x_in + sqrt(1-T) x_anc`` and ``p_out = p_in / sqrt(T)``. The
    feedforward gain ``-sqrt(1-T)/sqrt(T)`` removes the ancilla's anti-squeezed
    ``p`` from the output.
    """
    if ancilla.n_modes != 1:
        raise ValueError("offline squeezer takes a single-mode ancilla")
    gain = -np.sqrt(1.0 - T) / np.sqrt(T)
    return LinearProcess(offline_squeezer_matrix(T, gain), ancilla=ancilla)
