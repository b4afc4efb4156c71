"""Gaussian states of n optical modes and the exact primitives acting on them.

All quantities are expressed in units where the vacuum quadrature variance is 1.
Quadratures are interleaved as ``(x1, p1, x2, p2, ...)`` and the symplectic form
is the block-diagonal matrix of ``[[0, 1], [-1, 0]]`` blocks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ATOL = 1e-9

__all__ = [
    "ATOL",
    "GaussianState",
    "LinearProcess",
    "NonCanonicalError",
    "QuadratureForm",
    "SymplecticOp",
    "UnitsConvention",
    "UnphysicalStateError",
    "apply",
    "coherent",
    "db",
    "embed",
    "fidelity",
    "form_stats",
    "homodyne_condition",
    "homodyne_project",
    "is_physical",
    "linear_process",
    "omega",
    "squeezed_vacuum",
    "tensor",
    "vacuum",
    "wigner",
]


class UnphysicalStateError(ValueError):
    """Raised when a covariance matrix violates the uncertainty relation."""


class NonCanonicalError(ValueError):
    """Raised when a linear map does not preserve the canonical commutators."""


def omega(n: int) -> np.ndarray:
    """Symplectic form for ``n`` modes in interleaved ordering."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _symmetrize(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v + v.T)


def _scaled_tol(m: np.ndarray) -> float:
    # eigenvalue round-off grows with the matrix norm (anti-squeezed quadratures)
    return ATOL * max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)


def is_physical(cov: np.ndarray) -> bool:
    """Check ``cov + i*Omega >= 0`` (uncertainty relation, vacuum saturates it)."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    eig = np.linalg.eigvalsh(cov + 1j * omega(n))
    return bool(eig.min() >= -_scaled_tol(cov))


def db(value: float, reference: float = 1.0) -> float:
    """Variance in decibels relative to ``reference``."""
    return 10.0 * np.log10(value / reference)


@dataclass(frozen=True)
class UnitsConvention:
    """Reporting convention; computation always uses vacuum variance 1.

    ``reporting_vacuum_variance`` is 1 (vacuum-normalised), 1/2 (hbar = 1)
    or 1/4 (hbar = 1/2).
    """

    reporting_vacuum_variance: float = 1.0

    def __post_init__(self):
        if self.reporting_vacuum_variance not in (1.0, 0.5, 0.25):
            raise ValueError("reporting_vacuum_variance must be one of 1, 1/2, 1/4")

    def variance(self, v):
        return np.asarray(v) * self.reporting_vacuum_variance

    def amplitude(self, m):
        return np.asarray(m) * np.sqrt(self.reporting_vacuum_variance)


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of an n-mode Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise ValueError(f"covariance must be square with even size, got {cov.shape}")
        if mean.shape[0] != cov.shape[0]:
            raise ValueError("mean and covariance sizes differ")
        if cov.shape[0] == 0:
            raise ValueError("a state needs at least one mode")
        if np.max(np.abs(cov - cov.T)) > _scaled_tol(cov):
            raise ValueError("covariance matrix is not symmetric")
        cov = _symmetrize(cov)
        if not is_physical(cov):
            raise UnphysicalStateError("covariance violates the uncertainty relation")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen(cov))

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    @property
    def purity(self) -> float:
        return float(1.0 / np.sqrt(np.linalg.det(self.cov)))

    def energy(self) -> float:
        """Trace of the covariance plus squared mean norm (passive-op invariant)."""
        return float(np.trace(self.cov) + self.mean @ self.mean)

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        idx = _quad_indices(modes)
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)])

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )


@dataclass(frozen=True)
class SymplecticOp:
    """Gaussian unitary ``xi -> S xi + d``."""

    S: np.ndarray
    d: np.ndarray | None = None

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ValueError(f"S must be square with even size, got {S.shape}")
        d = np.zeros(S.shape[0]) if self.d is None else np.array(self.d, dtype=float)
        if d.shape != (S.shape[0],):
            raise ValueError("displacement length does not match S")
        n = S.shape[0] // 2
        if np.max(np.abs(S @ omega(n) @ S.T - omega(n))) > ATOL * max(1.0, np.max(np.abs(S)) ** 2):
            raise NonCanonicalError("S is not symplectic")
        object.__setattr__(self, "S", _frozen(S))
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    def __matmul__(self, other: "SymplecticOp") -> "SymplecticOp":
        """Composition: ``(a @ b)`` applies ``b`` first."""
        return SymplecticOp(self.S @ other.S, self.S @ other.d + self.d)


@dataclass(frozen=True)
class QuadratureForm:
    """Linear combination ``coeffs . xi + offset`` of quadratures."""

    coeffs: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size % 2 or not np.any(c != 0):
            raise ValueError("a quadrature form needs an even-length, nonzero coefficient vector")
        object.__setattr__(self, "coeffs", _frozen(c))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n_modes(self) -> int:
        return self.coeffs.size // 2

    @classmethod
    def from_terms(cls, n_modes: int, offset: float = 0.0, **terms: float) -> "QuadratureForm":
        """Build from 1-based labels, e.g. ``from_terms(4, p1=1, x2=-1)``."""
        c = np.zeros(2 * n_modes)
        for label, value in terms.items():
            m = re.fullmatch(r"([xp])(\d+)", label)
            if not m or not 1 <= int(m.group(2)) <= n_modes:
                raise ValueError(f"bad quadrature label {label!r}")
            c[2 * (int(m.group(2)) - 1) + (m.group(1) == "p")] += value
        return cls(c, offset)

    def label(self) -> str:
        parts = []
        for i, v in enumerate(self.coeffs):
            if v == 0:
                continue
            name = f"{'xp'[i % 2]}{i // 2 + 1}"
            mag = abs(v)
            term = name if np.isclose(mag, 1.0) else f"{mag:g}{name}"
            sign = "-" if v < 0 else "+"
            parts.append(f"{sign} {term}" if parts else ("-" + term if v < 0 else term))
        return " ".join(parts)


@dataclass(frozen=True)
class LinearProcess:
    """Ensemble-level affine map ``xi_out = M (xi_in (+) ancilla) + d``.

    ``ancilla`` (optional) is appended to the input before ``M`` acts; it models
    resources consumed by measurement-and-feedforward circuits.
    """

    M: np.ndarray
    d: np.ndarray | None = None
    ancilla: GaussianState | None = None

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] % 2 or M.shape[1] % 2:
            raise ValueError(f"M must have even dimensions, got {M.shape}")
        d = np.zeros(M.shape[0]) if self.d is None else np.array(self.d, dtype=float)
        if d.shape != (M.shape[0],):
            raise ValueError("displacement length does not match M")
        m, n = M.shape[0] // 2, M.shape[1] // 2
        if self.ancilla is not None and self.ancilla.n_modes >= n:
            raise ValueError("ancilla leaves no input modes")
        err = np.max(np.abs(M @ omega(n) @ M.T - omega(m))) if m else 0.0
        if err > ATOL:
            raise NonCanonicalError(f"output commutators are not canonical (error {err:.3g})")
        object.__setattr__(self, "M", _frozen(M))
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n_in(self) -> int:
        k = 0 if self.ancilla is None else self.ancilla.n_modes
        return self.M.shape[1] // 2 - k

    @property
    def n_out(self) -> int:
        return self.M.shape[0] // 2


def _quad_indices(modes: Sequence[int]) -> list[int]:
    return [q for m in modes for q in (2 * m, 2 * m + 1)]


def embed(S: np.ndarray, modes: Sequence[int], n: int) -> np.ndarray:
    """Lift a ``2k x 2k`` matrix acting on ``modes`` to the full ``2n`` space."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise IndexError("mode indices must be distinct")
    if any(not 0 <= m < n for m in modes):
        raise IndexError(f"mode index out of range for {n} modes")
    if S.shape != (2 * len(modes), 2 * len(modes)):
        raise ValueError("operator dimension does not match the number of modes")
    full = np.eye(2 * n)
    idx = _quad_indices(modes)
    full[np.ix_(idx, idx)] = S
    return full


# --- constructors ---------------------------------------------------------


def vacuum(n: int = 1) -> GaussianState:
    if n < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.zeros(2 * n), np.eye(2 * n))


def squeezed_vacuum(v_sq: float, v_anti: float | None = None, angle: float = 0.0) -> GaussianState:
    """Single-mode squeezed vacuum with variance ``v_sq`` along ``angle``.

    ``angle = 0`` squeezes x; ``v_anti`` defaults to ``1 / v_sq`` (pure state).
    """
    if not v_sq > 0:
        raise UnphysicalStateError("variances must be positive")
    if v_anti is None:
        v_anti = 1.0 / v_sq
    if v_anti <= 0:
        raise UnphysicalStateError("variances must be positive")
    if v_sq * v_anti < 1.0 - ATOL:
        raise UnphysicalStateError(f"v_sq * v_anti = {v_sq * v_anti:.6g} < 1")
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    return GaussianState(np.zeros(2), R @ np.diag([v_sq, v_anti]) @ R.T)


def coherent(x_mean: float, p_mean: float) -> GaussianState:
    return GaussianState(np.array([x_mean, p_mean]), np.eye(2))


def tensor(a: GaussianState, *others: GaussianState) -> GaussianState:
    mean, cov = a.mean, a.cov
    for b in others:
        mean = np.concatenate([mean, b.mean])
        k, l = cov.shape[0], b.cov.shape[0]
        cov = np.block([[cov, np.zeros((k, l))], [np.zeros((l, k)), b.cov]])
    return GaussianState(mean, cov)


# --- evolution ------------------------------------------------------------


def apply(op: SymplecticOp, state: GaussianState, modes: Sequence[int] | None = None) -> GaussianState:
    """Apply ``op`` to the selected ``modes`` (default: all, in order)."""
    n = state.n_modes
    if modes is None:
        modes = range(op.n_modes)
    modes = list(modes)
    S = embed(op.S, modes, n)
    d = np.zeros(2 * n)
    d[_quad_indices(modes)] = op.d
    return GaussianState(S @ state.mean + d, _symmetrize(S @ state.cov @ S.T))


def linear_process(P: LinearProcess, state: GaussianState) -> GaussianState:
    if state.n_modes != P.n_in:
        raise ValueError(f"process expects {P.n_in} input modes, state has {state.n_modes}")
    full = state if P.ancilla is None else tensor(state, P.ancilla)
    return GaussianState(P.M @ full.mean + P.d, _symmetrize(P.M @ full.cov @ P.M.T))


@dataclass(frozen=True)
class HomodyneSplit:
    """Gaussian conditioning data for measuring ``c . xi`` on one mode.

    The conditional mean for outcome ``q`` is ``rest_mean + gain * (q - mean)``;
    the conditional covariance does not depend on ``q``.
    """

    keep: list[int] = field(repr=False)
    mean: float
    variance: float
    rest_mean: np.ndarray
    gain: np.ndarray
    cond_cov: np.ndarray


def homodyne_condition(state: GaussianState, mode: int, angle: float) -> HomodyneSplit:
    n = state.n_modes
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n} modes")
    c = np.zeros(2 * n)
    c[2 * mode], c[2 * mode + 1] = np.cos(angle), np.sin(angle)
    var = float(c @ state.cov @ c)
    if var <= 1e-12:
        raise ValueError("measured quadrature has (near) zero variance")
    keep = [q for q in range(2 * n) if q // 2 != mode]
    cross = state.cov[keep] @ c
    gain = cross / var
    cond = state.cov[np.ix_(keep, keep)] - np.outer(cross, cross) / var
    return HomodyneSplit(keep, float(c @ state.mean), var, state.mean[keep], gain, _symmetrize(cond))


def homodyne_project(state: GaussianState, mode: int, angle: float, outcome: float) -> GaussianState:
    """Condition on an ideal homodyne outcome and drop the measured mode."""
    if state.n_modes < 2:
        raise ValueError("measuring the only mode leaves no state")
    h = homodyne_condition(state, mode, angle)
    return GaussianState(h.rest_mean + h.gain * (outcome - h.mean), h.cond_cov)


# --- statistics -----------------------------------------------------------


def form_stats(state: GaussianState, f: QuadratureForm) -> tuple[float, float]:
    if f.coeffs.size != state.mean.size:
        raise ValueError("form and state sizes differ")
    c = f.coeffs
    return float(c @ state.mean + f.offset), float(c @ state.cov @ c)


def wigner(state: GaussianState, point) -> float:
    point = np.asarray(point, dtype=float)
    if np.linalg.cond(state.cov) >= 1e12:
        raise ValueError("covariance is numerically singular")
    delta = point - state.mean
    quad = delta @ np.linalg.solve(state.cov, delta)
    norm = (2 * np.pi) ** state.n_modes * np.sqrt(np.linalg.det(state.cov))
    return float(np.exp(-0.5 * quad) / norm)


def fidelity(pure: GaussianState, other: GaussianState) -> float:
    """Overlap ``<psi|rho|psi>`` of a pure single-mode state with another state.

    With ``W`` normalised to 1 the overlap is ``4 pi * integral(W1 W2)``, which for
    Gaussians gives ``2 exp(-d.(V1+V2)^-1.d / 2) / sqrt(det(V1+V2))``.
    """
    if pure.n_modes != 1 or other.n_modes != 1:
        raise ValueError("fidelity is implemented for single-mode states only")
    if pure.purity < 1 - ATOL:
        raise ValueError("first argument must be a pure state")
    vsum = pure.cov + other.cov
    delta = pure.mean - other.mean
    return float(2.0 * np.exp(-0.5 * delta @ np.linalg.solve(vsum, delta)) / np.sqrt(np.linalg.det(vsum)))
