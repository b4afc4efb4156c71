"""Monte-Carlo homodyne trajectories used to cross-check the analytic paths.

Randomness is counter-based: trajectory ``t`` reads the Philox blocks starting
at counter ``t * blocks_per_trajectory`` under key ``seed``. Any partition of the
trajectories into chunks (serial or parallel) therefore draws identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import ndtri
from scipy.stats import norm

from .dsl.compiler import FeedForwardStep, GateStep, MeasureStep, Plan
from .gaussian import GaussianState, embed, homodyne_condition

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrajectoryConfig:
    n_samples: int = 100_000
    seed: int = 0
    tolerance_sigmas: float = 5.0

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("need at least two samples")
        if self.tolerance_sigmas <= 0:
            raise ValueError("tolerance_sigmas must be positive")


def normals(seed: int, n_draws: int, start: int, stop: int) -> np.ndarray:
    """Standard normals for trajectories ``start..stop-1``, ``n_draws`` each."""
    blocks = -(-n_draws // 4)
    bitgen = np.random.Philox(key=seed & _MASK64, counter=start * blocks)
    raw = bitgen.random_raw((stop - start) * blocks * 4).reshape(stop - start, blocks * 4)
    u = ((raw[:, :n_draws] >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
    return ndtri(u)


def _psd_sqrt(cov: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(cov)
    if w.min() < -1e-9 * max(1.0, abs(w).max()):
        raise ValueError("covariance is not positive semidefinite")
    return V * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class Moments:
    """Sample mean and covariance with their standard errors."""

    mean: np.ndarray
    cov: np.ndarray
    mean_se: np.ndarray
    cov_se: np.ndarray
    n_samples: int
    outcomes: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples: np.ndarray, outcomes: dict | None = None) -> "Moments":
        n = samples.shape[0]
        mean = samples.mean(axis=0)
        cov = np.cov(samples, rowvar=False, ddof=1).reshape(samples.shape[1], samples.shape[1])
        var = np.diag(cov)
        # Gaussian sampling variance of s_ij: (s_ii s_jj + s_ij^2) / (n - 1)
        cov_se = np.sqrt((np.outer(var, var) + cov**2) / (n - 1))
        return cls(mean, cov, np.sqrt(var / n), cov_se, n, outcomes or {})

    def zscores(self, state: GaussianState) -> tuple[np.ndarray, np.ndarray]:
        z_mean = np.abs(self.mean - state.mean) / np.maximum(self.mean_se, 1e-300)
        z_cov = np.abs(self.cov - state.cov) / np.maximum(self.cov_se, 1e-300)
        return z_mean, z_cov

    def max_z(self, state: GaussianState) -> float:
        z_mean, z_cov = self.zscores(state)
        return float(max(z_mean.max(), z_cov.max()))

    def agrees(self, state: GaussianState, sigmas: float = 5.0) -> bool:
        return self.max_z(state) <= sigmas


def sample_state(state: GaussianState, cfg: TrajectoryConfig) -> Moments:
    """Draw quadrature vectors from the state's normal distribution."""
    L = _psd_sqrt(state.cov)
    z = normals(cfg.seed, 2 * state.n_modes, 0, cfg.n_samples)
    return Moments.from_samples(state.mean + z @ L.T)


def run_trajectories(
    plan: Plan,
    state: GaussianState | None = None,
    cfg: TrajectoryConfig = TrajectoryConfig(),
    *,
    chunk: int = 1 << 15,
    return_final: bool = False,
):
    """Sample outcomes measurement by measurement and aggregate output moments.

    For each trajectory the outcome of every homodyne is drawn from its current
    conditional marginal, the state is conditioned on it and outcome-scaled
    displacements are applied; finally one output quadrature vector is drawn from
    the conditional output state. The conditional covariance never depends on the
    outcomes, so it is shared across a chunk while means are tracked per
    trajectory.
    """
    state = plan.initial if state is None else state
    n_out = len(plan.outputs)
    n_meas = len(plan.outcome_vars)
    n_draws = n_meas + 2 * n_out
    samples = np.empty((cfg.n_samples, 2 * n_out))
    outcome_values = {v: np.empty(cfg.n_samples) for v in plan.outcome_vars}
    final_cov = None
    final_means = np.empty((cfg.n_samples, 2 * n_out)) if return_final else None

    for start in range(0, cfg.n_samples, chunk):
        stop = min(start + chunk, cfg.n_samples)
        z = normals(cfg.seed, n_draws, start, stop)
        cov = state.cov.copy()
        means = np.tile(state.mean, (stop - start, 1))
        values: dict[str, np.ndarray] = {}
        k = 0
        for step in plan.steps:
            n_live = cov.shape[0] // 2
            if isinstance(step, GateStep):
                S = embed(step.op.S, step.positions, n_live)
                d = np.zeros(2 * n_live)
                for i, pos in enumerate(step.positions):
                    d[2 * pos : 2 * pos + 2] = step.op.d[2 * i : 2 * i + 2]
                means = means @ S.T + d
                cov = S @ cov @ S.T
            elif isinstance(step, MeasureStep):
                split = homodyne_condition(GaussianState(np.zeros(2 * n_live), cov), step.position, step.angle)
                c = np.zeros(2 * n_live)
                c[2 * step.position] = np.cos(step.angle)
                c[2 * step.position + 1] = np.sin(step.angle)
                marginal_mean = means @ c
                q = marginal_mean + np.sqrt(split.variance) * z[:, k]
                k += 1
                means = means[:, split.keep] + np.outer(q - marginal_mean, split.gain)
                cov = split.cond_cov
                values[step.var] = q
            elif isinstance(step, FeedForwardStep):
                means[:, 2 * step.position + step.quadrature] += step.gain * values[step.var]
        L = _psd_sqrt(cov)
        samples[start:stop] = means + z[:, k : k + 2 * n_out] @ L.T
        for v, q in values.items():
            outcome_values[v][start:stop] = q
        if return_final:
            final_means[start:stop] = means
        final_cov = cov

    stats = {v: (float(q.mean()), float(q.var(ddof=1))) for v, q in outcome_values.items()}
    moments = Moments.from_samples(samples, stats)
    if return_final:
        return moments, final_means, final_cov
    return moments


def _overlap_grid(states, extent):
    if extent is None:
        center = np.mean([s.mean for s in states], axis=0)
        extent = max(
            float(np.max(np.abs(s.mean - center)) + 8.0 * np.sqrt(np.linalg.eigvalsh(s.cov).max()))
            for s in states
        )
        return center, extent
    return np.zeros(2), float(extent)


def tail_mass(state: GaussianState, center, extent: float) -> float:
    """Upper bound on the probability outside the square ``center +- extent``."""
    sd = np.sqrt(np.diag(state.cov))
    lo = (center - extent - state.mean) / sd
    hi = (center + extent - state.mean) / sd
    return float(np.sum(norm.cdf(lo) + norm.sf(hi)))


def fidelity_overlap_oracle(
    pure: GaussianState,
    other: GaussianState,
    extent: float | None = None,
    resolution: int = 400,
) -> float:
    """``4 pi`` times the integral of ``W_pure * W_other`` on a square grid.

    With ``extent=None`` the grid spans 8 standard deviations around both states;
    an explicit ``extent`` (half-width about the origin) is rejected when the
    estimated tail mass outside it exceeds 1e-8.
    """
    if pure.n_modes != 1 or other.n_modes != 1:
        raise ValueError("overlap oracle handles single-mode states")
    center, half = _overlap_grid((pure, other), extent)
    for s in (pure, other):
        if tail_mass(s, center, half) > 1e-8:
            raise ValueError("grid too small: tail mass outside the grid exceeds 1e-8")
    xs = np.linspace(center[0] - half, center[0] + half, resolution)
    ps = np.linspace(center[1] - half, center[1] + half, resolution)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    pts = np.stack([X.ravel(), P.ravel()], axis=1)

    def w(s):
        delta = pts - s.mean
        inv = np.linalg.inv(s.cov)
        q = np.einsum("ij,jk,ik->i", delta, inv, delta)
        return np.exp(-0.5 * q) / (2 * np.pi * np.sqrt(np.linalg.det(s.cov)))

    product = (w(pure) * w(other)).reshape(resolution, resolution)
    integral = trapezoid(trapezoid(product, ps, axis=1), xs)
    return float(4 * np.pi * integral)


__all__ = [
    "Moments",
    "TrajectoryConfig",
    "fidelity_overlap_oracle",
    "normals",
    "run_trajectories",
    "sample_state",
    "tail_mass",
]
