"""Teleportation, QND-gate presets and the criteria used to judge them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .elements import EprParams, epr_source
from .gaussian import (
    GaussianState,
    LinearProcess,
    QuadratureForm,
    SymplecticOp,
    linear_process,
    squeezed_vacuum,
    tensor,
    vacuum,
)

UNITY_GAIN_REFLECTANCE = (3.0 - np.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class TeleportConfig:
    epr: EprParams
    gain_x: float = 1.0
    gain_p: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.gain_x) and np.isfinite(self.gain_p)):
            raise ValueError("feedforward gains must be finite")


def fidelity_to_vsq(F: float) -> float:
    """EPR squeezing variance giving coherent-state fidelity ``F`` at unity gain."""
    return 1.0 / F - 1.0


def teleport_process(cfg: TeleportConfig) -> LinearProcess:
    """Ensemble map (input, A, B) -> output for the standard CV teleporter.

    Bob's mode becomes ``xB + gx (x_in - xA)`` and ``pB + gp (p_in + pA)``; at unity
    gain this is ``x_in - (xA - xB)`` and ``p_in + (pA + pB)``.
    """
    gx, gp = cfg.gain_x, cfg.gain_p
    M = np.array(
        [
            [gx, 0.0, -gx, 0.0, 1.0, 0.0],
            [0.0, gp, 0.0, gp, 0.0, 1.0],
        ]
    )
    return LinearProcess(M, ancilla=epr_source(cfg.epr))


def teleport(state: GaussianState, cfg: TeleportConfig) -> GaussianState:
    if state.n_modes != 1:
        raise ValueError("teleport takes a single-mode input")
    return linear_process(teleport_process(cfg), state)


def teleport_sequential(state: GaussianState, cfgs: Sequence[TeleportConfig]) -> GaussianState:
    for cfg in cfgs:
        state = teleport(state, cfg)
    return state


def gate_teleport_process(ancilla_v_sq: float, ancilla_v_anti: float | None = None) -> LinearProcess:
    """Ensemble map of the generalized teleportation circuit.

    The input is coupled to an x-squeezed ancilla by a unit-gain QND gate
    (``x_a += x_in``, ``p_in -= p_a``), ``p`` of the input is measured and the
    outcome displaces ``p`` of the ancilla, which becomes the output.
    """
    S = qnd_ideal(1.0).S
    measured = S[1]
    M = np.vstack([S[2], S[3] + measured])
    return LinearProcess(M, ancilla=squeezed_vacuum(ancilla_v_sq, ancilla_v_anti, 0.0))


def gate_teleport_identity(
    state: GaussianState, ancilla_v_sq: float, ancilla_v_anti: float | None = None
) -> GaussianState:
    if state.n_modes != 1:
        raise ValueError("gate teleportation takes a single-mode input")
    return linear_process(gate_teleport_process(ancilla_v_sq, ancilla_v_anti), state)


# --- QND gate -------------------------------------------------------------


def qnd_ideal(G: float) -> SymplecticOp:
    """``x2 -> x2 + G x1`` and ``p1 -> p1 - G p2``; x1 and p2 untouched."""
    if not np.isfinite(G):
        raise ValueError("interaction gain must be finite")
    S = np.eye(4)
    S[2, 0] = G
    S[1, 3] = -G
    return SymplecticOp(S)


def interaction_gain(R: float) -> float:
    return 1.0 / np.sqrt(R) - np.sqrt(R)


def reflectance_for_gain(G: float) -> float:
    """Beam-splitter reflectance whose offline QND has interaction gain ``G``."""
    sqrt_r = (np.sqrt(G * G + 4.0) - G) / 2.0
    return sqrt_r * sqrt_r


def qnd_offline(
    ancilla_a: GaussianState,
    ancilla_b: GaussianState,
    R: float = UNITY_GAIN_REFLECTANCE,
) -> LinearProcess:
    """Offline QND gate built from two offline squeezers.

    Ancilla A (x-squeezed) adds noise to the x quadratures, ancilla B (p-squeezed)
    to the p quadratures::

        x1' = x1 - a xA            x2' = x2 + G x1 + b xA
        p1' = p1 - G p2 + b pB     p2' = p2 + a pB

    with ``a = sqrt((1-R)/(1+R))``, ``b = sqrt(R) a`` and ``G = 1/sqrt(R) - sqrt(R)``.
    """
    if not 0.0 < R < 1.0:
        raise ValueError(f"reflectance must lie in (0, 1), got {R}")
    if ancilla_a.n_modes != 1 or ancilla_b.n_modes != 1:
        raise ValueError("offline QND ancillas must be single-mode")
    a = np.sqrt((1.0 - R) / (1.0 + R))
    b = np.sqrt(R) * a
    G = interaction_gain(R)
    # columns: x1 p1 x2 p2 xA pA xB pB
    M = np.array(
        [
            [1, 0, 0, 0, -a, 0, 0, 0],
            [0, 1, 0, -G, 0, 0, 0, b],
            [G, 0, 1, 0, b, 0, 0, 0],
            [0, 0, 0, 1, 0, 0, 0, a],
        ],
        dtype=float,
    )
    return LinearProcess(M, ancilla=tensor(ancilla_a, ancilla_b))


def qnd_offline_squeezed(
    v_sq: float, v_anti: float | None = None, R: float = UNITY_GAIN_REFLECTANCE
) -> LinearProcess:
    """Offline QND with both ancillas squeezed to ``v_sq`` along the right quadrature."""
    return qnd_offline(
        squeezed_vacuum(v_sq, v_anti, 0.0), squeezed_vacuum(v_sq, v_anti, np.pi / 2), R
    )


# --- criteria -------------------------------------------------------------


def conditional_variance(
    state: GaussianState, f_signal: QuadratureForm, f_meter: QuadratureForm
) -> tuple[float, float]:
    """Minimum over ``k`` of ``Var(signal - k meter)`` and the minimising ``k``."""
    s, m = f_signal.coeffs, f_meter.coeffs
    v_meter = float(m @ state.cov @ m)
    if v_meter <= 1e-12:
        raise ValueError("meter form has zero variance")
    c = float(s @ state.cov @ m)
    return float(s @ state.cov @ s) - c * c / v_meter, c / v_meter


@dataclass(frozen=True)
class DuanResult:
    k: float
    lhs_x: float
    lhs_p: float
    bound: float

    @property
    def satisfied(self) -> bool:
        return self.lhs_x < self.bound and self.lhs_p < self.bound

    @property
    def ratio(self) -> float:
        return max(self.lhs_x, self.lhs_p) / self.bound


def default_duan_pair(n_modes: int = 2, a: int = 0, b: int = 1):
    """Forms for ``Var(x_a - k x_b)`` and ``Var(p_b + k p_a)``."""

    def unit(q):
        c = np.zeros(2 * n_modes)
        c[q] = 1.0
        return QuadratureForm(c)

    return (unit(2 * a), unit(2 * b)), (unit(2 * b + 1), unit(2 * a + 1))


def duan_check(state: GaussianState, k: float, pair=None) -> DuanResult:
    """Evaluate ``Var(u1 - k v1) < 2k`` and ``Var(u2 + k v2) < 2k``.

    ``pair`` is ``((u1, v1), (u2, v2))`` of quadrature forms; the default is
    ``x1 - k x2`` and ``p2 + k p1``.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    (u1, v1), (u2, v2) = pair or default_duan_pair(state.n_modes)
    cx = u1.coeffs - k * v1.coeffs
    cp = u2.coeffs + k * v2.coeffs
    return DuanResult(k, float(cx @ state.cov @ cx), float(cp @ state.cov @ cp), 2.0 * k)


def duan_scan(state: GaussianState, pair=None) -> DuanResult:
    """The ``k`` minimising ``max(lhs) / 2k`` (quasi-convex in ``log k``)."""
    res = minimize_scalar(
        lambda lk: duan_check(state, np.exp(lk), pair).ratio,
        bounds=(-12.0, 12.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return duan_check(state, float(np.exp(res.x)), pair)


@dataclass(frozen=True)
class QndReport:
    t_s_x: float
    t_m_x: float
    t_s_p: float
    t_m_p: float
    v_cond_x: float
    v_cond_p: float
    duan_min_x: float
    duan_min_p: float
    interaction_gain: float
    k_cond_x: float = 0.0
    k_cond_p: float = 0.0
    duan: DuanResult | None = field(default=None, compare=False)

    @property
    def transfer_sum_x(self) -> float:
        return self.t_s_x + self.t_m_x

    @property
    def transfer_sum_p(self) -> float:
        return self.t_s_p + self.t_m_p

    @property
    def qnd_x(self) -> bool:
        return self.transfer_sum_x > 1 and self.v_cond_x < 1

    @property
    def qnd_p(self) -> bool:
        return self.transfer_sum_p > 1 and self.v_cond_p < 1

    @property
    def entangled(self) -> bool:
        return self.duan is not None and self.duan.satisfied


def qnd_criteria(
    output: GaussianState,
    input_variances: tuple[float, float] = (1.0, 1.0),
    interaction_gain: float = 1.0,
) -> QndReport:
    """Transfer coefficients, conditional variances and Duan witness of a QND output.

    x: mode 1 is the signal and mode 2 the meter; p: roles swapped.
    ``input_variances`` are ``Var(x1_in)`` and ``Var(p2_in)``.
    """
    if output.n_modes != 2:
        raise ValueError("QND criteria need the two-mode gate output")
    V = output.cov
    vx1, vp1, vx2, vp2 = np.diag(V)
    if min(vx1, vp1, vx2, vp2) <= 0:
        raise ValueError("zero output variance")
    vin_x, vin_p = input_variances
    x1 = QuadratureForm.from_terms(2, x1=1)
    x2 = QuadratureForm.from_terms(2, x2=1)
    p1 = QuadratureForm.from_terms(2, p1=1)
    p2 = QuadratureForm.from_terms(2, p2=1)
    vcx, kx = conditional_variance(output, x1, x2)
    vcp, kp = conditional_variance(output, p2, p1)
    dmin_x = minimize_scalar(
        lambda lk: duan_check(output, np.exp(lk)).lhs_x / (2 * np.exp(lk)),
        bounds=(-12, 12), method="bounded", options={"xatol": 1e-10},
    ).fun
    dmin_p = minimize_scalar(
        lambda lk: duan_check(output, np.exp(lk)).lhs_p / (2 * np.exp(lk)),
        bounds=(-12, 12), method="bounded", options={"xatol": 1e-10},
    ).fun
    return QndReport(
        t_s_x=vin_x / vx1,
        t_m_x=vin_x / vx2,
        t_s_p=vin_p / vp2,
        t_m_p=vin_p / vp1,
        v_cond_x=vcx,
        v_cond_p=vcp,
        duan_min_x=float(dmin_x),
        duan_min_p=float(dmin_p),
        interaction_gain=interaction_gain,
        k_cond_x=kx,
        k_cond_p=kp,
        duan=duan_scan(output),
    )


def offline_qnd_report(v_sq: float, v_anti: float | None = None, R: float = UNITY_GAIN_REFLECTANCE) -> QndReport:
    """Criteria for the offline gate acting on two vacuum inputs."""
    out = linear_process(qnd_offline_squeezed(v_sq, v_anti, R), vacuum(2))
    return qnd_criteria(out, (1.0, 1.0), interaction_gain(R))


def calibrate_qnd_ancilla(target_v_cond: float, R: float = UNITY_GAIN_REFLECTANCE) -> float:
    """Ancilla squeezing variance at which ``V(x1_out | x2_out)`` equals the target."""
    x1 = QuadratureForm.from_terms(2, x1=1)
    x2 = QuadratureForm.from_terms(2, x2=1)

    def excess(v):
        out = linear_process(qnd_offline_squeezed(v, R=R), vacuum(2))
        return conditional_variance(out, x1, x2)[0] - target_v_cond

    return float(brentq(excess, 1e-12, 1.0, xtol=1e-14))


def qnd_conditional_threshold(R: float = UNITY_GAIN_REFLECTANCE) -> float:
    """Largest ancilla variance for which the conditional variance stays below 1."""
    return calibrate_qnd_ancilla(1.0, R)
