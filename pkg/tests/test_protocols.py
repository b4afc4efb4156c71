import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvsim.elements import EprParams, beamsplitter, epr_source
from cvsim.gaussian import (
    GaussianState,
    QuadratureForm,
    apply,
    coherent,
    db,
    fidelity,
    linear_process,
    squeezed_vacuum,
    tensor,
    vacuum,
)
from cvsim.protocols import (
    UNITY_GAIN_REFLECTANCE,
    TeleportConfig,
    calibrate_qnd_ancilla,
    conditional_variance,
    duan_check,
    duan_scan,
    fidelity_to_vsq,
    gate_teleport_identity,
    interaction_gain,
    offline_qnd_report,
    qnd_conditional_threshold,
    qnd_criteria,
    qnd_ideal,
    qnd_offline,
    qnd_offline_squeezed,
    reflectance_for_gain,
    teleport,
    teleport_sequential,
)


def teleport_by_conditioning(state, epr, gx=1.0, gp=1.0):
    """Ensemble output from joint Schur conditioning on both homodyne outcomes.

    Conditional mean of B is mu_B + K (q - mu_q); feedforward adds F q, so the
    ensemble covariance is cond_cov + (K + F) Sigma_q (K + F)^T.
    """
    full = tensor(state, epr_source(epr))  # in, A, B
    full = apply(beamsplitter(0.5), full, [1, 0])  # A' = (A + in)/sqrt2, in' = (in - A)/sqrt2
    V, mu = full.cov, full.mean
    meas = [0, 3]  # x of in', p of A'
    out = [4, 5]
    Vqq = V[np.ix_(meas, meas)]
    Voq = V[np.ix_(out, meas)]
    K = Voq @ np.linalg.inv(Vqq)
    cond = V[np.ix_(out, out)] - K @ Voq.T
    F = np.diag([gx * np.sqrt(2), gp * np.sqrt(2)])
    mean = mu[out] - K @ mu[meas] + (K + F) @ mu[meas]
    cov = cond + (K + F) @ Vqq @ (K + F).T
    return GaussianState(mean, cov)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 1.5))
def test_teleport_matches_conditioning_oracle(vx, vp, x, p, g):
    epr = EprParams(vx, vp)
    got = teleport(coherent(x, p), TeleportConfig(epr, g, g))
    ref = teleport_by_conditioning(coherent(x, p), epr, g, g)
    assert np.allclose(got.cov, ref.cov, atol=1e-10)
    assert np.allclose(got.mean, ref.mean, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.001, 5.0))
def test_coherent_fidelity_closed_form(v):
    out = teleport(coherent(1.0, -2.0), TeleportConfig(EprParams(v)))
    assert fidelity(coherent(1.0, -2.0), out) == pytest.approx(1 / (1 + v), rel=1e-12)
    assert fidelity_to_vsq(1 / (1 + v)) == pytest.approx(v)


def test_classical_limit():
    out = teleport(coherent(3, 3), TeleportConfig(EprParams(1.0)))
    assert np.allclose(out.cov, 3 * np.eye(2))
    assert fidelity(coherent(3, 3), out) == pytest.approx(0.5, abs=1e-12)


def test_sequential_noise_adds():
    vs = [0.2, 0.35, 0.5]
    out = teleport_sequential(coherent(0, 0), [TeleportConfig(EprParams(v)) for v in vs])
    assert fidelity(coherent(0, 0), out) == pytest.approx(1 / (1 + sum(vs)))


@pytest.mark.parametrize("v,expected,beats_classical", [(0.2048, 0.4940711, False), (0.19, 0.5128205, True)])
def test_five_hops(v, expected, beats_classical):
    s = coherent(1, -1)
    out = teleport_sequential(s, [TeleportConfig(EprParams(v))] * 5)
    F = fidelity(s, out)
    assert F == pytest.approx(expected, abs=1e-7)
    assert (F > 0.5) == beats_classical


def test_squeezed_teleport_variance():
    vin = 10 ** -0.62
    out = teleport(squeezed_vacuum(vin, 10**1.2), TeleportConfig(EprParams(0.296)))
    assert out.cov[0, 0] == pytest.approx(vin + 2 * 0.296)
    assert db(out.cov[0, 0]) == pytest.approx(-0.80, abs=0.01)


def test_nonunity_gain_shifts_mean():
    out = teleport(coherent(2.0, 1.0), TeleportConfig(EprParams(0.5), 0.8, 1.2))
    assert np.allclose(out.mean, [1.6, 1.2])


def test_gate_teleport_identity():
    s = coherent(1.0, -2.0)
    out = gate_teleport_identity(s, 0.1)
    assert np.allclose(out.mean, s.mean)
    assert np.allclose(out.cov, np.diag([1.1, 1.0]))


def test_qnd_ideal_action():
    S = qnd_ideal(2.0).S
    xi = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(S @ xi, [1.0, 2.0 - 8.0, 3.0 + 2.0, 4.0])


def test_unity_gain_reflectance():
    assert interaction_gain(UNITY_GAIN_REFLECTANCE) == pytest.approx(1.0, abs=1e-12)
    assert reflectance_for_gain(1.0) == pytest.approx(UNITY_GAIN_REFLECTANCE, abs=1e-15)
    for G in (0.3, 1.0, 2.5):
        assert interaction_gain(reflectance_for_gain(G)) == pytest.approx(G)


def test_offline_qnd_vacuum_closed_form():
    R = UNITY_GAIN_REFLECTANCE
    a2 = (1 - R) / (1 + R)
    out = linear_process(qnd_offline(vacuum(1), vacuum(1)), vacuum(2))
    V = out.cov
    assert V[0, 0] == pytest.approx(1 + a2)
    assert V[2, 2] == pytest.approx(2 + R * a2)
    assert V[0, 2] == pytest.approx(1 - np.sqrt(R) * a2)
    # x and p are mirror images under mode swap
    assert V[3, 3] == pytest.approx(V[0, 0]) and V[1, 1] == pytest.approx(V[2, 2])
    assert V[0, 0] == pytest.approx(1.4472, abs=1e-4)
    assert V[2, 2] == pytest.approx(2.1708, abs=1e-4)


def test_offline_qnd_ideal_limit():
    out = linear_process(qnd_offline_squeezed(1e-8), tensor(coherent(1, 2), coherent(3, 4)))
    ideal = apply(qnd_ideal(1.0), tensor(coherent(1, 2), coherent(3, 4)))
    assert np.allclose(out.cov, ideal.cov, atol=1e-6)
    assert np.allclose(out.mean, ideal.mean, atol=1e-12)


def test_qnd_report_vacuum_and_ideal():
    r = offline_qnd_report(1.0)
    assert r.t_s_x == pytest.approx(0.691, abs=1e-3)
    assert r.t_m_x == pytest.approx(0.461, abs=1e-3)
    assert r.transfer_sum_x == pytest.approx(1.152, abs=1e-3)
    assert r.v_cond_x == pytest.approx(1.206, abs=1e-3)
    assert (r.t_s_p, r.t_m_p) == pytest.approx((r.t_s_x, r.t_m_x))
    ideal = qnd_criteria(apply(qnd_ideal(1.0), vacuum(2)))
    assert (ideal.t_s_x, ideal.t_m_x) == pytest.approx((1.0, 0.5))
    assert ideal.v_cond_x == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-4, 1.0))
def test_transfer_sum_exceeds_one(v):
    assert offline_qnd_report(v).transfer_sum_x > 1


def test_conditional_variance_formula():
    out = linear_process(qnd_offline_squeezed(0.5), vacuum(2))
    x1 = QuadratureForm.from_terms(2, x1=1)
    x2 = QuadratureForm.from_terms(2, x2=1)
    v, k = conditional_variance(out, x1, x2)
    V = out.cov
    assert v == pytest.approx(V[0, 0] - V[0, 2] ** 2 / V[2, 2])
    # k minimises Var(x1 - k x2)
    ks = np.linspace(k - 0.1, k + 0.1, 201)
    assert np.all([V[0, 0] - 2 * kk * V[0, 2] + kk**2 * V[2, 2] >= v - 1e-12 for kk in ks])


def test_calibration_and_threshold():
    v = calibrate_qnd_ancilla(0.75)
    assert v == pytest.approx(0.336, abs=1e-3)
    assert offline_qnd_report(v).v_cond_x == pytest.approx(0.75, abs=1e-10)
    th = qnd_conditional_threshold()
    assert offline_qnd_report(th).v_cond_x == pytest.approx(1.0, abs=1e-10)
    assert offline_qnd_report(th * 0.99).v_cond_x < 1 < offline_qnd_report(min(th * 1.01, 1.0)).v_cond_x


def test_duan_epr_and_vacuum():
    epr = epr_source(EprParams(0.3))
    r = duan_check(epr, 1.0)
    assert (r.lhs_x, r.lhs_p, r.bound) == pytest.approx((0.6, 0.6, 2.0))
    assert r.satisfied
    assert not duan_scan(vacuum(2)).satisfied
    with pytest.raises(ValueError):
        duan_check(epr, 0.0)


def test_duan_calibrated_gate_entangles():
    v = calibrate_qnd_ancilla(0.75)
    assert offline_qnd_report(v).entangled
    assert not offline_qnd_report(1.0).entangled
