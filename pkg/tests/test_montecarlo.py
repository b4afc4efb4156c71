import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvsim import circuits
from cvsim.dsl import compile_program, parse
from cvsim.elements import EprParams, epr_source
from cvsim.gaussian import (
    GaussianState,
    coherent,
    fidelity,
    homodyne_project,
    squeezed_vacuum,
    vacuum,
)
from cvsim.montecarlo import (
    Moments,
    TrajectoryConfig,
    fidelity_overlap_oracle,
    normals,
    run_trajectories,
    sample_state,
    tail_mass,
)


def plan_of(text):
    return compile_program(parse(text))


TELEPORT = circuits.teleport_circuit(circuits.source("coherent", 3, 3), [EprParams(0.2048)])
GATE = circuits.gate_teleport_circuit(circuits.source("coherent", 1, -2), 0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        TrajectoryConfig(n_samples=1)
    with pytest.raises(ValueError):
        TrajectoryConfig(tolerance_sigmas=0)


def test_normals_are_counter_based():
    whole = normals(7, 5, 0, 100)
    parts = np.vstack([normals(7, 5, 0, 37), normals(7, 5, 37, 100)])
    assert np.array_equal(whole, parts)
    assert not np.array_equal(whole, normals(8, 5, 0, 100))
    assert whole.shape == (100, 5)
    assert np.all(np.isfinite(normals(0, 3, 0, 100_000)))


def test_normals_distribution():
    z = normals(3, 2, 0, 200_000).ravel()
    assert abs(z.mean()) < 5 / np.sqrt(z.size)
    assert abs(z.var() - 1) < 5 * np.sqrt(2 / z.size)


def test_sample_vacuum():
    m = sample_state(vacuum(1), TrajectoryConfig(100_000, seed=1))
    assert m.agrees(vacuum(1))


def test_sample_squeezed_and_epr():
    m = sample_state(squeezed_vacuum(0.2884), TrajectoryConfig(100_000, seed=2))
    assert m.cov[0, 0] == pytest.approx(0.2884, rel=0.02)
    epr = epr_source(EprParams(0.3))
    m = sample_state(epr, TrajectoryConfig(100_000, seed=3))
    c = np.array([1.0, 0.0, -1.0, 0.0])
    assert c @ m.cov @ c == pytest.approx(0.6, rel=0.02)
    assert m.agrees(epr)


def test_sample_rejects_non_psd():
    from cvsim.montecarlo import _psd_sqrt

    with pytest.raises(ValueError):
        _psd_sqrt(np.diag([1.0, -1.0]))


def test_moment_standard_errors():
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(10_000, 2)) * [1.0, 2.0]
    m = Moments.from_samples(samples)
    assert m.mean_se == pytest.approx([0.01, 0.02], rel=0.05)
    # Var(s_ii) = 2 s_ii^2 / (n - 1)
    assert m.cov_se[1, 1] == pytest.approx(np.sqrt(2 * 16 / 9999), rel=0.05)


@pytest.mark.parametrize("text", [TELEPORT, GATE], ids=["teleport", "gate"])
def test_trajectories_match_analytic(text):
    plan = plan_of(text)
    m = run_trajectories(plan, cfg=TrajectoryConfig(100_000, seed=11))
    assert m.agrees(plan.run())
    assert set(m.outcomes) == set(plan.outcome_vars)


def test_bit_identical_reruns_and_chunking():
    plan = plan_of(TELEPORT)
    cfg = TrajectoryConfig(20_000, seed=5)
    a = run_trajectories(plan, cfg=cfg)
    b = run_trajectories(plan, cfg=cfg)
    c = run_trajectories(plan, cfg=cfg, chunk=777)
    for m in (b, c):
        assert np.array_equal(a.mean, m.mean)
        assert np.array_equal(a.cov, m.cov)
        assert a.outcomes == m.outcomes
    d = run_trajectories(plan, cfg=TrajectoryConfig(20_000, seed=6))
    assert not np.array_equal(a.mean, d.mean)


def test_conditional_covariance_is_outcome_independent():
    plan = plan_of(TELEPORT)
    _, means, cov = run_trajectories(plan, cfg=TrajectoryConfig(5_000, seed=0), return_final=True)
    assert cov.shape == (2, 2)
    # the core conditional path agrees for two arbitrary outcomes
    s = epr_source(EprParams(0.2048))
    a = homodyne_project(s, 0, 0.0, 1.7)
    b = homodyne_project(s, 0, 0.0, -0.4)
    assert np.allclose(a.cov, b.cov)
    assert not np.allclose(a.mean, b.mean)
    # unity gain: mean of the output is the input mean on average
    se = means.std(axis=0, ddof=1) / np.sqrt(len(means))
    assert np.all(np.abs(means.mean(axis=0) - [3.0, 3.0]) < 5 * se)


def test_gate_teleport_unbiased():
    m = run_trajectories(plan_of(GATE), cfg=TrajectoryConfig(100_000, seed=9))
    z = np.abs(m.mean - [1.0, -2.0]) / m.mean_se
    assert np.all(z < 5)


def test_unitary_plan_sampling():
    text = circuits.cluster_circuit("linear", 0.2884)
    plan = plan_of(text)
    m = run_trajectories(plan, cfg=TrajectoryConfig(100_000, seed=4))
    assert m.agrees(plan.run())


def test_statistical_consistency_over_seeds():
    """20 seeds: no z-score above 5 and the z-scores look standard-normal in scale."""
    plan = plan_of(TELEPORT)
    analytic = plan.run()
    zs = []
    for seed in range(20):
        m = run_trajectories(plan, cfg=TrajectoryConfig(20_000, seed=1000 + seed))
        z_mean, z_cov = m.zscores(analytic)
        zs.extend(z_mean)
        zs.extend(z_cov[np.triu_indices(2)])
    zs = np.array(zs)
    assert np.sum(zs > 5) == 0
    assert 0.6 < np.sqrt(np.mean(zs**2)) < 1.4


def test_overlap_oracle_anchors():
    assert fidelity_overlap_oracle(vacuum(1), vacuum(1)) == pytest.approx(1.0, abs=1e-6)
    noisy = GaussianState(np.zeros(2), 3 * np.eye(2))
    assert fidelity_overlap_oracle(coherent(0, 0), noisy) == pytest.approx(0.5, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(0.2, 5.0), st.floats(0, np.pi), st.floats(-3, 3), st.floats(-3, 3),
    st.floats(1.0, 3.0), st.floats(0.2, 4.0),
)
def test_overlap_oracle_matches_closed_form(v, angle, x, p, scale, ratio):
    pure = squeezed_vacuum(v, angle=angle)
    cov = scale * np.diag([ratio, 1 / ratio]) + 0.1 * np.eye(2)
    other = GaussianState([x, p], cov)
    assert fidelity_overlap_oracle(pure, other) == pytest.approx(fidelity(pure, other), abs=1e-4)


def test_overlap_grid_too_small():
    with pytest.raises(ValueError):
        fidelity_overlap_oracle(vacuum(1), coherent(3, 0), extent=2.0)
    assert tail_mass(vacuum(1), np.zeros(2), 10.0) < 1e-8
    with pytest.raises(ValueError):
        fidelity_overlap_oracle(vacuum(2), vacuum(2))
