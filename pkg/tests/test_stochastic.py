import math

import numpy as np
import pytest

from fanodyn import (estimate_correlation, estimate_moment_ratio,
                     sample_chaotic, sample_phase_diffusion)
from fanodyn.stochastic import (FieldTrajectory, chaotic_ensemble, default_dt,
                                dump_trajectory_csv, phase_diffusion_ensemble,
                                sample_ensemble)

GL = 0.0018


def pd_set(n_traj=400, n_steps=600, dt=0.1 / GL, seed=12):
    return [sample_phase_diffusion(GL, dt, n_steps, seed, stream_index=i)
            for i in range(n_traj)]


def ou_set(n_traj=400, n_steps=600, dt=0.1 / GL, seed=12):
    return [sample_chaotic(GL, dt, n_steps, seed, stream_index=i)
            for i in range(n_traj)]


def test_phase_diffusion_unit_modulus():
    traj = sample_phase_diffusion(GL, 3.0, 500, 1)
    assert np.allclose(np.abs(traj.samples), 1.0, atol=1e-14)
    assert traj.model_tag == "phase-diffusion"


def test_phase_diffusion_frozen_at_zero_bandwidth():
    traj = sample_phase_diffusion(0.0, 3.0, 200, 5)
    assert np.allclose(traj.samples, traj.samples[0], atol=1e-15)


def test_chaotic_frozen_at_zero_bandwidth():
    traj = sample_chaotic(0.0, 3.0, 200, 5)
    assert np.allclose(traj.samples, traj.samples[0], atol=1e-15)


def test_determinism_and_substreams():
    a = sample_chaotic(GL, 2.0, 300, 42, stream_index=7)
    b = sample_chaotic(GL, 2.0, 300, 42, stream_index=7)
    c = sample_chaotic(GL, 2.0, 300, 42, stream_index=8)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_ensemble_rows_match_individual_samplers():
    mat = phase_diffusion_ensemble(GL, 2.5, 100, 9, 5)
    for i in range(5):
        traj = sample_phase_diffusion(GL, 2.5, 100, 9, stream_index=i)
        assert np.array_equal(mat[i], traj.samples)
    mat = chaotic_ensemble(GL, 2.5, 100, 9, 5, first_index=3)
    for i in range(5):
        traj = sample_chaotic(GL, 2.5, 100, 9, stream_index=3 + i)
        assert np.array_equal(mat[i], traj.samples)


def test_sampler_argument_validation():
    with pytest.raises(ValueError):
        sample_phase_diffusion(GL, 0.0, 10, 1)
    with pytest.raises(ValueError):
        sample_chaotic(GL, -1.0, 10, 1)
    with pytest.raises(ValueError):
        sample_chaotic(GL, 1.0, 0, 1)
    with pytest.raises(ValueError):
        sample_ensemble("wiener", GL, 1.0, 10, 1, 2)


@pytest.mark.parametrize("make_set", [pd_set, ou_set])
def test_first_order_correlation(make_set):
    trajs = make_set()
    dt = trajs[0].dt
    for target in (0.5 / GL, 1.0 / GL, 2.0 / GL):
        lag = round(target / dt) * dt
        est = estimate_correlation(trajs, lag)
        expected = math.exp(-0.5 * GL * lag)
        assert abs(est.value - expected) <= 3.0 * est.std_error


def test_correlation_zero_lag_phase_diffusion_exact():
    est = estimate_correlation(pd_set(n_traj=20), 0.0)
    assert est.value == pytest.approx(1.0, abs=1e-13)
    assert est.std_error < 1e-13


def test_correlation_constant_trajectory():
    traj = FieldTrajectory(dt=1.0, samples=np.ones(50, dtype=complex),
                           model_tag="phase-diffusion")
    est = estimate_correlation([traj], 7.0)
    assert est.value == pytest.approx(1.0, abs=1e-15)


def test_correlation_lag_validation():
    trajs = pd_set(n_traj=4, n_steps=50)
    dt = trajs[0].dt
    with pytest.raises(ValueError):
        estimate_correlation(trajs, 0.5 * dt)
    with pytest.raises(ValueError):
        estimate_correlation(trajs, 51 * dt)


def test_moment_ratio_phase_diffusion_exact():
    ratio, err = estimate_moment_ratio(pd_set(n_traj=30), 2)
    assert ratio == pytest.approx(1.0, abs=1e-12)
    ratio, _ = estimate_moment_ratio(pd_set(n_traj=30), 3)
    assert ratio == pytest.approx(1.0, abs=1e-12)


def test_moment_ratios_chaotic():
    trajs = ou_set(n_traj=800, n_steps=800)
    r2, se2 = estimate_moment_ratio(trajs, 2)
    assert abs(r2 - 2.0) <= 3.0 * se2
    r3, se3 = estimate_moment_ratio(trajs, 3)
    assert abs(r3 - 6.0) <= 3.0 * se3


def test_moment_ratio_order_validation():
    with pytest.raises(ValueError):
        estimate_moment_ratio(pd_set(n_traj=3), 4)


def test_chaotic_stationarity():
    trajs = ou_set(n_traj=1500, n_steps=400)
    x = np.vstack([t.samples for t in trajs])
    head = np.mean(np.abs(x[:, :20]) ** 2)
    tail = np.mean(np.abs(x[:, -20:]) ** 2)
    se = np.abs(x[:, :20]).std() / math.sqrt(x.shape[0] * 20) * 3
    assert abs(head - 1.0) < 5 * se + 0.02
    assert abs(tail - 1.0) < 5 * se + 0.02
    assert abs(head - tail) < 0.04


def test_default_dt():
    assert default_dt(0.0018, 0.0016, 5000.0) == pytest.approx(2.5)
    assert default_dt(0.0, 0.0016, 5000.0) == pytest.approx(2.5)
    assert default_dt(0.0018, 0.0016, 1e7) == pytest.approx(0.05 / 0.0018)


def test_trajectory_dump(tmp_path):
    traj = sample_phase_diffusion(GL, 2.0, 20, 3)
    path = tmp_path / "traj.csv"
    dump_trajectory_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[1] == "t_au,re_eps,im_eps"
    assert len(lines) == 2 + 21
