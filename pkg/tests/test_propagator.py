import math

import numpy as np
import pytest

from fanodyn import (AtomParams, FieldConfig, helium_2s2p_params,
                     monte_carlo_average, propagate_averaged,
                     propagate_trajectory, solve_populations, solver_context)
from fanodyn.propagator import deterministic_trajectory
from fanodyn.pulses import PulseShape
from fanodyn.stochastic import FieldTrajectory, sample_chaotic, sample_phase_diffusion
from fanodyn.units import intensity_to_au, time_fs_to_au

ATOM = helium_2s2p_params()
I13 = intensity_to_au(1e13)
T120 = time_fs_to_au(120.0)


def square_config(i0, gamma_l=0.0, delta=0.0, t_pulse=T120, model="deterministic"):
    return FieldConfig.create(i0, gamma_l, delta, "square", t_pulse, model=model)


def test_zero_intensity_freezes_ground_state():
    cfg = square_config(0.0, t_pulse=2000.0)
    field = deterministic_trajectory(2.0, 1000)
    res = propagate_trajectory(ATOM, field, cfg, cfg.pulse)
    assert np.allclose(res.sigma11, 1.0, atol=1e-14)
    assert np.allclose(res.sigma22, 0.0, atol=1e-14)


def test_zero_intensity_excited_state_autoionizes():
    cfg = square_config(0.0, t_pulse=2000.0)
    field = deterministic_trajectory(2.0, 1000)
    res = propagate_trajectory(ATOM, field, cfg, cfg.pulse, initial=(0.0, 1.0, 0.0))
    expected = np.exp(-ATOM.big_gamma * res.times)
    assert np.allclose(res.sigma22, expected, atol=1e-9)
    assert np.allclose(res.sigma11, 0.0, atol=1e-14)


def test_direct_channel_only():
    # negligible resonance coupling: s11 decays with gamma = c_gamma I alone
    atom = AtomParams(q=ATOM.q, big_gamma=ATOM.big_gamma, d21=1e-12,
                      gamma_per_intensity=ATOM.gamma_per_intensity,
                      omega_ag=ATOM.omega_ag, sigma_di=ATOM.sigma_di)
    cfg = square_config(I13, t_pulse=2000.0)
    field = deterministic_trajectory(2.0, 1000)
    res = propagate_trajectory(atom, field, cfg, cfg.pulse)
    gamma = atom.gamma_per_intensity * I13
    assert np.allclose(res.sigma11, np.exp(-gamma * res.times), atol=1e-10)


def test_deterministic_matches_laplace():
    n_steps = 2000
    field = deterministic_trajectory(T120 / n_steps, n_steps)
    for delta in (0.0, ATOM.big_gamma, -3e-3):
        cfg = square_config(I13, gamma_l=0.0, delta=delta)
        res = propagate_trajectory(ATOM, field, cfg, cfg.pulse)
        ctx = solver_context(ATOM, I13, delta, 0.0)
        sol = solve_populations(ATOM, ctx, I13)
        s11, s22 = sol.populations_at(T120)
        assert abs(res.sigma11[-1] - s11) < 1e-6
        assert abs(res.sigma22[-1] - s22) < 1e-6


def test_trace_monotone_and_positive():
    cfg = square_config(intensity_to_au(2e14), gamma_l=0.0, t_pulse=time_fs_to_au(20.0))
    field = deterministic_trajectory(cfg.t_pulse / 1500, 1500)
    res = propagate_trajectory(ATOM, field, cfg, cfg.pulse)
    trace = res.sigma11 + res.sigma22
    assert np.all(np.diff(trace) <= 1e-12)
    for pop in (res.sigma11, res.sigma22):
        assert np.all(pop >= -1e-8)
        assert np.all(pop <= 1.0 + 1e-8)


def test_step_halving_consistency():
    cfg = square_config(I13, gamma_l=0.0)
    coarse = propagate_trajectory(ATOM, deterministic_trajectory(T120 / 1000, 1000),
                                  cfg, cfg.pulse)
    fine = propagate_trajectory(ATOM, deterministic_trajectory(T120 / 2000, 2000),
                                cfg, cfg.pulse)
    assert abs(coarse.sigma11[-1] - fine.sigma11[-1]) < 1e-6
    assert abs(coarse.sigma22[-1] - fine.sigma22[-1]) < 1e-6


def test_phase_diffusion_zero_bandwidth_reduces_to_deterministic():
    # a frozen global phase cancels in the populations
    n_steps = 1200
    dt = T120 / n_steps
    cfg = square_config(I13, gamma_l=0.0, model="phase-diffusion")
    ref = propagate_trajectory(ATOM, deterministic_trajectory(dt, n_steps), cfg, cfg.pulse)
    traj = sample_phase_diffusion(0.0, dt, n_steps, 17)
    res = propagate_trajectory(ATOM, traj, cfg, cfg.pulse)
    assert np.allclose(res.sigma11, ref.sigma11, atol=1e-12)
    assert np.allclose(res.sigma22, ref.sigma22, atol=1e-12)


def test_chaotic_zero_bandwidth_scales_intensity():
    # a frozen chaotic draw is a deterministic run at intensity |eps0|^2 I
    n_steps = 1200
    dt = T120 / n_steps
    traj = sample_chaotic(0.0, dt, n_steps, 23)
    eps0 = traj.samples[0]
    cfg = square_config(I13, gamma_l=0.0, model="chaotic")
    res = propagate_trajectory(ATOM, traj, cfg, cfg.pulse)
    scaled = square_config(I13 * abs(eps0) ** 2, gamma_l=0.0)
    ref = propagate_trajectory(ATOM, deterministic_trajectory(dt, n_steps),
                               scaled, scaled.pulse)
    assert np.allclose(res.sigma11, ref.sigma11, atol=1e-10)
    assert np.allclose(res.sigma22, ref.sigma22, atol=1e-10)


def test_step_size_validation():
    cfg = square_config(I13, delta=0.2)  # |delta| * dt far above the bound
    field = deterministic_trajectory(10.0, 100)
    with pytest.raises(ValueError):
        propagate_trajectory(ATOM, field, cfg, cfg.pulse)


def test_nan_detection():
    cfg = square_config(I13)
    samples = np.ones(1001, dtype=complex)
    samples[500] = np.inf
    bad = FieldTrajectory(dt=T120 / 1000, samples=samples, model_tag="chaotic")
    with pytest.raises(RuntimeError, match="non-finite"):
        propagate_trajectory(ATOM, bad, cfg, cfg.pulse)


def test_monte_carlo_determinism():
    cfg = square_config(I13, gamma_l=0.0018, model="phase-diffusion",
                        t_pulse=time_fs_to_au(30.0))
    a = monte_carlo_average(ATOM, cfg, cfg.pulse, n_traj=50, seed=99)
    b = monte_carlo_average(ATOM, cfg, cfg.pulse, n_traj=50, seed=99)
    assert np.array_equal(a.mean_sigma11, b.mean_sigma11)
    assert np.array_equal(a.std_err11, b.std_err11)


def test_monte_carlo_forced_identical_streams():
    cfg = square_config(I13, gamma_l=0.0018, model="phase-diffusion",
                        t_pulse=time_fs_to_au(30.0))
    res = monte_carlo_average(ATOM, cfg, cfg.pulse, n_traj=2, seed=4,
                              stream_indices=[5, 5])
    assert np.allclose(res.std_err11, 0.0, atol=1e-15)
    assert np.allclose(res.std_err22, 0.0, atol=1e-15)


def test_monte_carlo_matches_decorrelated_weak_field():
    cfg = square_config(I13, gamma_l=0.0018, model="phase-diffusion")
    mc = monte_carlo_average(ATOM, cfg, cfg.pulse, n_traj=400, seed=7)
    ref = propagate_averaged(ATOM, cfg, cfg.pulse, t_grid=[0.0, T120])
    se = mc.final_sigma11.std(ddof=1) / math.sqrt(mc.n_traj)
    assert abs(mc.mean_sigma11[-1] - ref.s11[-1]) <= 3.0 * se


def test_monte_carlo_validation():
    cfg = square_config(I13, model="phase-diffusion")
    with pytest.raises(ValueError):
        monte_carlo_average(ATOM, cfg, cfg.pulse, n_traj=1, seed=0)
    det = square_config(I13)
    with pytest.raises(ValueError):
        monte_carlo_average(ATOM, det, det.pulse, n_traj=10, seed=0)
