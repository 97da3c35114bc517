"""Discrete-time realizations of the stochastic field models and estimators
for their correlation functions.

Two Markovian models are provided, both normalized to <|eps|^2> = 1 in the
stationary ensemble and sharing the first-order correlation
exp(-gamma_l |t1 - t2| / 2):

* phase diffusion: constant unit amplitude, Wiener phase with
  <(dphi)^2> = gamma_l * dt;
* chaotic: complex Ornstein-Uhlenbeck process (circular Gaussian),
  updated with the exact exponential-decay recursion so the correlation
  function carries no step-size bias.

Randomness comes from counter-based Philox streams keyed by
(master seed, trajectory index), so ensembles are reproducible and
collision-free regardless of how generation is scheduled.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

MODEL_TAGS = ("phase-diffusion", "chaotic")


@dataclass(frozen=True)
class FieldTrajectory:
    """One sampled realization eps(t_k) on the grid t_k = k * dt."""

    dt: float
    samples: np.ndarray   # complex, length n_steps + 1
    model_tag: str


@dataclass(frozen=True)
class CorrelationEstimate:
    lag: float
    value: complex
    std_error: float

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")


def substream(seed: int, index: int) -> np.random.Generator:
    """Deterministic counter-based generator for trajectory ``index``."""
    key = np.array([int(seed) % 2 ** 64, int(index) % 2 ** 64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_dt(gamma_l: float, kappa_tilde_re: float, span: float) -> float:
    """Default sampling step: resolve the fastest relevant rate.

    min(0.05 / gamma_l, 0.05 / Re(kappa_tilde), span / 2000).
    """
    dt = span / 2000.0
    if gamma_l > 0:
        dt = min(dt, 0.05 / gamma_l)
    if kappa_tilde_re > 0:
        dt = min(dt, 0.05 / kappa_tilde_re)
    return dt


def _check_sampling_args(dt, n_steps):
    if not (dt > 0):
        raise ValueError("dt must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")


def sample_phase_diffusion(gamma_l, dt, n_steps, seed, stream_index=0) -> FieldTrajectory:
    """Unit-amplitude field with a Wiener phase; |eps(t_k)| = 1 exactly."""
    _check_sampling_args(dt, n_steps)
    samples = phase_diffusion_ensemble(gamma_l, dt, n_steps, seed, 1, first_index=stream_index)[0]
    return FieldTrajectory(dt=dt, samples=samples, model_tag="phase-diffusion")


def sample_chaotic(gamma_l, dt, n_steps, seed, stream_index=0) -> FieldTrajectory:
    """Complex Ornstein-Uhlenbeck field, stationary unit variance."""
    _check_sampling_args(dt, n_steps)
    samples = chaotic_ensemble(gamma_l, dt, n_steps, seed, 1, first_index=stream_index)[0]
    return FieldTrajectory(dt=dt, samples=samples, model_tag="chaotic")


def phase_diffusion_ensemble(gamma_l, dt, n_steps, seed, n_traj, first_index=0):
    """(n_traj, n_steps + 1) phase-diffusion samples; row i uses substream
    (seed, first_index + i) and equals sample_phase_diffusion(..., stream_index=i)."""
    _check_sampling_args(dt, n_steps)
    phi = np.empty((n_traj, n_steps + 1))
    sig = np.sqrt(gamma_l * dt)
    for i in range(n_traj):
        rng = substream(seed, first_index + i)
        phi[i, 0] = rng.uniform(0.0, 2.0 * np.pi)
        phi[i, 1:] = rng.normal(0.0, sig, n_steps)
    np.cumsum(phi, axis=1, out=phi)
    return np.exp(1j * phi)


def chaotic_ensemble(gamma_l, dt, n_steps, seed, n_traj, first_index=0):
    """(n_traj, n_steps + 1) complex OU samples with the exact update
    eps_{k+1} = eps_k exp(-gamma_l dt / 2) + eta_k,
    Var(eta) = 1 - exp(-gamma_l dt), eps_0 stationary."""
    _check_sampling_args(dt, n_steps)
    decay = np.exp(-0.5 * gamma_l * dt)
    eta_sig = np.sqrt(0.5 * (1.0 - np.exp(-gamma_l * dt)))
    eps0 = np.empty(n_traj, dtype=complex)
    eta = np.empty((n_traj, n_steps), dtype=complex)
    for i in range(n_traj):
        rng = substream(seed, first_index + i)
        z = rng.normal(0.0, np.sqrt(0.5), 2)
        eps0[i] = z[0] + 1j * z[1]
        re = rng.normal(0.0, eta_sig, n_steps)
        im = rng.normal(0.0, eta_sig, n_steps)
        eta[i] = re + 1j * im
    out = np.empty((n_traj, n_steps + 1), dtype=complex)
    out[:, 0] = eps0
    zi = (decay * eps0)[:, None]
    out[:, 1:] = lfilter([1.0], [1.0, -decay], eta, axis=1, zi=zi)[0]
    return out


def sample_ensemble(model, gamma_l, dt, n_steps, seed, n_traj, first_index=0):
    if model == "phase-diffusion":
        return phase_diffusion_ensemble(gamma_l, dt, n_steps, seed, n_traj, first_index)
    if model == "chaotic":
        return chaotic_ensemble(gamma_l, dt, n_steps, seed, n_traj, first_index)
    raise ValueError(f"unknown stochastic model {model!r}")


def _stacked(trajs):
    trajs = list(trajs)
    if not trajs:
        raise ValueError("need at least one trajectory")
    dt = trajs[0].dt
    n = len(trajs[0].samples)
    for tr in trajs:
        if abs(tr.dt - dt) > 1e-15 * dt or len(tr.samples) != n:
            raise ValueError("trajectories must share dt and length")
    return np.vstack([tr.samples for tr in trajs]), dt


def jackknife_mean(values):
    """Mean and leave-one-out jackknife standard error over axis 0."""
    values = np.asarray(values)
    n = values.shape[0]
    mean = values.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(np.abs(mean))
    dev = values - mean
    var = np.sum(np.abs(dev) ** 2, axis=0) / (n * (n - 1))
    return mean, np.sqrt(var)


def estimate_correlation(trajs, lag) -> CorrelationEstimate:
    """Ensemble-and-time average of eps*(t) eps(t + lag).

    ``lag`` must be an integer multiple of dt within the trajectory span.
    The standard error is a jackknife over trajectories, so it honestly
    reflects the time correlation within each trajectory.
    """
    x, dt = _stacked(trajs)
    m = lag / dt
    if abs(m - round(m)) > 1e-9:
        raise ValueError("lag must be an integer multiple of dt")
    m = int(round(m))
    if not (0 <= m < x.shape[1]):
        raise ValueError("lag outside the trajectory span")
    if m == 0:
        per_traj = np.mean(np.abs(x) ** 2, axis=1).astype(complex)
    else:
        per_traj = np.mean(np.conj(x[:, :-m]) * x[:, m:], axis=1)
    value, err = jackknife_mean(per_traj)
    return CorrelationEstimate(lag=m * dt, value=complex(value), std_error=float(err))


def estimate_moment_ratio(trajs, order):
    """Return (<|eps|^2n> / <|eps|^2>^n, jackknife std error) for n in {2, 3}.

    Expected n! for the chaotic model and exactly 1 for phase diffusion.
    """
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    x, _ = _stacked(trajs)
    p2 = np.abs(x) ** 2
    num = np.mean(p2 ** order, axis=1)
    den = np.mean(p2, axis=1)
    n_traj = x.shape[0]
    ratio = num.mean() / den.mean() ** order
    if n_traj < 2:
        return float(ratio), 0.0
    idx = np.arange(n_traj)
    reps = np.array([
        num[idx != i].mean() / den[idx != i].mean() ** order for i in range(n_traj)
    ])
    var = (n_traj - 1) / n_traj * np.sum((reps - reps.mean()) ** 2)
    return float(ratio), float(np.sqrt(var))


def dump_trajectory_csv(traj: FieldTrajectory, path):
    """Debug dump: columns (t, Re eps, Im eps)."""
    n = len(traj.samples)
    t = np.arange(n) * traj.dt
    with open(path, "w") as fh:
        fh.write(f"# field trajectory, model={traj.model_tag}, dt={traj.dt!r}\n")
        fh.write("t_au,re_eps,im_eps\n")
        for k in range(n):
            fh.write(f"{t[k]:.17g},{traj.samples[k].real:.17g},{traj.samples[k].imag:.17g}\n")
