"""Per-trajectory density-matrix integration and Monte Carlo averaging.

Integrates the slowly varying density matrix (sigma11, sigma22, sigma21) of
one field realization with a fixed-step classical Runge-Kutta scheme.  The
stochastic sample eps_k is held constant over each sampling interval (the
noise enters as a sampled coefficient; adaptive stepping across stochastic
samples would bias the ensemble), while the deterministic envelope is
evaluated at the substage times.

For a complex field sample the population equations use the conjugate
coupling, i.e. every Omega * sigma21 product becomes Omega^* * sigma21, and
the coherence sources keep Omega; for a real field this reduces to the
real-coupling equations, and populations stay real by construction.

This brute-force route is the oracle against which the decorrelated solvers
are validated.
"""

from dataclasses import dataclass

import numpy as np

from .model import AtomParams, FieldConfig
from .pulses import PulseShape, envelope
from .stochastic import FieldTrajectory, jackknife_mean, sample_ensemble
from .units import field_amplitude_from_intensity

_CLAMP_TOL = 1e-8
_MAX_RATE_DT = 0.1


@dataclass(frozen=True)
class DensityState:
    """Slowly varying density matrix at one instant."""

    sigma11: float
    sigma22: float
    sigma21: complex


@dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray
    sigma11: np.ndarray
    sigma22: np.ndarray
    sigma21: np.ndarray

    def state_at(self, k) -> DensityState:
        return DensityState(float(self.sigma11[k]), float(self.sigma22[k]),
                            complex(self.sigma21[k]))


@dataclass(frozen=True)
class McResult:
    """Trajectory-averaged populations with jackknife standard errors."""

    times: np.ndarray
    mean_sigma11: np.ndarray
    mean_sigma22: np.ndarray
    std_err11: np.ndarray
    std_err22: np.ndarray
    n_traj: int
    final_sigma11: np.ndarray   # per-trajectory terminal populations
    final_sigma22: np.ndarray


def _check_step(atom, config, dt):
    rates = {
        "big_gamma": atom.big_gamma,
        "gamma_l": config.gamma_l,
        "abs(delta)": abs(config.delta),
        "omega_rabi": 0.5 * atom.d21 * field_amplitude_from_intensity(config.i0),
        "gamma_peak": atom.gamma_per_intensity * config.i0,
    }
    for name, rate in rates.items():
        if rate * dt > _MAX_RATE_DT:
            raise ValueError(
                f"step too large: {name} * dt = {rate * dt:.3g} > {_MAX_RATE_DT}"
            )


def _integrate(atom, config, shape, eps, dt, initial=(1.0, 0.0, 0.0),
               keep_series=False):
    """Fixed-step RK4 over the (n_traj, n_steps + 1) sample matrix ``eps``."""
    n_traj, n_pts = eps.shape
    n_steps = n_pts - 1
    q = atom.q
    big_gamma = atom.big_gamma
    cm = 1.0 - 1j / q
    cp = 1.0 + 1j / q
    delta = config.delta
    half_d21 = 0.5 * atom.d21
    cgam = atom.gamma_per_intensity

    s11 = np.full(n_traj, float(initial[0]))
    s22 = np.full(n_traj, float(initial[1]))
    s21 = np.full(n_traj, complex(initial[2]))

    times = np.arange(n_pts) * dt
    env_full = envelope(shape, times)                  # at sample times
    env_half = envelope(shape, times[:-1] + 0.5 * dt)  # at midpoints

    if keep_series:
        ser11 = np.empty((n_traj, n_pts))
        ser22 = np.empty((n_traj, n_pts))
        ser21 = np.empty((n_traj, n_pts), dtype=complex)
        ser11[:, 0], ser22[:, 0], ser21[:, 0] = s11, s22, s21
    sum11 = np.empty(n_pts)
    sum22 = np.empty(n_pts)
    sq11 = np.empty(n_pts)
    sq22 = np.empty(n_pts)

    def record(k):
        sum11[k] = s11.sum()
        sum22[k] = s22.sum()
        sq11[k] = (s11 * s11).sum()
        sq22[k] = (s22 * s22).sum()
        if keep_series:
            ser11[:, k], ser22[:, k], ser21[:, k] = s11, s22, s21

    record(0)

    def rhs(a, b, c, om, gam):
        w = np.conj(om) * c
        da = -gam * a + 2.0 * np.imag(cm * w)
        db = -big_gamma * b - 2.0 * np.imag(cp * w)
        dc = (1j * delta - 0.5 * (gam + big_gamma)) * c - 1j * om * (cm * a - cp * b)
        return da, db, dc

    e0 = field_amplitude_from_intensity(config.i0)
    abs2 = np.abs(eps) ** 2
    half_dt = 0.5 * dt
    sixth_dt = dt / 6.0

    for k in range(n_steps):
        ek = eps[:, k]
        a2k = abs2[:, k]
        # envelope at the three substage times; eps held over the interval
        om_0 = half_d21 * e0 * np.sqrt(env_full[k]) * ek
        om_h = half_d21 * e0 * np.sqrt(env_half[k]) * ek
        om_1 = half_d21 * e0 * np.sqrt(env_full[k + 1]) * ek
        gam_0 = cgam * config.i0 * env_full[k] * a2k
        gam_h = cgam * config.i0 * env_half[k] * a2k
        gam_1 = cgam * config.i0 * env_full[k + 1] * a2k

        k1a, k1b, k1c = rhs(s11, s22, s21, om_0, gam_0)
        k2a, k2b, k2c = rhs(s11 + half_dt * k1a, s22 + half_dt * k1b,
                            s21 + half_dt * k1c, om_h, gam_h)
        k3a, k3b, k3c = rhs(s11 + half_dt * k2a, s22 + half_dt * k2b,
                            s21 + half_dt * k2c, om_h, gam_h)
        k4a, k4b, k4c = rhs(s11 + dt * k3a, s22 + dt * k3b,
                            s21 + dt * k3c, om_1, gam_1)

        s11 = s11 + sixth_dt * (k1a + 2.0 * (k2a + k3a) + k4a)
        s22 = s22 + sixth_dt * (k1b + 2.0 * (k2b + k3b) + k4b)
        s21 = s21 + sixth_dt * (k1c + 2.0 * (k2c + k3c) + k4c)

        # floor tiny negative populations produced by roundoff
        s11 = np.where((s11 < 0.0) & (s11 > -_CLAMP_TOL), 0.0, s11)
        s22 = np.where((s22 < 0.0) & (s22 > -_CLAMP_TOL), 0.0, s22)

        record(k + 1)
        if (k & 0xFF) == 0xFF and not np.all(np.isfinite(s11)):
            bad = int(np.flatnonzero(~np.isfinite(s11))[0])
            raise RuntimeError(
                f"non-finite state at t={times[k + 1]:.6g} (trajectory {bad})"
            )

    if not (np.all(np.isfinite(s11)) and np.all(np.isfinite(s22))):
        bad = int(np.flatnonzero(~np.isfinite(s11 * s22))[0])
        raise RuntimeError(f"non-finite state at end of integration (trajectory {bad})")

    series = (ser11, ser22, ser21) if keep_series else None
    return times, (sum11, sum22, sq11, sq22), (s11, s22), series


def propagate_trajectory(atom: AtomParams, field: FieldTrajectory,
                         config: FieldConfig, shape: PulseShape,
                         initial=(1.0, 0.0, 0.0)) -> TrajectoryResult:
    """Integrate one field realization from sigma = (1, 0, 0).

    The coupling is Omega(t) = d21 * sqrt(2 I(t)) * eps(t) / 2 and the
    direct width gamma(t) = gamma_per_intensity * I(t) * |eps(t)|^2, both
    instantaneous.  Deterministic runs use eps = 1.
    """
    _check_step(atom, config, field.dt)
    eps = field.samples[None, :]
    times, _, _, series = _integrate(atom, config, shape, eps, field.dt,
                                     initial=initial, keep_series=True)
    ser11, ser22, ser21 = series
    return TrajectoryResult(times=times, sigma11=ser11[0], sigma22=ser22[0],
                            sigma21=ser21[0])


def deterministic_trajectory(dt, n_steps) -> FieldTrajectory:
    """eps = 1 at every sample: the non-fluctuating drive."""
    return FieldTrajectory(dt=dt, samples=np.ones(n_steps + 1, dtype=complex),
                           model_tag="phase-diffusion")


def monte_carlo_average(atom: AtomParams, config: FieldConfig, shape: PulseShape,
                        n_traj: int, seed: int, dt=None, n_steps=None,
                        stream_indices=None, chunk=4096) -> McResult:
    """Average the per-trajectory populations over field realizations.

    Trajectories use counter-based substreams (seed, index); the reduction
    runs in trajectory-index order, so results are bit-reproducible for a
    fixed seed.  ``stream_indices`` overrides the default range(n_traj)
    (useful to extend an ensemble or to force duplicate streams in tests).
    """
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2")
    if config.model == "deterministic":
        raise ValueError("monte_carlo_average needs a stochastic field model")
    span = shape.window_end
    if dt is None:
        if n_steps is None:
            from .model import solver_context
            ctx = solver_context(atom, config.i0, config.delta, config.gamma_l)
            from .stochastic import default_dt
            dt = default_dt(config.gamma_l, ctx.kappa_tilde.real, span)
            n_steps = max(1, int(np.ceil(span / dt)))
        dt = span / n_steps
    else:
        n_steps = max(1, int(np.ceil(span / dt)))
        dt = span / n_steps
    _check_step(atom, config, dt)

    indices = list(range(n_traj)) if stream_indices is None else list(stream_indices)
    if len(indices) != n_traj:
        raise ValueError("stream_indices length must equal n_traj")

    sum11 = sum22 = sq11 = sq22 = None
    fin11 = np.empty(n_traj)
    fin22 = np.empty(n_traj)
    times = None
    for lo in range(0, n_traj, chunk):
        hi = min(lo + chunk, n_traj)
        eps = np.vstack([
            sample_ensemble(config.model, config.gamma_l, dt, n_steps, seed, 1,
                            first_index=i)
            for i in indices[lo:hi]
        ])
        try:
            times, sums, finals, _ = _integrate(atom, config, shape, eps, dt)
        except RuntimeError as exc:
            raise RuntimeError(f"trajectory block [{lo}, {hi}): {exc}") from exc
        if sum11 is None:
            sum11, sum22, sq11, sq22 = (np.zeros_like(s) for s in sums)
        sum11 += sums[0]
        sum22 += sums[1]
        sq11 += sums[2]
        sq22 += sums[3]
        fin11[lo:hi], fin22[lo:hi] = finals

    n = float(n_traj)
    mean11 = sum11 / n
    mean22 = sum22 / n
    var11 = np.maximum(sq11 / n - mean11 ** 2, 0.0) * n / (n - 1.0)
    var22 = np.maximum(sq22 / n - mean22 ** 2, 0.0) * n / (n - 1.0)
    return McResult(
        times=times,
        mean_sigma11=mean11,
        mean_sigma22=mean22,
        std_err11=np.sqrt(var11 / n),
        std_err22=np.sqrt(var22 / n),
        n_traj=n_traj,
        final_sigma11=fin11,
        final_sigma22=fin22,
    )


def dump_density_csv(result: TrajectoryResult, path):
    """Debug dump: columns (t, sigma11, sigma22, Re sigma21, Im sigma21)."""
    with open(path, "w") as fh:
        fh.write("t_au,sigma11,sigma22,re_sigma21,im_sigma21\n")
        for k in range(len(result.times)):
            fh.write(
                f"{result.times[k]:.17g},{result.sigma11[k]:.17g},"
                f"{result.sigma22[k]:.17g},{result.sigma21[k].real:.17g},"
                f"{result.sigma21[k].imag:.17g}\n"
            )
