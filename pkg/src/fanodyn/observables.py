"""Measured quantities: ionization probability, the ion-depletion correction,
detuning scans and profile metrics.

After the pulse ends at T the surviving excited population autoionizes with
rate Gamma, so the ionization probability observed at t > T is

    P_ion(t) = 1 - s11(T) - s22(T) * exp(-Gamma (t - T)),

whose t -> infinity limit 1 - s11(T) is the default reported value of every
scan.  When ions produced by autoionization absorb a further photon (rate
gamma_DI = sigma_DI * I / omega), the neutral-channel ionization count is
corrected by

    dP_corr/dt = dP_ion/dt - P_corr * gamma_DI(t),

integrated with a trapezoidal scheme on the solver grid.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .decorrelated import propagate_averaged, propagate_rate_equations
from .laplace import solve_populations
from .model import AtomParams, FieldConfig, coupling_coefficients, solver_context
from .propagator import monte_carlo_average
from .pulses import PulseShape, envelope

SOLVER_TAGS = ("laplace", "decorrelated", "rate", "mc")

_FLAT_CONTRAST = 1e-3


@dataclass(frozen=True)
class ProfileScan:
    """Ionization probability over a detuning grid."""

    detunings: np.ndarray
    p_ion: np.ndarray
    solver: str
    config: dict
    p_corrected: np.ndarray | None = None
    std_err: np.ndarray | None = None
    failures: list = field(default_factory=list)

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        if d.size >= 2 and not np.all(np.diff(d) > 0):
            raise ValueError("detuning grid must be strictly increasing")


@dataclass(frozen=True)
class ProfileMetrics:
    """Peak/minimum locations, FWHM and contrast of one profile.

    Positions are None when the corresponding extremum is not an interior
    point of the scan; fwhm is None for flat or structureless profiles.
    """

    peak_position: float | None
    min_position: float | None
    fwhm: float | None
    contrast: float
    min_value: float


def ionization_probability(s11_T, s22_T, t, t_end, big_gamma):
    """Ionization probability at observation time t >= t_end (pulse end)."""
    if np.any(np.asarray(t) < t_end):
        raise ValueError("observation time precedes the pulse end")
    return 1.0 - s11_T - s22_T * np.exp(-big_gamma * (np.asarray(t) - t_end))


def asymptotic_ionization(s11_T):
    """t -> infinity limit: the excited tail has fully autoionized."""
    return 1.0 - s11_T


def gamma_di(atom: AtomParams, i: float, omega: float) -> float:
    """Ion depletion rate: cross section times photon flux I / omega."""
    if not (omega > 0):
        raise ValueError("photon energy must be positive")
    return atom.sigma_di * i / omega


def double_ionization_correct(times, p_ion, gamma_di_series):
    """Apply the ion-depletion correction on an aligned time grid.

    Integrates dD/dt = gamma_DI (P_ion - D) for the deficit D = P_ion - P_corr
    with a trapezoidal scheme, so gamma_DI = 0 returns P_ion unchanged, bit
    for bit.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(p_ion, dtype=float)
    g = np.asarray(gamma_di_series, dtype=float)
    if not (t.shape == p.shape == g.shape):
        raise ValueError("grid mismatch between times, p_ion and gamma_di")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if np.any(np.diff(p) < -1e-8):
        raise ValueError("p_ion must be non-decreasing")
    deficit = np.zeros_like(p)
    for k in range(len(t) - 1):
        h = t[k + 1] - t[k]
        num = deficit[k] * (1.0 - 0.5 * h * g[k]) + 0.5 * h * (
            g[k] * p[k] + g[k + 1] * p[k + 1])
        deficit[k + 1] = num / (1.0 + 0.5 * h * g[k + 1])
    return p - deficit


def fano_rate_reference(atom: AtomParams, i: float, delta: float,
                        gamma_l: float) -> float:
    """Stationary weak-field ionization rate of the ground state.

    rate = gamma + d21^2 I Im{ i (1 - i/q)^2 / kappa_tilde }; the analytic
    oracle for the perturbative regime.  Its minimum over detuning sits at
    the reduced detuning 2*delta/Gamma = -q.
    """
    gamma = atom.gamma_per_intensity * i
    kt = complex(0.5 * (gamma + atom.big_gamma + gamma_l), -delta)
    c11, _, _, _ = coupling_coefficients(atom.q)
    return gamma + atom.d21 ** 2 * i * (-c11 / kt).imag


def _series_for(atom, config, shape, solver, n_traj, seed, series_points,
                rate_stationary):
    """(times, s11_series, s22_series) over the pulse window for one detuning."""
    t_end = shape.window_end
    grid = np.linspace(0.0, t_end, series_points)
    if solver == "laplace":
        if shape.kind != "square":
            raise ValueError("the Laplace route requires constant intensity (square pulse)")
        ctx = solver_context(atom, config.i0, config.delta, config.gamma_l)
        sol = solve_populations(atom, ctx, config.i0)
        s11, s22 = sol.populations_at(grid)
        return grid, s11, s22, None
    if solver == "decorrelated":
        res = propagate_averaged(atom, config, shape, t_grid=grid)
        return grid, res.s11, res.s22, None
    if solver == "rate":
        res = propagate_rate_equations(atom, config, shape, t_grid=grid,
                                       stationary=rate_stationary)
        return grid, res.s11, res.s22, None
    if solver == "mc":
        res = monte_carlo_average(atom, config, shape, n_traj=n_traj, seed=seed)
        se = res.final_sigma11.std(ddof=1) / math.sqrt(res.n_traj)
        return res.times, res.mean_sigma11, res.mean_sigma22, se
    raise ValueError(f"unknown solver {solver!r}")


def scan_profile(atom: AtomParams, config_template: FieldConfig, shape: PulseShape,
                 delta_grid, solver="laplace", corrected=False,
                 n_traj=400, seed=0, series_points=801,
                 rate_stationary=False) -> ProfileScan:
    """Run the selected solver per detuning and report asymptotic P_ion.

    Solver failures are recorded per grid point (NaN in the profile) and the
    scan continues.
    """
    if solver not in SOLVER_TAGS:
        raise ValueError(f"unknown solver {solver!r}")
    delta_grid = np.asarray(delta_grid, dtype=float)
    p = np.full(delta_grid.shape, np.nan)
    pc = np.full(delta_grid.shape, np.nan) if corrected else None
    se = np.full(delta_grid.shape, np.nan) if solver == "mc" else None
    failures = []
    for k, delta in enumerate(delta_grid):
        config = replace(config_template, delta=float(delta))
        try:
            times, s11, s22, err = _series_for(
                atom, config, shape, solver, n_traj, seed, series_points,
                rate_stationary)
        except (ValueError, RuntimeError) as exc:
            failures.append((k, str(exc)))
            continue
        p[k] = asymptotic_ionization(s11[-1])
        if err is not None:
            se[k] = err
        if corrected:
            omega = atom.omega_ag + float(delta)
            g = gamma_di(atom, config.i0, omega) * envelope(shape, times)
            p_t = 1.0 - s11 - s22
            p_corr = double_ionization_correct(times, p_t, g)
            deficit_end = p_t[-1] - p_corr[-1]
            pc[k] = p[k] - deficit_end
    snapshot = dict(config_template.__dict__)
    snapshot["pulse"] = {
        "kind": shape.kind, "t_pulse": shape.t_pulse,
        "ramp_fraction": shape.ramp_fraction, "window_factor": shape.window_factor,
    }
    snapshot["solver"] = solver
    return ProfileScan(detunings=delta_grid, p_ion=p, solver=solver,
                       config=snapshot, p_corrected=pc, std_err=se,
                       failures=failures)


def _refine_extremum(x, y, k):
    """Parabolic vertex through the three points around index k."""
    if k == 0 or k == len(x) - 1:
        return x[k]
    x0, x1, x2 = x[k - 1], x[k], x[k + 1]
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    denom = (y0 - 2.0 * y1 + y2)
    if denom == 0.0:
        return x1
    h = 0.5 * (x2 - x0)
    return x1 + 0.5 * h * (y0 - y2) / denom


def _half_crossings(x, y, k_peak, level):
    left = right = None
    for k in range(k_peak, 0, -1):
        if (y[k - 1] - level) * (y[k] - level) <= 0 and y[k] != y[k - 1]:
            left = x[k - 1] + (level - y[k - 1]) / (y[k] - y[k - 1]) * (x[k] - x[k - 1])
            break
    for k in range(k_peak, len(x) - 1):
        if (y[k + 1] - level) * (y[k] - level) <= 0 and y[k] != y[k + 1]:
            right = x[k] + (y[k] - level) / (y[k] - y[k + 1]) * (x[k + 1] - x[k])
            break
    return left, right


def profile_metrics(scan: ProfileScan) -> ProfileMetrics:
    """Quantify one profile: refined extremum positions, FWHM, contrast."""
    mask = np.isfinite(scan.p_ion)
    x = np.asarray(scan.detunings, dtype=float)[mask]
    y = np.asarray(scan.p_ion, dtype=float)[mask]
    if y.size < 5:
        raise ValueError("need at least 5 finite scan points")
    k_max = int(np.argmax(y))
    k_min = int(np.argmin(y))
    contrast = float((y[k_max] - y[k_min]) / y[k_max]) if y[k_max] > 0 else 0.0
    min_value = float(y[k_min])

    interior_max = 0 < k_max < y.size - 1
    interior_min = 0 < k_min < y.size - 1
    peak_position = float(_refine_extremum(x, y, k_max)) if interior_max else None
    min_position = float(_refine_extremum(x, y, k_min)) if interior_min else None

    fwhm = None
    if interior_max and contrast >= _FLAT_CONTRAST:
        baseline = 0.5 * (float(np.mean(y[:3])) + float(np.mean(y[-3:])))
        level = baseline + 0.5 * (y[k_max] - baseline)
        left, right = _half_crossings(x, y, k_max, level)
        if left is not None and right is not None and right > left:
            fwhm = float(right - left)
    return ProfileMetrics(peak_position=peak_position, min_position=min_position,
                          fwhm=fwhm, contrast=contrast, min_value=min_value)
