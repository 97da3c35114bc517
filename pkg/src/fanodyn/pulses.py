"""Time-dependent intensity envelopes I(t) = I0 * envelope(t).

Conventions
-----------
* ``t_pulse`` (T) is the total duration for the square pulse and the FWHM of
  the intensity envelope for the shaped pulses (gaussian, trapezoid,
  lorentzian).
* The square pulse occupies [0, T].  Shaped pulses live in the window
  [0, 2 * window_factor * T] with the peak at t_c = window_factor * T.
* ``window_factor = 0.5`` truncates a shaped pulse to the window [0, T]
  (peak at T/2), which makes it directly comparable to a square pulse of
  the same total duration.  The default 3.0 keeps truncation losses of a
  gaussian below ~1.4e-11 of the peak.
"""

import math
from dataclasses import dataclass

import numpy as np

FOUR_LN2 = 4.0 * math.log(2.0)

PULSE_KINDS = ("square", "gaussian", "trapezoid", "lorentzian")


@dataclass(frozen=True)
class PulseShape:
    kind: str
    t_pulse: float
    ramp_fraction: float = 0.0    # trapezoid only: ramp width as fraction of T
    window_factor: float = 3.0    # shaped pulses: window half-width in units of T

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if not (self.t_pulse > 0):
            raise ValueError("t_pulse must be positive")
        if not (0.0 <= self.ramp_fraction <= 0.5):
            raise ValueError("ramp_fraction must lie in [0, 0.5]")
        if self.window_factor < 0.5:
            raise ValueError("window_factor must be >= 0.5")

    @property
    def center(self):
        """Peak time of the envelope."""
        if self.kind == "square":
            return 0.5 * self.t_pulse
        return self.window_factor * self.t_pulse

    @property
    def window_end(self):
        """End of the simulation window (time origin is the window start)."""
        if self.kind == "square":
            return self.t_pulse
        return 2.0 * self.window_factor * self.t_pulse


def envelope(shape: PulseShape, t):
    """Dimensionless envelope in [0, 1]; peak value 1 is attained.

    Accepts scalar or array time (a.u.).  Outside the simulation window the
    envelope is zero for the square and trapezoid; gaussian and lorentzian
    are evaluated from their analytic form (the solvers never look there).
    """
    t = np.asarray(t, dtype=float)
    T = shape.t_pulse
    u = t - shape.center
    if shape.kind == "square":
        out = np.where((t >= 0.0) & (t <= T), 1.0, 0.0)
    elif shape.kind == "gaussian":
        out = np.exp(-FOUR_LN2 * (u / T) ** 2)
    elif shape.kind == "lorentzian":
        out = 1.0 / (1.0 + 4.0 * (u / T) ** 2)
    else:  # trapezoid: linear ramps of width w around a flat top, FWHM = T
        w = shape.ramp_fraction * T
        half_top = 0.5 * (T - w)
        half_base = 0.5 * (T + w)
        au = np.abs(u)
        if w == 0.0:
            out = np.where(au <= half_top, 1.0, 0.0)
        else:
            out = np.clip((half_base - au) / w, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def intensity_profile(shape: PulseShape, i0: float, t):
    """Instantaneous intensity I0 * envelope(t), a.u."""
    if i0 < 0:
        raise ValueError("peak intensity must be non-negative")
    return i0 * envelope(shape, t)
