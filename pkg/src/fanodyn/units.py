"""Conversions between laboratory units (eV, fs, W/cm^2) and atomic units.

Atomic (Hartree) units are the internal unit system everywhere in this
package; conversions happen only at input/output boundaries such as the CLI.
"""

import math
from dataclasses import dataclass

# CODATA 2018, truncated; figure-level work here needs ~3 digits.
HARTREE_EV = 27.211386            # 1 hartree in eV
AU_TIME_FS = 0.02418884           # 1 a.u. of time in fs
AU_INTENSITY_WCM2 = 3.50945e16    # 1 a.u. of intensity in W/cm^2
BOHR_CM = 5.2917721e-9            # Bohr radius in cm
BOHR_CM2 = BOHR_CM * BOHR_CM      # a.u. of cross section in cm^2

UNIT_KINDS = ("energy", "time", "intensity", "field-amplitude", "area")


@dataclass(frozen=True)
class Quantity:
    """A value tagged with its physical kind, validated on construction."""

    value: float
    kind: str

    def __post_init__(self):
        if self.kind not in UNIT_KINDS:
            raise ValueError(f"unknown unit kind {self.kind!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"{self.kind} value must be finite")
        if self.kind in ("intensity", "time") and self.value < 0:
            raise ValueError(f"{self.kind} value must be non-negative")


def energy_ev_to_au(e):
    """Photon/level energy: eV -> hartree."""
    return e / HARTREE_EV


def energy_au_to_ev(e):
    return e * HARTREE_EV


def time_fs_to_au(t):
    """Time: femtoseconds -> a.u. (t >= 0)."""
    return t / AU_TIME_FS


def time_au_to_fs(t):
    return t * AU_TIME_FS


def intensity_to_au(i):
    """Intensity: W/cm^2 -> a.u. (i >= 0)."""
    return i / AU_INTENSITY_WCM2


def intensity_au_to_wcm2(i):
    return i * AU_INTENSITY_WCM2


def field_amplitude_from_intensity(i):
    """Field amplitude E0 = sqrt(2 I), the convention I = |E|^2 / 2 (a.u. in, a.u. out)."""
    return math.sqrt(2.0 * i)


def intensity_from_field_amplitude(e0):
    return 0.5 * e0 * e0


def area_cm2_to_au(a):
    """Cross section: cm^2 -> a.u."""
    return a / BOHR_CM2
