"""Physical parameters and derived couplings of the two-level-plus-continuum system.

The model couples a ground state to an isolated autoionizing state (AIS)
embedded in a flat continuum.  Three rates govern the dynamics: the
autoionization width ``big_gamma`` (Gamma), the intensity-proportional
direct-ionization width ``gamma = gamma_per_intensity * I`` and the field
bandwidth ``gamma_l``.  The Fano asymmetry parameter ``q`` encodes the
interference between the direct and resonant ionization paths.
"""

import cmath
import math
import warnings
from dataclasses import dataclass

from .pulses import PulseShape
from .units import BOHR_CM2, field_amplitude_from_intensity

FIELD_MODELS = ("deterministic", "phase-diffusion", "chaotic")

# Adopted 2s2p resonance energy.  The commonly quoted eV value rounds to a
# different a.u. figure; the a.u. value is taken as authoritative here.
HELIUM_2S2P_ENERGY_AU = 2.211

# He+ (1s) single-photon ionization cross section near the resonance, cm^2.
HELIUM_ION_CROSS_SECTION_CM2 = 1.2e-18


@dataclass(frozen=True)
class AtomParams:
    """Atomic constants of the resonance, all in a.u."""

    q: float                    # Fano asymmetry parameter
    big_gamma: float            # autoionization width Gamma
    d21: float                  # dipole matrix element ground -> discrete part
    gamma_per_intensity: float  # gamma = gamma_per_intensity * I
    omega_ag: float             # resonance energy
    sigma_di: float             # ion photoionization cross section (area)

    def __post_init__(self):
        if not (self.big_gamma > 0):
            raise ValueError("big_gamma must be positive")
        if not (self.d21 > 0):
            raise ValueError("d21 must be positive")
        if self.gamma_per_intensity < 0:
            raise ValueError("gamma_per_intensity must be non-negative")
        if self.sigma_di < 0:
            raise ValueError("sigma_di must be non-negative")
        if self.q == 0 or not math.isfinite(self.q):
            raise ValueError("q must be finite and nonzero")


def helium_2s2p_params() -> AtomParams:
    """Tabulated constants of the He 2s2p resonance (a.u.)."""
    return AtomParams(
        q=-2.79,
        big_gamma=1.37e-3,
        d21=0.025,
        gamma_per_intensity=0.1775,
        omega_ag=HELIUM_2S2P_ENERGY_AU,
        sigma_di=HELIUM_ION_CROSS_SECTION_CM2 / BOHR_CM2,
    )


@dataclass(frozen=True)
class FieldConfig:
    """Drive description: peak intensity, bandwidth, detuning, pulse, model."""

    i0: float                 # peak intensity (a.u.)
    gamma_l: float            # field bandwidth (a.u.)
    delta: float              # detuning = drive frequency - resonance (a.u.)
    pulse: PulseShape
    t_pulse: float            # duration parameter T (a.u.), mirrors pulse.t_pulse
    model: str = "deterministic"

    def __post_init__(self):
        if self.i0 < 0:
            raise ValueError("i0 must be non-negative")
        if self.gamma_l < 0:
            raise ValueError("gamma_l must be non-negative")
        if not (self.t_pulse > 0):
            raise ValueError("t_pulse must be positive")
        if self.model not in FIELD_MODELS:
            raise ValueError(f"unknown field model {self.model!r}")
        if abs(self.t_pulse - self.pulse.t_pulse) > 1e-12 * self.t_pulse:
            raise ValueError("t_pulse disagrees with pulse.t_pulse")

    @classmethod
    def create(cls, i0, gamma_l, delta, pulse_kind="square", t_pulse=1.0,
               model="deterministic", ramp_fraction=0.0, window_factor=3.0):
        shape = PulseShape(pulse_kind, t_pulse, ramp_fraction, window_factor)
        return cls(i0=i0, gamma_l=gamma_l, delta=delta, pulse=shape,
                   t_pulse=t_pulse, model=model)


@dataclass(frozen=True)
class SolverContext:
    """Compressed notation shared by the averaged solvers.

    kappa       = -i*delta + (gamma + Gamma)/2
    kappa_tilde = kappa + gamma_l/2
    """

    kappa: complex
    kappa_tilde: complex
    omega_rabi: float   # Rabi frequency at the peak field amplitude
    gamma: float        # direct ionization width at peak intensity

    def __post_init__(self):
        if not (self.kappa_tilde.real >= self.kappa.real > 0):
            raise ValueError("need Re(kappa_tilde) >= Re(kappa) > 0")


def rabi_frequency(atom: AtomParams, e0: float) -> float:
    """Omega = d21 * E0 / 2 for field amplitude e0 >= 0 (a.u.)."""
    return 0.5 * atom.d21 * e0


def ionization_width(atom: AtomParams, i: float) -> float:
    """Direct single-photon ionization width gamma at intensity i (a.u.)."""
    return atom.gamma_per_intensity * i


def solver_context(atom: AtomParams, i0: float, delta: float, gamma_l: float) -> SolverContext:
    gamma = ionization_width(atom, i0)
    kappa = complex(0.5 * (gamma + atom.big_gamma), -delta)
    return SolverContext(
        kappa=kappa,
        kappa_tilde=kappa + 0.5 * gamma_l,
        omega_rabi=rabi_frequency(atom, field_amplitude_from_intensity(i0)),
        gamma=gamma,
    )


def check_fano_relation(atom: AtomParams, i: float, warn_tol: float = 0.05) -> float:
    """Relative deviation of 4*Omega^2 from q^2*gamma*Gamma at intensity i > 0.

    Both sides are linear in intensity, so the deviation is intensity
    independent.  Tabulated parameter sets need not satisfy the relation
    exactly; a deviation above ``warn_tol`` raises a warning, never an error.
    """
    omega = rabi_frequency(atom, field_amplitude_from_intensity(i))
    lhs = 4.0 * omega * omega
    rhs = atom.q ** 2 * ionization_width(atom, i) * atom.big_gamma
    dev = abs(lhs - rhs) / rhs
    if dev > warn_tol:
        warnings.warn(
            f"4*Omega^2 deviates from q^2*gamma*Gamma by {dev:.3f} "
            "(tabulated parameters are used as-is)",
            stacklevel=2,
        )
    return dev


def coupling_coefficients(q: float, include_sin_terms: bool = True):
    """Complex coefficients of the memory terms in the averaged population equations.

    Returns (c11, c12, c21, c22) with
        c11 = -i (1 - i/q)^2          c12 = +i (1 + 1/q^2)
        c21 = -i (1 + 1/q^2)          c22 = +i (1 + i/q)^2
    so that d<s11>/dt gains +d^2 I Im{c11 y1 + c12 y2} and
    d<s22>/dt gains -d^2 I Im{c21 y1 + c22 y2}.

    With ``include_sin_terms`` False the real parts (the 2/q dispersion
    terms) are dropped, which makes the ionization profile symmetric in the
    detuning; diagnostic use only.
    """
    iq2 = 1.0 / (q * q)
    c11 = -1j * (1.0 - 1j / q) ** 2
    c12 = 1j * (1.0 + iq2)
    c21 = -1j * (1.0 + iq2)
    c22 = 1j * (1.0 + 1j / q) ** 2
    if not include_sin_terms:
        c11 = 1j * c11.imag
        c22 = 1j * c22.imag
    return c11, c12, c21, c22
