"""fanodyn: ionization of a driven isolated autoionizing resonance.

Simulates the ionization profile of a two-level-plus-continuum atom (the
helium 2s2p resonance as the reference system) driven by intense,
finite-bandwidth, stochastically fluctuating pulses, with four
cross-validating solution routes: per-trajectory Monte Carlo, the
decorrelated memory-kernel system, weak-field rate equations, and the exact
constant-intensity Laplace solution.
"""

from .model import (AtomParams, FieldConfig, SolverContext, check_fano_relation,
                    helium_2s2p_params, ionization_width, rabi_frequency,
                    solver_context)
from .pulses import PulseShape, envelope, intensity_profile
from .stochastic import (CorrelationEstimate, FieldTrajectory,
                         estimate_correlation, estimate_moment_ratio,
                         sample_chaotic, sample_phase_diffusion)
from .propagator import (DensityState, McResult, TrajectoryResult,
                         deterministic_trajectory, monte_carlo_average,
                         propagate_trajectory)
from .decorrelated import (AveragedState, RateResult, build_generator,
                           matexp_populations, propagate_averaged,
                           propagate_rate_equations)
from .laplace import (DegenerateRootsError, ExponentialSum, LaplaceSolution,
                      RationalPair, invert_partial_fractions, populations_at,
                      solve_populations, solve_sdomain)
from .observables import (ProfileMetrics, ProfileScan, asymptotic_ionization,
                          double_ionization_correct, fano_rate_reference,
                          gamma_di, ionization_probability, profile_metrics,
                          scan_profile)

__version__ = "0.1.0"

__all__ = [
    "AtomParams", "FieldConfig", "SolverContext", "PulseShape",
    "FieldTrajectory", "CorrelationEstimate", "DensityState", "McResult",
    "TrajectoryResult", "AveragedState", "RateResult", "RationalPair",
    "ExponentialSum", "LaplaceSolution", "DegenerateRootsError",
    "ProfileScan", "ProfileMetrics",
    "helium_2s2p_params", "rabi_frequency", "ionization_width",
    "check_fano_relation", "solver_context", "envelope", "intensity_profile",
    "sample_phase_diffusion", "sample_chaotic", "estimate_correlation",
    "estimate_moment_ratio", "propagate_trajectory", "monte_carlo_average",
    "deterministic_trajectory", "propagate_averaged",
    "propagate_rate_equations", "build_generator", "matexp_populations",
    "solve_sdomain", "invert_partial_fractions", "populations_at",
    "solve_populations", "ionization_probability", "asymptotic_ionization",
    "gamma_di", "double_ionization_correct", "fano_rate_reference",
    "scan_profile", "profile_metrics",
]
