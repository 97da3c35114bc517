"""Stochastic-averaged dynamics of the driven resonance.

The averaged populations obey integro-differential equations whose memory
kernel is a single decaying exponential exp(-kappa_tilde * (t - t')), with
kappa_tilde = -i*delta + (gamma + Gamma + gamma_l)/2.  Introducing the
auxiliary variables

    y_i(t) = integral_0^t <sigma_ii(t')> exp(-kappa_tilde (t - t')) dt'

closes the system into four local ODEs:

    d<s11>/dt = -gamma(t) <s11> + d^2 I(t) * Im{ c11 y1 + c12 y2 }
    d<s22>/dt = -Gamma  <s22> - d^2 I(t) * Im{ c21 y1 + c22 y2 }
    dy_i/dt   = <s_ii> - kappa_tilde y_i

with the q-dependent coefficients from :func:`fanodyn.model.coupling_coefficients`.
The averaging is exact for the phase-diffusion field and a weak-to-moderate
field approximation for the chaotic field.

Conventions for shaped pulses: the intensity prefactor d^2 I(t) and the
direct loss gamma(t) follow the envelope at the outer time t only (no
symmetrization of the kernel), and kappa_tilde is held constant using gamma
at the pulse peak, which reproduces the constant-intensity limit exactly.

The weak-field rate equations replace the memory integrals by
<s_ii(t)> (1 - exp(-kappa_tilde t)) / kappa_tilde; with ``stationary=True``
the factor is frozen at its long-time limit 1/kappa_tilde (the golden-rule
regime).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .model import (AtomParams, FieldConfig, SolverContext,
                    coupling_coefficients, solver_context)
from .pulses import PulseShape, envelope

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


@dataclass(frozen=True)
class AveragedState:
    """Averaged populations and memory auxiliaries on a time grid."""

    times: np.ndarray
    s11: np.ndarray
    s22: np.ndarray
    y1: np.ndarray    # complex
    y2: np.ndarray


@dataclass(frozen=True)
class RateResult:
    times: np.ndarray
    s11: np.ndarray
    s22: np.ndarray


def _context_for(atom, config) -> SolverContext:
    return solver_context(atom, config.i0, config.delta, config.gamma_l)


def build_generator(atom: AtomParams, context: SolverContext, i0: float,
                    include_sin_terms: bool = True) -> np.ndarray:
    """Constant-coefficient generator of (s11, s22, Re y1, Im y1, Re y2, Im y2).

    Only valid for constant intensity.  The spectral abscissa is checked to
    be non-positive (within roundoff) as a postcondition; a violation means
    inconsistent parameters and raises a warning, not an error.
    """
    c11, c12, c21, c22 = coupling_coefficients(atom.q, include_sin_terms)
    A = atom.d21 ** 2 * i0
    a = context.kappa_tilde.real
    delta = -context.kappa_tilde.imag
    gamma = context.gamma

    # Im{c * y} = Im(c) Re(y) + Re(c) Im(y)
    M = np.zeros((6, 6))
    M[0, 0] = -gamma
    M[0, 2] = A * c11.imag
    M[0, 3] = A * c11.real
    M[0, 4] = A * c12.imag
    M[0, 5] = A * c12.real
    M[1, 1] = -atom.big_gamma
    M[1, 2] = -A * c21.imag
    M[1, 3] = -A * c21.real
    M[1, 4] = -A * c22.imag
    M[1, 5] = -A * c22.real
    M[2, 0] = 1.0
    M[2, 2] = -a
    M[2, 3] = -delta
    M[3, 2] = delta
    M[3, 3] = -a
    M[4, 1] = 1.0
    M[4, 4] = -a
    M[4, 5] = -delta
    M[5, 4] = delta
    M[5, 5] = -a

    abscissa = np.max(np.linalg.eigvals(M).real)
    if abscissa > 1e-10:
        warnings.warn(f"generator spectral abscissa {abscissa:.3e} > 0", stacklevel=2)
    return M


def matexp_populations(atom: AtomParams, context: SolverContext, i0: float,
                       t: float, initial=(1.0, 0.0)):
    """Constant-intensity populations via the matrix exponential of the generator."""
    M = build_generator(atom, context, i0)
    u0 = np.array([initial[0], initial[1], 0.0, 0.0, 0.0, 0.0])
    u = expm(M * t) @ u0
    return u[0], u[1]


def _default_grid(shape, n=601):
    return np.linspace(0.0, shape.window_end, n)


def propagate_averaged(atom: AtomParams, config: FieldConfig, shape: PulseShape,
                       t_grid=None, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> AveragedState:
    """Integrate the closed auxiliary-variable system from (1, 0, 0, 0)."""
    ctx = _context_for(atom, config)
    if not (ctx.kappa_tilde.real > 0):
        raise ValueError("memory kernel must decay: need Re(kappa_tilde) > 0")
    if t_grid is None:
        t_grid = _default_grid(shape)
    t_grid = np.asarray(t_grid, dtype=float)

    c11, c12, c21, c22 = coupling_coefficients(atom.q)
    A_pk = atom.d21 ** 2 * config.i0
    gam_pk = ctx.gamma
    big_gamma = atom.big_gamma
    a = ctx.kappa_tilde.real
    delta = -ctx.kappa_tilde.imag

    def rhs(t, u):
        s1, s2, y1r, y1i, y2r, y2i = u
        e = envelope(shape, t)
        A = A_pk * e
        b1 = c11.imag * y1r + c11.real * y1i + c12.imag * y2r + c12.real * y2i
        b2 = c21.imag * y1r + c21.real * y1i + c22.imag * y2r + c22.real * y2i
        return [
            -gam_pk * e * s1 + A * b1,
            -big_gamma * s2 - A * b2,
            s1 - a * y1r - delta * y1i,
            delta * y1r - a * y1i,
            s2 - a * y2r - delta * y2i,
            delta * y2r - a * y2i,
        ]

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    method="RK45", t_eval=t_grid, rtol=rtol, atol=atol,
                    max_step=shape.t_pulse / 4.0)
    if not sol.success:
        raise RuntimeError(f"averaged propagation failed: {sol.message}")
    return AveragedState(
        times=sol.t,
        s11=sol.y[0],
        s22=sol.y[1],
        y1=sol.y[2] + 1j * sol.y[3],
        y2=sol.y[4] + 1j * sol.y[5],
    )


def propagate_rate_equations(atom: AtomParams, config: FieldConfig, shape: PulseShape,
                             t_grid=None, stationary=False,
                             rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> RateResult:
    """Integrate the weak-field rate equations for the populations.

    Valid while the Rabi frequency stays below or comparable to the
    autoionization width; beyond that a warning is emitted and the result
    is qualitative only.
    """
    ctx = _context_for(atom, config)
    if not (ctx.kappa_tilde.real > 0):
        raise ValueError("memory kernel must decay: need Re(kappa_tilde) > 0")
    if ctx.omega_rabi > atom.big_gamma:
        warnings.warn(
            "rate equations outside their regime: Rabi frequency "
            f"{ctx.omega_rabi:.3e} exceeds the autoionization width "
            f"{atom.big_gamma:.3e}", stacklevel=2)
    if t_grid is None:
        t_grid = _default_grid(shape)
    t_grid = np.asarray(t_grid, dtype=float)

    c11, c12, c21, c22 = coupling_coefficients(atom.q)
    A_pk = atom.d21 ** 2 * config.i0
    gam_pk = ctx.gamma
    big_gamma = atom.big_gamma
    kt = ctx.kappa_tilde

    def rhs(t, u):
        s1, s2 = u
        e = envelope(shape, t)
        f = 1.0 / kt if stationary else -np.expm1(-kt * t) / kt
        b1 = (f * (c11 * s1 + c12 * s2)).imag
        b2 = (f * (c21 * s1 + c22 * s2)).imag
        return [-gam_pk * e * s1 + A_pk * e * b1,
                -big_gamma * s2 - A_pk * e * b2]

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), [1.0, 0.0], method="RK45",
                    t_eval=t_grid, rtol=rtol, atol=atol,
                    max_step=shape.t_pulse / 4.0)
    if not sol.success:
        raise RuntimeError(f"rate-equation propagation failed: {sol.message}")
    return RateResult(times=sol.t, s11=sol.y[0], s22=sol.y[1])
