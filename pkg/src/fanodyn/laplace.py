"""Exact constant-intensity solution via Laplace-domain rational functions.

For a square pulse the averaged populations satisfy a pair of convolution
equations whose Laplace transforms F1(s), F2(s) solve a 2x2 linear system
with the kernel transforms

    G1(s) = (s + a) / [(s + a)^2 + delta^2],
    G2(s) = delta   / [(s + a)^2 + delta^2],      a = (gamma + Gamma + gamma_l)/2.

Clearing denominators with D(s) = (s + a)^2 + delta^2 and restoring the
initial-value terms s F_i(s) - sigma_ii(0) gives

    F1 = D (s11_0 N2 + s22_0 M) / (N1 N2 - M^2),
    F2 = D (s22_0 N1 + s11_0 M) / (N1 N2 - M^2),

with the cubic polynomials

    N1 = (s + gamma) D + A [(1 - 1/q^2)(s + a) + (2/q) delta],
    N2 = (s + Gamma) D + A [(1 - 1/q^2)(s + a) - (2/q) delta],
    M  = A (1 + 1/q^2)(s + a),          A = d21^2 I0.

At delta = 0 the factor (s + a) is common to N1, N2, M and one copy of D,
and the system reduces to a quartic denominator; building the reduced form
directly avoids a spurious double root.  Inversion is by partial fractions
over the numerically located denominator roots (companion-matrix
eigenvalues, with the variable scaled by a for conditioning); populations
are sums of residues times exponentials.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import AtomParams, SolverContext

_DEGENERATE_REL_DIST = 1e-9
_IMAG_LEAK_TOL = 1e-9


class DegenerateRootsError(RuntimeError):
    """Denominator roots too close for a stable partial-fraction expansion."""


def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(np.abs(c) > 0)
    if nz.size == 0:
        return np.zeros(1)
    return c[nz[0]:]


@dataclass(frozen=True)
class RationalPair:
    """Strictly proper rational transforms of the two populations."""

    f1_num: np.ndarray
    f2_num: np.ndarray
    common_den: np.ndarray

    def __post_init__(self):
        den = _trim(self.common_den)
        object.__setattr__(self, "common_den", den)
        object.__setattr__(self, "f1_num", _trim(self.f1_num))
        object.__setattr__(self, "f2_num", _trim(self.f2_num))
        if den.size == 1 and den[0] == 0.0:
            raise ValueError("degenerate system: zero denominator polynomial")
        if len(den) - 1 > 6:
            raise ValueError("denominator degree exceeds 6")
        for num in (self.f1_num, self.f2_num):
            if np.any(num) and len(num) >= len(den):
                raise ValueError("transforms must be strictly proper")

    def evaluate(self, s):
        """(F1(s), F2(s)) at complex s."""
        return (np.polyval(self.f1_num, s) / np.polyval(self.common_den, s),
                np.polyval(self.f2_num, s) / np.polyval(self.common_den, s))


@dataclass(frozen=True)
class ExponentialSum:
    """population(t) = sum_k residues[k] * exp(poles[k] * t)."""

    poles: np.ndarray
    residues: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val = np.sum(self.residues * np.exp(np.outer(t, self.poles)), axis=1)
        if t.ndim == 0:
            return complex(val[0])
        return val


def solve_sdomain(atom: AtomParams, context: SolverContext, i0: float,
                  initial=(1.0, 0.0)) -> RationalPair:
    """Build F1(s), F2(s) for constant intensity i0 from the given initial populations."""
    if not (context.kappa_tilde.real > 0):
        raise ValueError("need Re(kappa_tilde) > 0")
    a = context.kappa_tilde.real
    delta = -context.kappa_tilde.imag
    gamma = context.gamma
    big_gamma = atom.big_gamma
    A = atom.d21 ** 2 * i0
    iq2 = 1.0 / atom.q ** 2
    c_cos = A * (1.0 - iq2)
    c_sin = A * (2.0 / atom.q)
    m_coef = A * (1.0 + iq2)
    s11_0, s22_0 = float(initial[0]), float(initial[1])

    if delta == 0.0:
        # shared factor (s + a) divided out of N1, N2, M and one copy of D
        n1 = np.polyadd(np.polymul([1.0, gamma], [1.0, a]), [c_cos])
        n2 = np.polyadd(np.polymul([1.0, big_gamma], [1.0, a]), [c_cos])
        m = np.array([m_coef])
        den = np.polysub(np.polymul(n1, n2), np.polymul(m, m))
        f1 = np.polymul([1.0, a], np.polyadd(s11_0 * n2, s22_0 * m))
        f2 = np.polymul([1.0, a], np.polyadd(s22_0 * n1, s11_0 * m))
        return RationalPair(f1_num=f1, f2_num=f2, common_den=den)

    D = np.array([1.0, 2.0 * a, a * a + delta * delta])
    n1 = np.polyadd(np.polymul([1.0, gamma], D),
                    [c_cos, c_cos * a + c_sin * delta])
    n2 = np.polyadd(np.polymul([1.0, big_gamma], D),
                    [c_cos, c_cos * a - c_sin * delta])
    m = np.array([m_coef, m_coef * a])
    den = np.polysub(np.polymul(n1, n2), np.polymul(m, m))
    f1 = np.polymul(D, np.polyadd(s11_0 * n2, s22_0 * m))
    f2 = np.polymul(D, np.polyadd(s22_0 * n1, s11_0 * m))
    return RationalPair(f1_num=f1, f2_num=f2, common_den=den)


def _scaled_roots(den, scale):
    deg = len(den) - 1
    powers = scale ** (deg - np.arange(deg + 1))
    den_scaled = den * powers
    return np.roots(den_scaled / den_scaled[0]) * scale


def invert_partial_fractions(pair: RationalPair, scale=None):
    """Partial-fraction inversion: one ExponentialSum per population.

    Raises DegenerateRootsError when two denominator roots nearly coincide
    (relative distance below 1e-9); callers fall back to the
    matrix-exponential route in that case.
    """
    den = pair.common_den
    if len(den) == 1:
        raise ValueError("constant denominator has no poles")
    if scale is None:
        scale = max(np.abs(den[1] / den[0]), 1e-30)
    roots = _scaled_roots(den, scale)
    radius = np.max(np.abs(roots)) if roots.size else 0.0
    if roots.size > 1:
        dists = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(dists, np.inf)
        if np.min(dists) < _DEGENERATE_REL_DIST * max(radius, 1e-30):
            raise DegenerateRootsError(
                f"nearly repeated poles (min separation {np.min(dists):.3e})")
    dden = np.polyder(den)
    dvals = np.polyval(dden, roots)
    r1 = np.polyval(pair.f1_num, roots) / dvals
    r2 = np.polyval(pair.f2_num, roots) / dvals
    return (ExponentialSum(poles=roots, residues=r1),
            ExponentialSum(poles=roots, residues=r2))


def populations_at(sums, t):
    """Evaluate an (s11, s22) ExponentialSum pair at time(s) t >= 0.

    The residue sums of a real population come in conjugate pairs; the
    imaginary leakage is checked and discarded.
    """
    es1, es2 = sums
    v1 = np.asarray(es1(t))
    v2 = np.asarray(es2(t))
    leak = max(np.max(np.abs(v1.imag), initial=0.0),
               np.max(np.abs(v2.imag), initial=0.0))
    if leak > _IMAG_LEAK_TOL:
        raise RuntimeError(f"imaginary residue leakage {leak:.3e}")
    if v1.ndim == 0:
        return float(v1.real), float(v2.real)
    return v1.real, v2.real


@dataclass(frozen=True)
class LaplaceSolution:
    """Constant-intensity population history, evaluable at any time.

    ``method`` is "partial-fractions" normally, or "matrix-exponential"
    when the pole configuration was too degenerate to invert stably.
    """

    method: str
    sums: tuple | None = None
    generator: np.ndarray | None = None
    initial: tuple = (1.0, 0.0)

    def populations_at(self, t):
        if self.method == "partial-fractions":
            return populations_at(self.sums, t)
        u0 = np.array([self.initial[0], self.initial[1], 0.0, 0.0, 0.0, 0.0])
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([(expm(self.generator * tk) @ u0)[:2] for tk in t_arr])
        if np.ndim(t) == 0:
            return float(out[0, 0]), float(out[0, 1])
        return out[:, 0], out[:, 1]

    @property
    def poles(self):
        if self.method != "partial-fractions":
            return None
        return self.sums[0].poles


def solve_populations(atom: AtomParams, context: SolverContext, i0: float,
                      initial=(1.0, 0.0)) -> LaplaceSolution:
    """Full pipeline with the degenerate-pole fallback."""
    pair = solve_sdomain(atom, context, i0, initial)
    try:
        sums = invert_partial_fractions(pair, scale=context.kappa_tilde.real)
        return LaplaceSolution(method="partial-fractions", sums=sums, initial=initial)
    except DegenerateRootsError as exc:
        warnings.warn(f"{exc}; falling back to the matrix-exponential route",
                      stacklevel=2)
        from .decorrelated import build_generator
        M = build_generator(atom, context, i0)
        return LaplaceSolution(method="matrix-exponential", generator=M,
                               initial=initial)
