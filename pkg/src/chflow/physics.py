"""Double-well potential, transition profile, mobilities and coefficient algebra.

The fixed smooth double well is W(s) = s^2 (1-s)^2 / 2, minimized at the pure
phases 0 and 1 and symmetric about s = 1/2.  Its 1D transition layer is the
profile q solving q' = -sqrt(2 W(q)), explicitly q(z) = (1 - tanh(z/2)) / 2.

Two mobility families drive the flows:

* ``mch``:   M(s) = 36 * 2 W(s), degenerate at the pure phases.  The factor
  36 = 1/c_N^2 normalizes the sharp-interface velocity so both models limit
  onto the same surface-diffusion law.
* ``nmnch``: M(s) = 2 W(s) + gamma * eps^2 (smoothed, strictly positive) with
  the metric mobility N(s) = 1 / sqrt(M(s)).  g(s) := 1/N(s) = sqrt(M(s)) is
  finite everywhere, symmetric under s -> 1-s, and with the unsmoothed M the
  key identity g(q(z)) = -q'(z) holds pointwise.

Surface tensions are additive (sigma_ij = sigma_i + sigma_j), mobilities
harmonically additive (1/nu_ij = 1/nu_i + 1/nu_j, with nu_i = 0 freezing
every interface of phase i).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import simpson

from .errors import NoWettingEquilibrium, TriangleInequalityViolated

__all__ = [
    "W", "Wp", "Wpp",
    "optimal_profile", "profile_derivative",
    "asymptotic_constants",
    "MCH_MOBILITY_SCALE", "mch_mobility", "mch_mobility_max",
    "nmnch_mobility", "metric_mobility", "sqrt_mobility",
    "decompose_tensions", "pairwise_mobilities", "young_angle",
]

# Mobility arguments are clamped to this window before evaluation; legitimate
# overshoot is O(eps), so the clamp only matters for already-diverged runs.
CLAMP_LO, CLAMP_HI = -0.5, 1.5

# 1/c_N^2 with |c_N| = 1/6; see asymptotic_constants.
MCH_MOBILITY_SCALE = 36.0


def W(s):
    """Double-well potential W(s) = s^2 (1-s)^2 / 2."""
    s = np.asarray(s, dtype=float)
    return 0.5 * s**2 * (1.0 - s) ** 2


def Wp(s):
    """W'(s) = s (1-s) (1-2s)."""
    s = np.asarray(s, dtype=float)
    return s * (1.0 - s) * (1.0 - 2.0 * s)


def Wpp(s):
    """W''(s) = 1 - 6 s + 6 s^2."""
    s = np.asarray(s, dtype=float)
    return 1.0 - 6.0 * s + 6.0 * s**2


def optimal_profile(z):
    """1D transition profile q(z) = (1 - tanh(z/2)) / 2.

    q(0) = 1/2, strictly decreasing, q(z) + q(-z) = 1, and q solves the
    layer equation q' = -sqrt(2 W(q)).
    """
    z = np.asarray(z, dtype=float)
    return 0.5 * (1.0 - np.tanh(0.5 * z))


def profile_derivative(z):
    """q'(z) = -q(z)(1 - q(z)) = -sech^2(z/2)/4."""
    q = optimal_profile(z)
    return -q * (1.0 - q)


def asymptotic_constants(span: float = 40.0, intervals: int = 2**16):
    """Layer integrals (c_W, c_M, c_N) of the transition profile.

    c_W = int (q')^2 dz,  c_M = int 2 W(q) dz  (unsmoothed mobility),
    c_N = int q' * sqrt(2 W(q)) dz.

    Computed by composite Simpson quadrature on [-span, span]; the integrands
    decay like exp(-2|z|) so the tail beyond |z| = 40 is below 1e-17.  The
    profile equation forces c_W = c_M = -c_N = 1/6 analytically; the sign of
    c_N is kept (the velocity normalization only ever uses c_N^2).
    """
    z = np.linspace(-span, span, intervals + 1)
    qp = profile_derivative(z)
    w2 = 2.0 * W(optimal_profile(z))
    c_w = float(simpson(qp**2, x=z))
    c_m = float(simpson(w2, x=z))
    c_n = float(simpson(qp * np.sqrt(w2), x=z))
    return c_w, c_m, c_n


# ---------------------------------------------------------------------------
# Mobilities
# ---------------------------------------------------------------------------


def _clamped(s):
    return np.clip(np.asarray(s, dtype=float), CLAMP_LO, CLAMP_HI)


def mch_mobility(s):
    """Degenerate mobility 36 * 2 W(s); vanishes exactly at s in {0, 1}."""
    return MCH_MOBILITY_SCALE * 2.0 * W(_clamped(s))


def mch_mobility_max() -> float:
    """max over [0,1] of the normalized degenerate mobility (= 36/16)."""
    return MCH_MOBILITY_SCALE * 2.0 * float(W(0.5))


def nmnch_mobility(s, gamma: float, eps: float):
    """Smoothed mobility 2 W(s) + gamma * eps^2 >= gamma * eps^2 > 0."""
    return 2.0 * W(_clamped(s)) + gamma * eps**2


def metric_mobility(s, gamma: float, eps: float):
    """N(s) = 1 / sqrt(M(s)), finite everywhere thanks to the smoothing."""
    return 1.0 / np.sqrt(nmnch_mobility(s, gamma, eps))


def sqrt_mobility(s, gamma: float, eps: float):
    """g(s) = sqrt(M(s)) = 1/N(s); symmetric under s -> 1 - s."""
    return np.sqrt(nmnch_mobility(s, gamma, eps))


# ---------------------------------------------------------------------------
# Surface-tension and mobility decompositions
# ---------------------------------------------------------------------------


def decompose_tensions(sigma_lv: float, sigma_sv: float, sigma_ls: float):
    """Split pairwise tensions into per-phase coefficients.

    Returns (sigma_l, sigma_s, sigma_v) with sigma_i + sigma_j reproducing
    each pairwise tension exactly:

        sigma_l = (sigma_ls + sigma_lv - sigma_sv) / 2
        sigma_s = (sigma_ls + sigma_sv - sigma_lv) / 2
        sigma_v = (sigma_lv + sigma_sv - sigma_ls) / 2

    Raises TriangleInequalityViolated if any per-phase coefficient comes out
    negative (strict triangle failure).
    """
    for name, val in (("sigma_lv", sigma_lv), ("sigma_sv", sigma_sv), ("sigma_ls", sigma_ls)):
        if not val > 0:
            raise TriangleInequalityViolated(f"{name} must be positive, got {val}")
    sigma_l = 0.5 * (sigma_ls + sigma_lv - sigma_sv)
    sigma_s = 0.5 * (sigma_ls + sigma_sv - sigma_lv)
    sigma_v = 0.5 * (sigma_lv + sigma_sv - sigma_ls)
    if min(sigma_l, sigma_s, sigma_v) < 0:
        raise TriangleInequalityViolated(
            f"pairwise tensions ({sigma_lv}, {sigma_sv}, {sigma_ls}) violate the "
            f"triangle inequality: per-phase split ({sigma_l}, {sigma_s}, {sigma_v})"
        )
    return sigma_l, sigma_s, sigma_v


def pairwise_mobilities(nu) -> np.ndarray:
    """Harmonic pairwise mobilities from per-phase coefficients.

    Returns the symmetric matrix nu_ij = (1/nu_i + 1/nu_j)^-1 with the
    convention nu_ij = 0 whenever either phase is frozen (nu = 0); the
    diagonal is set to 0 (no self-interface).
    """
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise ValueError("per-phase mobilities must be non-negative")
    n = len(nu)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if nu[i] > 0 and nu[j] > 0:
                out[i, j] = out[j, i] = 1.0 / (1.0 / nu[i] + 1.0 / nu[j])
    return out


def young_angle(sigma_sv: float, sigma_ls: float, sigma_lv: float) -> float:
    """Equilibrium contact angle of a liquid on a solid, in radians.

    cos(theta) = (sigma_sv - sigma_ls) / sigma_lv.  Raises
    NoWettingEquilibrium when |cos| > 1 (total wetting or dewetting).
    """
    c = (sigma_sv - sigma_ls) / sigma_lv
    if abs(c) > 1.0:
        raise NoWettingEquilibrium(
            f"(sigma_sv - sigma_ls)/sigma_lv = {c:.4g} lies outside [-1, 1]"
        )
    return math.acos(c)
