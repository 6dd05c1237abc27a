"""Multiphase time stepper for the singly degenerate mobility model.

The flow per phase is

    du_k/dt = nu_k div( M(u_k) grad( sigma_k mu_k + lambda ) ),
    mu_k    = W'(u_k)/eps^2 - Lap u_k,      sum_k u_k = 1,

with the degenerate mobility M(s) = 36 * 2 W(s).  Each step splits both the
energy (convex part implicit, stabilized by alpha) and the metric (constant
mobility m implicit, remainder explicit), which decouples the phases into L
independent linear solves that are diagonal in Fourier space.  The partition
constraint is restored afterwards through a multiplier computed in closed
form from the half-step defect.

Every update term has zero spatial mean, so per-phase masses are conserved
to round-off; the multiplier correction makes the pointwise partition exact
in exact arithmetic.
"""

from __future__ import annotations

import numpy as np

from . import physics
from .errors import UnbalancedDefect
from .spectral import Grid, lambda_inverse_symbol
from .system import PhaseSystem, SchemeParams

__all__ = ["b_terms", "half_step", "lagrange_multiplier", "correct", "step",
           "biphasic_step"]

# Tolerated mean of the partition defect entering the multiplier solve; a
# larger mean signals broken mass conservation upstream.
DEFECT_MEAN_TOL = 1e-9


def _bshape(grid: Grid, L: int):
    return (L,) + (1,) * grid.ndim


def _explicit_flux_hat(grid: Grid, u, w_hat, params: SchemeParams, nu_b):
    """fft of  nu * div( (M(u) - m) grad(w) ), batched over phases."""
    mob = params.mobility(u) - params.m
    div_hat = np.zeros_like(w_hat)
    for d in grid.grad_symbols:
        gw = grid.ifft(d * w_hat)
        div_hat = div_hat + d * grid.fft(mob * gw)
    return nu_b * div_hat


def _half_step_hats(grid: Grid, u, mu, lam, params: SchemeParams, sigma, nu):
    """Spectral half-step: decoupled stabilized solves per phase.

    Returns (uhalf_hat, muhalf_hat, lsym) with lsym the per-phase inverse
    symbols, reused by the correction stage.
    """
    L = u.shape[0]
    bshape = _bshape(grid, L)
    nu_b = np.asarray(nu, dtype=float).reshape(bshape)
    c_b = (np.asarray(sigma, dtype=float) * np.asarray(nu, dtype=float)).reshape(bshape)
    s = grid.lap_symbol
    aeps = params.alpha / params.eps**2
    dt, m = params.dt, params.m

    w = np.asarray(sigma, dtype=float).reshape(bshape) * mu + lam
    w_hat = grid.fft(w)
    b1_hat = grid.fft(u) + dt * _explicit_flux_hat(grid, u, w_hat, params, nu_b)
    b2 = (physics.Wp(u) - params.alpha * u) / params.eps**2
    b2_hat = grid.fft(b2)

    lsym = 1.0 / (1.0 + dt * m * c_b * s * (s - aeps))
    uhalf_hat = lsym * (b1_hat + dt * m * c_b * s * b2_hat)
    muhalf_hat = lsym * ((aeps - s) * b1_hat + b2_hat)
    return uhalf_hat, muhalf_hat, lsym


def _defect_hat(grid: Grid, uhalf_hat, check_mean: bool):
    """Spectrum of 1 - sum_k u_k^{n+1/2}; optionally verify it has zero mean."""
    d_hat = -uhalf_hat.sum(axis=0)
    zero = (0,) * grid.ndim
    mean = 1.0 + d_hat[zero].real / grid.npoints
    if check_mean and abs(mean) > DEFECT_MEAN_TOL:
        raise UnbalancedDefect(
            f"partition defect has mean {mean:.3e} (tolerance {DEFECT_MEAN_TOL:.0e})")
    d_hat[zero] += grid.npoints
    return d_hat


def _lambda_hat(grid: Grid, defect_hat, params: SchemeParams, sigma, nu):
    inv = lambda_inverse_symbol(
        grid, nu, sigma, dt=params.dt, m=params.m, beta=0.0,
        alpha=params.alpha, eps=params.eps, model="mch")
    return inv * defect_hat / (params.dt * params.m)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def b_terms(u_k, mu_k, lam, grid: Grid, params: SchemeParams,
            sigma_k: float = 1.0, nu_k: float = 1.0):
    """Explicit right-hand sides of one phase's half-step solve.

    B1 = u + dt * nu * div( (M(u) - m) grad( sigma*mu + lam ) )
    B2 = (W'(u) - alpha*u) / eps^2
    """
    u_k = np.asarray(u_k, dtype=float)
    w_hat = grid.fft(sigma_k * np.asarray(mu_k, dtype=float) + lam)
    flux_hat = _explicit_flux_hat(grid, u_k, w_hat, params, nu_k)
    b1 = u_k + params.dt * grid.ifft(flux_hat)
    b2 = (physics.Wp(u_k) - params.alpha * u_k) / params.eps**2
    return b1, b2


def half_step(system: PhaseSystem, params: SchemeParams):
    """Decoupled per-phase advance; returns real (u_half, mu_half) stacks."""
    uhalf_hat, muhalf_hat, _ = _half_step_hats(
        system.grid, system.u, system.mu, system.lam, params,
        system.sigma, system.nu)
    return system.grid.ifft(uhalf_hat), system.grid.ifft(muhalf_hat)


def lagrange_multiplier(defect, grid: Grid, params: SchemeParams, sigma, nu):
    """Solve for the partition multiplier from the half-step defect field.

    The defect must have zero mean (to DEFECT_MEAN_TOL); the returned
    multiplier has zero mean by the symbol convention.
    """
    defect = np.asarray(defect, dtype=float)
    if abs(float(defect.mean())) > DEFECT_MEAN_TOL:
        raise UnbalancedDefect(
            f"partition defect has mean {float(defect.mean()):.3e}")
    lam_hat = _lambda_hat(grid, grid.fft(defect), params, sigma, nu)
    return grid.ifft(lam_hat)


def correct(u_half, mu_half, lam, grid: Grid, params: SchemeParams, sigma, nu):
    """Fold the multiplier back into every unfrozen phase."""
    u_half = np.asarray(u_half, dtype=float)
    L = u_half.shape[0]
    bshape = _bshape(grid, L)
    nu_b = np.asarray(nu, dtype=float).reshape(bshape)
    c_b = (np.asarray(sigma, dtype=float) * np.asarray(nu, dtype=float)).reshape(bshape)
    s = grid.lap_symbol
    aeps = params.alpha / params.eps**2
    lsym = 1.0 / (1.0 + params.dt * params.m * c_b * s * (s - aeps))
    lam_hat = grid.fft(np.asarray(lam, dtype=float))
    shift = params.dt * params.m * nu_b * lsym * s * lam_hat
    u_new = grid.ifft(grid.fft(u_half) + shift)
    mu_new = grid.ifft(grid.fft(np.asarray(mu_half, dtype=float)) + (aeps - s) * shift)
    return u_new, mu_new


def step(system: PhaseSystem, params: SchemeParams) -> PhaseSystem:
    """Advance the system by one dt: half-step, multiplier, correction.

    Mutates the system in place and returns it.  Phases with nu_k = 0 are
    copied through bit-for-bit.
    """
    grid = system.grid
    uhalf_hat, muhalf_hat, lsym = _half_step_hats(
        grid, system.u, system.mu, system.lam, params, system.sigma, system.nu)

    if system.nphases > 1:
        defect_hat = _defect_hat(grid, uhalf_hat, check_mean=True)
        lam_hat = _lambda_hat(grid, defect_hat, params, system.sigma, system.nu)
        bshape = _bshape(grid, system.nphases)
        nu_b = system.nu.reshape(bshape)
        s = grid.lap_symbol
        aeps = params.alpha / params.eps**2
        shift = params.dt * params.m * nu_b * lsym * s * lam_hat
        u_new = grid.ifft(uhalf_hat + shift)
        mu_new = grid.ifft(muhalf_hat + (aeps - s) * shift)
        lam_new = grid.ifft(lam_hat)
    else:
        u_new = grid.ifft(uhalf_hat)
        mu_new = grid.ifft(muhalf_hat)
        lam_new = system.lam

    frozen = system.nu == 0.0
    if frozen.any():
        u_new[frozen] = system.u[frozen]
        mu_new[frozen] = system.mu[frozen]

    system.u, system.mu, system.lam = u_new, mu_new, lam_new
    system.step_index += 1
    system.time += params.dt
    return system


def biphasic_step(u, mu, grid: Grid, params: SchemeParams, coeff: float = 1.0,
                  explicit_potential=None):
    """One step of the standalone single-field scheme.

    Advances  du/dt = div( M(u) grad( coeff*mu + psi ) )  where psi is an
    optional extra driving potential treated fully explicitly (it rides along
    the stabilized flux exactly where the multiplier does in the multiphase
    scheme).  Returns the new (u, mu) pair.
    """
    u = np.asarray(u, dtype=float)
    mu = np.asarray(mu, dtype=float)
    s = grid.lap_symbol
    aeps = params.alpha / params.eps**2
    dt, m = params.dt, params.m

    w = coeff * mu
    if explicit_potential is not None:
        w = w + explicit_potential
    w_hat = grid.fft(w)
    flux_hat = _explicit_flux_hat(grid, u, w_hat, params, 1.0)
    if explicit_potential is not None:
        flux_hat = flux_hat + m * s * grid.fft(np.asarray(explicit_potential, dtype=float))
    b1_hat = grid.fft(u) + dt * flux_hat
    b2 = (physics.Wp(u) - params.alpha * u) / params.eps**2
    b2_hat = grid.fft(b2)

    lsym = 1.0 / (1.0 + dt * m * coeff * s * (s - aeps))
    u_new = grid.ifft(lsym * (b1_hat + dt * m * coeff * s * b2_hat))
    mu_new = grid.ifft(lsym * ((aeps - s) * b1_hat + b2_hat))
    return u_new, mu_new
