"""Multiphase time stepper for the doubly degenerate mobility model.

The flow per phase is

    du_k/dt = nu_k N(u_k) div( M(u_k) grad( N(u_k) (sigma_k mu_k + lambda) ) ),
    mu_k    = W'(u_k)/eps^2 - Lap u_k,      sum_k u_k = 1,

with M(s) = 2 W(s) + gamma eps^2 and the metric mobility N = 1/sqrt(M).  The
smoothing keeps N finite, and the transport term is evaluated through the
divergence-free-of-N reformulation

    N div( M grad(p) ) = sqrt(M) Lap p + 2 grad(sqrt(M)) . grad(p),

which never divides by a degenerate quantity; grad(sqrt(M)) is taken
spectrally from the real-space field sqrt(M(u)).

The metric splitting is implicit in the constant coefficient operator
(m Lap - beta) and explicit in the remainder, again decoupling the phases
into diagonal Fourier solves; the partition multiplier is recovered in
closed form (here its operator is invertible at the zero mode, so no
mean-zero convention is needed).
"""

from __future__ import annotations

import numpy as np

from . import physics
from .spectral import Grid, lambda_inverse_symbol
from .system import PhaseSystem, SchemeParams

__all__ = ["transport", "transport_unreformulated", "h_term", "half_step",
           "lagrange_multiplier", "correct", "step", "biphasic_step"]


def _bshape(grid: Grid, L: int):
    return (L,) + (1,) * grid.ndim


def _transport_batched(grid: Grid, u, w, params: SchemeParams):
    """sqrt(M) Lap(N w) + 2 grad(sqrt M) . grad(N w), batched over phases."""
    p = physics.metric_mobility(u, params.gamma, params.eps) * w
    p_hat = grid.fft(p)
    sq = physics.sqrt_mobility(u, params.gamma, params.eps)
    out = sq * grid.ifft(grid.lap_symbol * p_hat)
    sq_hat = grid.fft(sq)
    for d in grid.grad_symbols:
        out = out + 2.0 * grid.ifft(d * sq_hat) * grid.ifft(d * p_hat)
    return out


def transport(u, w, grid: Grid, params: SchemeParams):
    """Reformulated transport term N(u) div( M(u) grad( N(u) w ) )."""
    return _transport_batched(grid, np.asarray(u, dtype=float),
                              np.asarray(w, dtype=float), params)


def transport_unreformulated(u, w, grid: Grid, params: SchemeParams):
    """Literal evaluation of N div( M grad( N w ) ); equivalence oracle.

    Spectrally this differs from :func:`transport` only through aliasing of
    the real-space products, so the two agree on smooth, well-resolved data.
    """
    u = np.asarray(u, dtype=float)
    n = physics.metric_mobility(u, params.gamma, params.eps)
    m = physics.nmnch_mobility(u, params.gamma, params.eps)
    p_hat = grid.fft(n * np.asarray(w, dtype=float))
    div_hat = np.zeros_like(p_hat)
    for d in grid.grad_symbols:
        div_hat = div_hat + d * grid.fft(m * grid.ifft(d * p_hat))
    return n * grid.ifft(div_hat)


def h_term(u_k, mu_k, lam, grid: Grid, params: SchemeParams,
           sigma_k: float = 1.0, nu_k: float = 1.0):
    """Explicit part of the metric splitting for one phase:

    H_k = nu_k * ( N div( M grad( N (sigma*mu + lam) ) ) - (m Lap - beta) (sigma*mu + lam) )
    """
    if nu_k == 0.0:
        return np.zeros(grid.dims)
    u_k = np.asarray(u_k, dtype=float)
    w = sigma_k * np.asarray(mu_k, dtype=float) + lam
    t = _transport_batched(grid, u_k, w, params)
    w_hat = grid.fft(w)
    lin = grid.ifft((params.m * grid.lap_symbol - params.beta) * w_hat)
    return nu_k * (t - lin)


def _half_step_hats(grid: Grid, u, mu, lam, params: SchemeParams, sigma, nu):
    L = u.shape[0]
    bshape = _bshape(grid, L)
    sig_b = np.asarray(sigma, dtype=float).reshape(bshape)
    nu_b = np.asarray(nu, dtype=float).reshape(bshape)
    c_b = sig_b * nu_b
    s = grid.lap_symbol
    aeps = params.alpha / params.eps**2
    dt, m, beta = params.dt, params.m, params.beta

    w = sig_b * mu + lam
    w_hat = grid.fft(w)
    t = _transport_batched(grid, u, w, params)
    # H = nu * (t - (m Lap - beta) w); the linear part stays spectral.
    b1_hat = grid.fft(u + dt * nu_b * t) - dt * nu_b * (m * s - beta) * w_hat
    b2 = (physics.Wp(u) - params.alpha * u) / params.eps**2
    b2_hat = grid.fft(b2)

    lsym = 1.0 / (1.0 + dt * c_b * (m * s - beta) * (s - aeps))
    uhalf_hat = lsym * (b1_hat + dt * c_b * (m * s - beta) * b2_hat)
    muhalf_hat = lsym * ((aeps - s) * b1_hat + b2_hat)
    return uhalf_hat, muhalf_hat, lsym


def _lambda_hat(grid: Grid, defect_hat, params: SchemeParams, sigma, nu):
    inv = lambda_inverse_symbol(
        grid, nu, sigma, dt=params.dt, m=params.m, beta=params.beta,
        alpha=params.alpha, eps=params.eps, model="nmnch")
    return inv * defect_hat / params.dt


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def half_step(system: PhaseSystem, params: SchemeParams):
    """Decoupled per-phase advance; returns real (u_half, mu_half) stacks."""
    uhalf_hat, muhalf_hat, _ = _half_step_hats(
        system.grid, system.u, system.mu, system.lam, params,
        system.sigma, system.nu)
    return system.grid.ifft(uhalf_hat), system.grid.ifft(muhalf_hat)


def lagrange_multiplier(defect, grid: Grid, params: SchemeParams, sigma, nu):
    """Partition multiplier from the half-step defect (invertible zero mode)."""
    lam_hat = _lambda_hat(grid, grid.fft(np.asarray(defect, dtype=float)),
                          params, sigma, nu)
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
    lsym = 1.0 / (1.0 + params.dt * c_b * (params.m * s - params.beta) * (s - aeps))
    lam_hat = grid.fft(np.asarray(lam, dtype=float))
    shift = params.dt * nu_b * lsym * (params.m * s - params.beta) * lam_hat
    u_new = grid.ifft(grid.fft(u_half) + shift)
    mu_new = grid.ifft(grid.fft(np.asarray(mu_half, dtype=float)) + (aeps - s) * shift)
    return u_new, mu_new


def step(system: PhaseSystem, params: SchemeParams) -> PhaseSystem:
    """Advance the system by one dt; frozen phases pass through bit-for-bit."""
    grid = system.grid
    uhalf_hat, muhalf_hat, lsym = _half_step_hats(
        grid, system.u, system.mu, system.lam, params, system.sigma, system.nu)

    if system.nphases > 1:
        defect_hat = -uhalf_hat.sum(axis=0)
        defect_hat[(0,) * grid.ndim] += grid.npoints
        lam_hat = _lambda_hat(grid, defect_hat, params, system.sigma, system.nu)
        bshape = _bshape(grid, system.nphases)
        nu_b = system.nu.reshape(bshape)
        s = grid.lap_symbol
        aeps = params.alpha / params.eps**2
        shift = params.dt * nu_b * lsym * (params.m * s - params.beta) * lam_hat
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

    Advances  du/dt = N(u) div( M(u) grad( N(u) (coeff*mu + psi) ) )  with the
    optional extra potential psi fully explicit: it enters the transport term
    only, exactly where the multiplier rides in the multiphase scheme.
    """
    u = np.asarray(u, dtype=float)
    mu = np.asarray(mu, dtype=float)
    s = grid.lap_symbol
    aeps = params.alpha / params.eps**2
    dt, m, beta = params.dt, params.m, params.beta

    w = coeff * mu
    if explicit_potential is not None:
        w = w + explicit_potential
    t = _transport_batched(grid, u, w, params)
    mu_hat = grid.fft(mu)
    b1_hat = grid.fft(u + dt * t) - dt * (m * s - beta) * coeff * mu_hat
    b2 = (physics.Wp(u) - params.alpha * u) / params.eps**2
    b2_hat = grid.fft(b2)

    lsym = 1.0 / (1.0 + dt * coeff * (m * s - beta) * (s - aeps))
    u_new = grid.ifft(lsym * (b1_hat + dt * coeff * (m * s - beta) * b2_hat))
    mu_new = grid.ifft(lsym * ((aeps - s) * b1_hat + b2_hat))
    return u_new, mu_new
