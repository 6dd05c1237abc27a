"""Shared state for the multiphase time steppers: parameters and phase stacks."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import physics
from .spectral import Grid

__all__ = ["SchemeParams", "PhaseSystem", "consistent_mu", "partition_residual"]


@dataclass
class SchemeParams:
    """Numerical parameters of the semi-implicit splitting schemes.

    Attributes
    ----------
    eps : float
        Interface width.
    dt : float
        Time step (the standard experiment choice is eps**4).
    model : str
        ``"mch"`` (single degenerate mobility) or ``"nmnch"`` (doubly
        degenerate, metric mobility N = 1/sqrt(M)).
    alpha : float
        Potential-splitting stabilizer; alpha >= max|W''| = 1 backs the
        energy-decrease heuristic.  Default 2.
    m : float
        Metric-splitting stabilizer.  Defaults to max M(s) on [0, 1] for
        ``mch`` (the value guaranteeing a concave explicit part) and to 1 for
        ``nmnch`` (the standard experiment value).
    beta : float
        Zeroth-order metric stabilizer, ``nmnch`` only.  Default 2/eps^2.
    gamma : float
        Mobility smoothing coefficient of the ``nmnch`` family.  Default 1.
    """

    eps: float
    dt: float
    model: str = "nmnch"
    alpha: float = 2.0
    m: float = None
    beta: float = None
    gamma: float = 1.0

    def __post_init__(self):
        if self.model not in ("mch", "nmnch"):
            raise ValueError(f"model must be 'mch' or 'nmnch', got {self.model!r}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.m is None:
            self.m = physics.mch_mobility_max() if self.model == "mch" else 1.0
        if self.beta is None:
            self.beta = 2.0 / self.eps**2 if self.model == "nmnch" else 0.0
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.alpha < 1.0:
            warnings.warn(
                f"alpha = {self.alpha} is below max|W''| = 1; the explicit "
                "potential part is no longer concave", stacklevel=2)
        if self.model == "mch" and self.m < physics.mch_mobility_max():
            warnings.warn(
                f"m = {self.m} is below max M = {physics.mch_mobility_max()}; "
                "energy decrease is not backed by the splitting argument",
                stacklevel=2)
        if self.model == "nmnch" and not self.beta > 0:
            raise ValueError("beta must be positive for the nmnch scheme")

    def mobility(self, s):
        """The model's mobility M evaluated at (clamped) s."""
        if self.model == "mch":
            return physics.mch_mobility(s)
        return physics.nmnch_mobility(s, self.gamma, self.eps)


def consistent_mu(u: np.ndarray, grid: Grid, eps: float) -> np.ndarray:
    """Chemical potential W'(u)/eps^2 - Lap u (batched over leading axes)."""
    uhat = grid.fft(u)
    lap = grid.ifft(grid.lap_symbol * uhat)
    return physics.Wp(u) / eps**2 - lap


def partition_residual(u: np.ndarray) -> float:
    """L-infinity defect of the pointwise partition sum_k u_k = 1."""
    return float(np.max(np.abs(u.sum(axis=0) - 1.0)))


@dataclass
class PhaseSystem:
    """L phase fields, their chemical potentials and the partition multiplier.

    ``u`` and ``mu`` are stacked real arrays of shape (L, *grid.dims);
    ``lam`` has shape grid.dims.  A system is owned by one stepper at a
    time; steppers mutate it in place and return it.
    """

    grid: Grid
    u: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    sigma: np.ndarray
    nu: np.ndarray
    step_index: int = 0
    time: float = 0.0

    @classmethod
    def from_initial(cls, grid: Grid, u, sigma, nu, params: SchemeParams,
                     check_partition: bool = True) -> "PhaseSystem":
        """Build a system from phase fields alone.

        The chemical potentials are initialized consistently from u (rather
        than as zero) and the multiplier starts at zero.
        """
        u = np.ascontiguousarray(u, dtype=float)
        if u.ndim == grid.ndim:  # single field -> one-phase stack
            u = u[None]
        if u.shape[1:] != grid.dims:
            raise ValueError(f"field shape {u.shape[1:]} != grid dims {grid.dims}")
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        L = u.shape[0]
        if len(sigma) != L or len(nu) != L:
            raise ValueError("sigma and nu must supply one coefficient per phase")
        if np.any(sigma <= 0):
            raise ValueError("per-phase tensions must be positive")
        if np.any(nu < 0):
            raise ValueError("per-phase mobilities must be non-negative")
        if check_partition and L > 1:
            defect = partition_residual(u)
            if defect > 1e-6:
                raise ValueError(f"initial fields violate the partition by {defect:.3e}")
        mu = consistent_mu(u, grid, params.eps)
        lam = np.zeros(grid.dims)
        return cls(grid=grid, u=u, mu=mu, lam=lam, sigma=sigma, nu=nu)

    @property
    def nphases(self) -> int:
        return self.u.shape[0]

    def mass(self) -> np.ndarray:
        """Per-phase grid means."""
        return self.u.mean(axis=tuple(range(1, self.u.ndim)))

    def partition_residual(self) -> float:
        return partition_residual(self.u)

    def copy(self) -> "PhaseSystem":
        return PhaseSystem(
            grid=self.grid, u=self.u.copy(), mu=self.mu.copy(),
            lam=self.lam.copy(), sigma=self.sigma.copy(), nu=self.nu.copy(),
            step_index=self.step_index, time=self.time)
