"""Energies, conservation monitors, interface geometry and order sweeps.

Everything here is a pure function of system state: running a diagnostic
never mutates fields, and identical states produce identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from . import physics
from .errors import EmptyLevelSet, InsufficientResolution
from .spectral import Grid
from .system import PhaseSystem

__all__ = [
    "DiagnosticsReport",
    "cahn_hilliard_energy",
    "mass_vector",
    "profile_error",
    "overshoot",
    "level_set_geometry",
    "fit_loglog_slope",
    "report",
    "CSV_COLUMNS_DOC",
]


def cahn_hilliard_energy(system_or_u, eps: float = None, sigma=None,
                         grid: Grid = None) -> float:
    """Multiphase interface energy

        P = 1/2 * sum_k sigma_k * int( eps/2 |grad u_k|^2 + W(u_k)/eps ) dx.

    Gradients are spectral; the integral is the grid sum times the cell
    volume.  Accepts either a PhaseSystem (eps still required) or a stacked
    (L, *dims) array together with sigma and grid.
    """
    if isinstance(system_or_u, PhaseSystem):
        sys_ = system_or_u
        u, grid = sys_.u, sys_.grid
        sigma = sys_.sigma if sigma is None else np.asarray(sigma, dtype=float)
    else:
        u = np.asarray(system_or_u, dtype=float)
        if u.ndim == grid.ndim:
            u = u[None]
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if eps is None:
        raise ValueError("eps is required")
    u_hat = grid.fft(u)
    grad_sq = np.zeros_like(u)
    for d in grid.grad_symbols:
        g = grid.ifft(d * u_hat)
        grad_sq += g * g
    dens = 0.5 * eps * grad_sq + physics.W(u) / eps
    per_phase = dens.sum(axis=tuple(range(1, u.ndim))) * grid.cell_volume
    return float(0.5 * np.dot(sigma, per_phase))


def mass_vector(system_or_u, grid: Grid = None) -> np.ndarray:
    """Per-phase grid means (the conserved masses of the flows)."""
    if isinstance(system_or_u, PhaseSystem):
        return system_or_u.mass()
    u = np.asarray(system_or_u, dtype=float)
    if grid is not None and u.ndim == grid.ndim:
        u = u[None]
    return u.mean(axis=tuple(range(1, u.ndim)))


def profile_error(u: np.ndarray, signed_distance: np.ndarray, eps: float) -> float:
    """L-infinity distance between u and the ideal layer q(dist/eps)."""
    ref = physics.optimal_profile(np.asarray(signed_distance, dtype=float) / eps)
    return float(np.max(np.abs(np.asarray(u, dtype=float) - ref)))


def overshoot(u: np.ndarray):
    """(min, max) of the raw field; the excursion outside [0, 1] is the
    quantity whose eps-scaling separates the two mobility models."""
    u = np.asarray(u, dtype=float)
    return float(u.min()), float(u.max())


def level_set_geometry(u: np.ndarray, grid: Grid, iso: float = 0.5):
    """(area, perimeter, isoperimetric ratio) of a 2D iso-level set.

    Contours come from marching squares with linear interpolation; the area
    is the shoelace area of the closed polylines and the perimeter their
    total length, so the ratio 4*pi*A/P^2 is 1 for a disc.  The level set
    must not touch the periodic box edges (contours would be clipped).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise ValueError("level-set geometry is implemented for 2D fields")
    if not (u.min() < iso < u.max()):
        raise EmptyLevelSet(f"field range [{u.min():.3g}, {u.max():.3g}] "
                            f"does not straddle iso = {iso}")
    contours = measure.find_contours(u, iso)
    if not contours:
        raise EmptyLevelSet(f"no contour found at iso = {iso}")
    hx, hy = grid.cell
    area = 0.0
    perimeter = 0.0
    for c in contours:
        pts = np.column_stack([c[:, 0] * hx, c[:, 1] * hy])
        d = np.diff(pts, axis=0)
        perimeter += float(np.sum(np.hypot(d[:, 0], d[:, 1])))
        x, y = pts[:, 0], pts[:, 1]
        area += 0.5 * abs(float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1])
                                + x[-1] * y[0] - x[0] * y[-1]))
    ratio = 4.0 * np.pi * area / perimeter**2
    return area, perimeter, ratio


def fit_loglog_slope(eps_values, metric_values) -> float:
    """Least-squares slope of log(metric) against log(eps).

    Requires at least 3 strictly positive samples; this is the order
    estimator used by the interface-width sweeps.
    """
    e = np.asarray(eps_values, dtype=float)
    v = np.asarray(metric_values, dtype=float)
    if e.size < 3:
        raise InsufficientResolution("need at least 3 interface widths to fit an order")
    if np.any(v <= 0) or np.any(e <= 0):
        raise ValueError("slope fit needs strictly positive metric and eps values")
    slope, _ = np.polyfit(np.log(e), np.log(v), 1)
    return float(slope)


@dataclass
class DiagnosticsReport:
    """One sampled row of run diagnostics.

    Serialized CSV column order (see CSV_COLUMNS_DOC): step, time, energy,
    partition_residual, then mass_k, min_k, max_k for each phase k.
    """

    step: int
    time: float
    energy: float
    mass: np.ndarray
    partition_residual: float
    min_u: np.ndarray
    max_u: np.ndarray
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        values = [self.energy, self.partition_residual, *self.mass,
                  *self.min_u, *self.max_u]
        if not np.all(np.isfinite(values)):
            raise ValueError("diagnostics contain non-finite entries")

    @staticmethod
    def csv_header(nphases: int) -> str:
        cols = ["step", "time", "energy", "partition_residual"]
        for k in range(nphases):
            cols += [f"mass_{k}", f"min_{k}", f"max_{k}"]
        return ",".join(cols)

    def csv_row(self) -> str:
        vals = [str(self.step), f"{self.time:.17g}", f"{self.energy:.17g}",
                f"{self.partition_residual:.17g}"]
        for k in range(len(self.mass)):
            vals += [f"{self.mass[k]:.17g}", f"{self.min_u[k]:.17g}",
                     f"{self.max_u[k]:.17g}"]
        return ",".join(vals)


CSV_COLUMNS_DOC = (
    "step,time,energy,partition_residual"
    ",mass_k,min_k,max_k (repeated per phase, k = 0..L-1)"
)


def report(system: PhaseSystem, eps: float) -> DiagnosticsReport:
    """Snapshot all standard monitors of a system (read-only)."""
    spatial = tuple(range(1, system.u.ndim))
    return DiagnosticsReport(
        step=system.step_index,
        time=system.time,
        energy=cahn_hilliard_energy(system, eps=eps),
        mass=system.mass(),
        partition_residual=system.partition_residual(),
        min_u=system.u.min(axis=spatial),
        max_u=system.u.max(axis=spatial),
    )
