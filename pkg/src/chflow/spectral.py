"""Periodic grids, cached Fourier transforms, and pointwise spectral inverse operators.

Everything here acts on real scalar fields sampled on a uniform periodic box.
Derivatives are exact for the trigonometric interpolant; the stabilized
inverse operators used by the time steppers are diagonal in Fourier space, so
"solving" them is a pointwise multiply.

Conventions
-----------
* Forward transforms are unnormalized, inverse transforms divide by the node
  count (the default DFT convention).  All operator symbols sit between a
  forward/inverse pair, so the normalization cancels.
* Frequencies are ``xi_k = k / L`` per axis, ``k in [-N/2, N/2 - 1]``, hence
  the Laplacian symbol ``-4 pi^2 |xi|^2``.
* First-derivative symbols zero the Nyquist mode.  An odd derivative of the
  self-conjugate Nyquist coefficient would be purely imaginary; dropping it
  keeps derivatives of real fields exactly real, which in turn lets the
  imaginary-residue tripwire below stay tight even for rough (noise) fields.
* No dealiasing mask is applied.  Products are formed in real space and
  re-expanded; this matches the plain collocation treatment the schemes
  assume.  (A 2/3-rule mask would be easy to slot into :class:`Grid` if ever
  needed.)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft

from .errors import AllMobilitiesZero

__all__ = [
    "Grid",
    "SpectralField",
    "laplacian_symbol",
    "gradient",
    "divergence",
    "laplacian",
    "lm_symbol",
    "apply_lm",
    "lnmn_symbol",
    "apply_lnmn",
    "lambda_inverse_symbol",
]

# Inverse transforms of symbol-multiplied spectra must come back essentially
# real; a larger imaginary residue signals a symmetry-breaking bug upstream.
IMAG_RESIDUE_RTOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box in 1, 2 or 3 dimensions.

    Parameters
    ----------
    dims : tuple of int
        Node counts per axis.  Each must be even and at least 4.
    lengths : tuple of float
        Box side lengths (dimensionless).

    The instance is immutable; derived arrays (frequencies, symbols) are
    computed once and may be shared freely between threads.
    """

    dims: tuple
    lengths: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        lengths = tuple(float(l) for l in self.lengths)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)
        if not 1 <= len(dims) <= 3:
            raise ValueError(f"grid must be 1-, 2- or 3-dimensional, got {len(dims)} axes")
        if len(lengths) != len(dims):
            raise ValueError("dims and lengths must have the same number of axes")
        for n in dims:
            if n < 4 or n % 2:
                raise ValueError(f"node counts must be even and >= 4, got {n}")
        for l in lengths:
            if not l > 0:
                raise ValueError(f"box lengths must be positive, got {l}")

    # -- basic geometry -------------------------------------------------

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def cell(self) -> tuple:
        """Grid spacings h_i = L_i / N_i."""
        return tuple(l / n for l, n in zip(self.lengths, self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell))

    @property
    def npoints(self) -> int:
        return int(np.prod(self.dims))

    def coords(self) -> tuple:
        """Physical node coordinates, one broadcastable array per axis."""
        out = []
        for axis, (n, l) in enumerate(zip(self.dims, self.lengths)):
            x = np.arange(n) * (l / n)
            shape = [1] * self.ndim
            shape[axis] = n
            out.append(x.reshape(shape))
        return tuple(out)

    # -- spectral machinery ---------------------------------------------

    @cached_property
    def freq(self) -> tuple:
        """Per-axis frequency arrays xi with xi_k = k / L, k in [-N/2, N/2-1]."""
        return tuple(
            np.fft.fftfreq(n, d=l / n) for n, l in zip(self.dims, self.lengths)
        )

    def _bc(self, axis: int, values: np.ndarray) -> np.ndarray:
        shape = [1] * self.ndim
        shape[axis] = self.dims[axis]
        return values.reshape(shape)

    @cached_property
    def lap_symbol(self) -> np.ndarray:
        """Laplacian symbol s(xi) = -4 pi^2 |xi|^2 over the full mode box."""
        s = np.zeros(self.dims)
        for axis, xi in enumerate(self.freq):
            s = s + self._bc(axis, xi) ** 2
        return -4.0 * np.pi**2 * s

    @cached_property
    def grad_symbols(self) -> tuple:
        """First-derivative multipliers 2*pi*i*xi_j, Nyquist zeroed, broadcastable."""
        out = []
        for axis, xi in enumerate(self.freq):
            d = 2.0j * np.pi * xi.copy()
            d[self.dims[axis] // 2] = 0.0
            out.append(self._bc(axis, d))
        return tuple(out)

    # -- transforms ------------------------------------------------------

    def fft(self, a: np.ndarray) -> np.ndarray:
        """Forward DFT over the trailing ``ndim`` axes (unnormalized)."""
        axes = tuple(range(a.ndim - self.ndim, a.ndim))
        return _fft.fftn(a, axes=axes, norm="backward")

    def ifft(self, ahat: np.ndarray, check: bool = True) -> np.ndarray:
        """Inverse DFT; drops the imaginary residue after checking it is noise."""
        axes = tuple(range(ahat.ndim - self.ndim, ahat.ndim))
        out = _fft.ifftn(ahat, axes=axes, norm="backward")
        if check:
            scale = np.max(np.abs(out.real))
            resid = np.max(np.abs(out.imag))
            if resid > IMAG_RESIDUE_RTOL * max(scale, 1e-300):
                raise AssertionError(
                    f"imaginary residue {resid:.3e} exceeds {IMAG_RESIDUE_RTOL:.0e} "
                    f"of field scale {scale:.3e}: Hermitian symmetry was broken"
                )
        return np.ascontiguousarray(out.real)


class SpectralField:
    """A real scalar field with a lazily synchronized Fourier mirror.

    The pair (real samples, DFT coefficients) is kept consistent: whichever
    side is missing is computed on first access and cached.  Instances are
    value-like; build a new one instead of mutating the arrays in place
    (single-writer contract).
    """

    __slots__ = ("grid", "_real", "_spec")

    def __init__(self, grid: Grid, real=None, spec=None):
        if real is None and spec is None:
            raise ValueError("need real samples or spectral coefficients")
        if real is not None:
            real = np.asarray(real, dtype=float)
            if real.shape != grid.dims:
                raise ValueError(f"field shape {real.shape} != grid dims {grid.dims}")
        if spec is not None:
            spec = np.asarray(spec, dtype=complex)
            if spec.shape != grid.dims:
                raise ValueError(f"spectrum shape {spec.shape} != grid dims {grid.dims}")
        self.grid = grid
        self._real = real
        self._spec = spec

    @classmethod
    def from_real(cls, grid: Grid, values) -> "SpectralField":
        return cls(grid, real=values)

    @classmethod
    def from_spec(cls, grid: Grid, coeffs) -> "SpectralField":
        return cls(grid, spec=coeffs)

    @property
    def real(self) -> np.ndarray:
        if self._real is None:
            self._real = self.grid.ifft(self._spec)
        return self._real

    @property
    def spec(self) -> np.ndarray:
        if self._spec is None:
            self._spec = self.grid.fft(self._real)
        return self._spec

    def with_real(self, values) -> "SpectralField":
        """New field with replaced samples (spectrum recomputed lazily)."""
        return SpectralField(self.grid, real=values)

    def mean(self) -> float:
        if self._spec is not None:
            return float(self._spec[(0,) * self.grid.ndim].real) / self.grid.npoints
        return float(np.mean(self._real))


# ---------------------------------------------------------------------------
# Differential operators
# ---------------------------------------------------------------------------


def laplacian_symbol(grid: Grid) -> np.ndarray:
    """Symbol of the periodic Laplacian: s(xi) = -4 pi^2 |xi|^2, s(0) = 0, s <= 0."""
    return grid.lap_symbol


def _unpack(f, grid):
    if isinstance(f, SpectralField):
        return f.spec, f.grid, True
    if grid is None:
        raise ValueError("plain arrays need an explicit grid")
    return grid.fft(np.asarray(f, dtype=float)), grid, False


def gradient(f, grid: Grid = None):
    """Spectral gradient; returns one component per axis, same kind as input."""
    fhat, grid, wrapped = _unpack(f, grid)
    comps = [grid.ifft(d * fhat) for d in grid.grad_symbols]
    if wrapped:
        return [SpectralField(grid, real=c) for c in comps]
    return comps


def divergence(v, grid: Grid = None):
    """Spectral divergence of a vector field given as a sequence of components."""
    wrapped = isinstance(v[0], SpectralField)
    if wrapped:
        grid = v[0].grid
        hats = [c.spec for c in v]
    else:
        if grid is None:
            raise ValueError("plain arrays need an explicit grid")
        hats = [grid.fft(np.asarray(c, dtype=float)) for c in v]
    if len(hats) != grid.ndim:
        raise ValueError(f"expected {grid.ndim} components, got {len(hats)}")
    acc = sum(d * h for d, h in zip(grid.grad_symbols, hats))
    out = grid.ifft(acc)
    return SpectralField(grid, real=out) if wrapped else out


def laplacian(f, grid: Grid = None):
    """Spectral Laplacian (multiply by the symbol, transform back)."""
    fhat, grid, wrapped = _unpack(f, grid)
    out = grid.ifft(grid.lap_symbol * fhat)
    return SpectralField(grid, real=out) if wrapped else out


# ---------------------------------------------------------------------------
# Stabilized inverse operators of the semi-implicit schemes
# ---------------------------------------------------------------------------


def lm_symbol(grid: Grid, dt: float, m: float, sigma_nu: float,
              alpha: float, eps: float) -> np.ndarray:
    """Multiplier of ( I + dt*m*sigma_nu * Lap (Lap - alpha/eps^2) )^-1.

    With s <= 0 and alpha >= 0 the factor s*(s - alpha/eps^2) is >= 0, so the
    denominator is >= 1: the operator damps every mode and is the identity on
    means (multiplier 1 at xi = 0).
    """
    s = grid.lap_symbol
    return 1.0 / (1.0 + dt * m * sigma_nu * s * (s - alpha / eps**2))


def apply_lm(f, grid: Grid = None, *, dt: float, m: float, sigma_nu: float,
             alpha: float, eps: float):
    """Apply the stabilized fourth-order inverse used by the MCH half-step."""
    fhat, grid, wrapped = _unpack(f, grid)
    out = grid.ifft(lm_symbol(grid, dt, m, sigma_nu, alpha, eps) * fhat)
    return SpectralField(grid, real=out) if wrapped else out


def lnmn_symbol(grid: Grid, dt: float, nu_sigma: float, m: float, beta: float,
                alpha: float, eps: float) -> np.ndarray:
    """Multiplier of ( I + dt*nu_sigma * (m Lap - beta)(Lap - alpha/eps^2) )^-1.

    Both parenthesized factors are strictly negative (m*s - beta <= -beta,
    s - alpha/eps^2 <= -alpha/eps^2), so their product is positive and the
    multiplier lies in (0, 1]; the zero mode is damped by
    1 / (1 + dt*nu_sigma*beta*alpha/eps^2).
    """
    s = grid.lap_symbol
    return 1.0 / (1.0 + dt * nu_sigma * (m * s - beta) * (s - alpha / eps**2))


def apply_lnmn(f, grid: Grid = None, *, dt: float, nu_sigma: float, m: float,
               beta: float, alpha: float, eps: float):
    """Apply the stabilized inverse used by the NMNCH half-step."""
    fhat, grid, wrapped = _unpack(f, grid)
    out = grid.ifft(lnmn_symbol(grid, dt, nu_sigma, m, beta, alpha, eps) * fhat)
    return SpectralField(grid, real=out) if wrapped else out


def lambda_inverse_symbol(grid: Grid, nu, sigma, *, dt: float, m: float,
                          beta: float, alpha: float, eps: float,
                          model: str) -> np.ndarray:
    """Reciprocal symbol of the partition-multiplier operator.

    For model ``"mch"`` the forward operator is  sum_k nu_k * L_k * Lap  and
    its zero mode vanishes (Lap kills constants); the reciprocal is defined as
    0 there, which pins mean(lambda) = 0.  The multiplier is only determined
    up to a constant, and the partition defect it acts on has zero mean as
    long as phase means are conserved, so no information is lost.

    For model ``"nmnch"`` the forward operator is  sum_k nu_k * L_k * (m Lap - beta)
    whose zero mode is strictly negative, so a plain reciprocal works.

    The 1/(dt*m) resp. 1/dt prefactor of the multiplier update is *not*
    included here; the solvers apply it.
    """
    nu = np.asarray(nu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if nu.shape != sigma.shape:
        raise ValueError("nu and sigma must list the same phases")
    if not np.any(nu > 0):
        raise AllMobilitiesZero("all per-phase mobilities vanish")
    s = grid.lap_symbol
    forward = np.zeros_like(s)
    for nu_k, sig_k in zip(nu, sigma):
        if nu_k == 0.0:
            continue
        if model == "mch":
            lsym = 1.0 / (1.0 + dt * m * sig_k * nu_k * s * (s - alpha / eps**2))
            forward = forward + nu_k * lsym * s
        elif model == "nmnch":
            lsym = 1.0 / (1.0 + dt * sig_k * nu_k * (m * s - beta) * (s - alpha / eps**2))
            forward = forward + nu_k * lsym * (m * s - beta)
        else:
            raise ValueError(f"unknown model {model!r}")
    if model == "mch":
        zero = (0,) * grid.ndim
        forward[zero] = 1.0  # placeholder, reciprocal overwritten below
        inv = 1.0 / forward
        inv[zero] = 0.0
        return inv
    return 1.0 / forward
