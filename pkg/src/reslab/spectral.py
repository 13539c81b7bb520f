"""Periodic grid, discrete Fourier conventions and Sobolev norms on [0, 2pi)^3.

Coefficients are stored in FFT order on the full ``n^3`` box.  The forward
transform uses the weight ``(2 pi / n)^3`` so that the zero mode of a
constant ``c`` is ``(2 pi)^3 c`` and Plancherel reads

    ||f||_2^2 = (2 pi)^-3 sum_xi |f_hat(xi)|^2 .
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

TWO_PI = 2.0 * np.pi
VOLUME = TWO_PI**3


def fft_workers() -> int:
    """Worker count handed to scipy.fft, read from ``RESLAB_FFT_WORKERS`` (default 1)."""
    env = os.environ.get("RESLAB_FFT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


@functools.lru_cache(maxsize=16)
def _wavenumbers(n: int) -> np.ndarray:
    k = np.fft.fftfreq(n, d=1.0 / n)
    k.setflags(write=False)
    return k


@functools.lru_cache(maxsize=16)
def _xi_stack(n: int) -> np.ndarray:
    k = _wavenumbers(n)
    xi = np.stack(np.meshgrid(k, k, k, indexing="ij"))
    xi.setflags(write=False)
    return xi


@functools.lru_cache(maxsize=16)
def _xi_abs(n: int) -> np.ndarray:
    a = np.sqrt(np.sum(_xi_stack(n) ** 2, axis=0))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``n^3`` grid on the cube [0, 2pi)^3."""

    n: int
    dealias_fraction: Fraction = Fraction(2, 3)

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {n!r}")
        frac = Fraction(self.dealias_fraction)
        if not (0 < frac <= 1):
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {frac}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "dealias_fraction", frac)

    @property
    def shape(self) -> tuple:
        return (self.n, self.n, self.n)

    @property
    def k(self) -> np.ndarray:
        """Integer wavenumbers along one axis, FFT order."""
        return _wavenumbers(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Frequency vectors, shape ``(3, n, n, n)``."""
        return _xi_stack(self.n)

    @property
    def xi_abs(self) -> np.ndarray:
        return _xi_abs(self.n)

    @property
    def dealias_bound(self) -> float:
        """Largest per-axis frequency an input to a product may carry."""
        return float(self.dealias_fraction) * self.n / 2

    def points(self) -> np.ndarray:
        """Physical sample coordinates, shape ``(3, n, n, n)``."""
        x = TWO_PI * np.arange(self.n) / self.n
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))

    def index_of(self, xi) -> tuple:
        """Array index of an integer frequency vector."""
        xi = np.asarray(xi)
        if xi.shape != (3,) or np.any(np.abs(xi) > self.n // 2):
            raise ValueError(f"frequency {xi!r} is not representable on n={self.n}")
        return tuple(int(v) % self.n for v in xi)


@dataclass(eq=False)
class SpectralField:
    """Fourier coefficients of a scalar or 3-vector field.

    ``coeffs`` has shape ``(components, n, n, n)``.
    """

    grid: GridSpec
    coeffs: np.ndarray
    divergence_free: bool = field(default=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim == 3:
            c = c[None]
        if c.ndim != 4 or c.shape[1:] != self.grid.shape or c.shape[0] not in (1, 3):
            raise ValueError(
                f"coefficient shape {c.shape} does not match grid n={self.grid.n}"
            )
        self.coeffs = c

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: GridSpec, components: int = 3) -> "SpectralField":
        return cls(grid, np.zeros((components,) + grid.shape, dtype=np.complex128))

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.divergence_free)

    def with_coeffs(self, coeffs: np.ndarray, divergence_free: Optional[bool] = None):
        flag = self.divergence_free if divergence_free is None else divergence_free
        return SpectralField(self.grid, coeffs, flag)

    def multiply(self, symbol: np.ndarray) -> "SpectralField":
        """Apply a scalar Fourier multiplier (broadcast over components)."""
        return self.with_coeffs(self.coeffs * symbol)

    def _check(self, other: "SpectralField"):
        if other.grid != self.grid or other.components != self.components:
            raise ValueError("fields live on different grids or component counts")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs,
                             self.divergence_free and other.divergence_free)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs,
                             self.divergence_free and other.divergence_free)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def inner(self, other: "SpectralField", s: float = 0.0) -> complex:
        """Homogeneous H^s inner product, zero mode excluded."""
        self._check(other)
        w = sobolev_weight(self.grid, s)
        return complex(np.sum(w * self.coeffs * np.conj(other.coeffs)) / VOLUME)

    def support_radius(self) -> float:
        """Largest |xi| carrying a nonzero coefficient (0 for the zero field)."""
        nz = np.any(self.coeffs != 0, axis=0)
        return float(self.grid.xi_abs[nz].max()) if nz.any() else 0.0

    def support_linf(self) -> int:
        """Largest per-axis |xi_i| carrying a nonzero coefficient."""
        nz = np.any(self.coeffs != 0, axis=0)
        if not nz.any():
            return 0
        return int(np.abs(self.grid.xi[:, nz]).max())


def sobolev_weight(grid: GridSpec, s: float) -> np.ndarray:
    """``|xi|^(2s)`` off the origin, 0 at the origin."""
    a = grid.xi_abs
    with np.errstate(divide="ignore"):
        w = np.where(a > 0, a, 1.0) ** (2.0 * s)
    w[0, 0, 0] = 0.0
    return w


def dft_forward(samples, grid: GridSpec) -> SpectralField:
    """Physical samples (``(n,n,n)`` or ``(c,n,n,n)``) to coefficients."""
    f = np.asarray(samples)
    if f.shape[-3:] != grid.shape or f.ndim not in (3, 4):
        raise ValueError(f"sample shape {f.shape} does not match grid n={grid.n}")
    scale = (TWO_PI / grid.n) ** 3
    return SpectralField(grid, sfft.fftn(f, axes=(-3, -2, -1), workers=fft_workers()) * scale)


def dft_inverse(spec: SpectralField) -> np.ndarray:
    """Coefficients to physical samples; shape ``(c, n, n, n)``."""
    n = spec.grid.n
    scale = n**3 / VOLUME
    return sfft.ifftn(spec.coeffs, axes=(-3, -2, -1), workers=fft_workers()) * scale


def dft_inverse_real(spec: SpectralField) -> np.ndarray:
    """Real part of :func:`dft_inverse` for fields known to be real."""
    return dft_inverse(spec).real


def l2_norm(spec: SpectralField) -> float:
    return float(np.sqrt(np.sum(np.abs(spec.coeffs) ** 2) / VOLUME))


def sobolev_norm(spec: SpectralField, s: float) -> float:
    """Homogeneous H^s norm; the zero mode never counts."""
    s = float(s)
    if not np.isfinite(s):
        raise ValueError("Sobolev index must be finite")
    w = sobolev_weight(spec.grid, s)
    return float(np.sqrt(np.sum(w * np.abs(spec.coeffs) ** 2) / VOLUME))


def gradient(spec: SpectralField) -> SpectralField:
    """Gradient of a scalar field via the multiplier ``i xi``."""
    if spec.components != 1:
        raise ValueError("gradient expects a scalar field")
    return SpectralField(spec.grid, 1j * spec.grid.xi * spec.coeffs[0])


def divergence(spec: SpectralField) -> SpectralField:
    if spec.components != 3:
        raise ValueError("divergence expects a vector field")
    return SpectralField(spec.grid, np.sum(1j * spec.grid.xi * spec.coeffs, axis=0))


def leray_project(u: SpectralField) -> SpectralField:
    """Remove the longitudinal part ``xi (xi . u_hat) / |xi|^2``."""
    if u.components != 3:
        raise ValueError("Leray projection needs a 3-component field")
    xi = u.grid.xi
    a2 = u.grid.xi_abs**2
    a2 = np.where(a2 > 0, a2, 1.0)
    dot = np.sum(xi * u.coeffs, axis=0) / a2
    out = u.coeffs - xi * dot
    return SpectralField(u.grid, out, divergence_free=True)


def riesz_composition(f: SpectralField, i: int, j: int) -> SpectralField:
    """Apply ``R_i R_j`` with symbol ``-xi_i xi_j / |xi|^2`` (zero at the origin)."""
    xi = f.grid.xi
    a2 = f.grid.xi_abs**2
    sym = np.where(a2 > 0, -xi[i] * xi[j] / np.where(a2 > 0, a2, 1.0), 0.0)
    return f.multiply(sym)


def hermitian_part(coeffs: np.ndarray) -> np.ndarray:
    """Symmetrize so that ``c(-xi) = conj c(xi)`` (the real-field projection)."""
    flipped = np.roll(np.flip(coeffs, axis=(-3, -2, -1)), 1, axis=(-3, -2, -1))
    return 0.5 * (coeffs + np.conj(flipped))


def hermitian_defect(spec: SpectralField) -> float:
    c = spec.coeffs
    flipped = np.roll(np.flip(c, axis=(-3, -2, -1)), 1, axis=(-3, -2, -1))
    scale = max(np.abs(c).max(), 1e-300)
    return float(np.abs(c - np.conj(flipped)).max() / scale)


def power_profile(exponent: float) -> Callable[[np.ndarray], np.ndarray]:
    """Amplitude profile ``|xi|^exponent``."""

    def profile(r):
        return np.where(r > 0, np.where(r > 0, r, 1.0) ** exponent, 0.0)

    profile.exponent = exponent
    return profile


def random_divfree_field(
    grid: GridSpec,
    seed: int,
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    support: tuple = (1.0, None),
) -> SpectralField:
    """Real, divergence-free Gaussian field on a frequency annulus.

    ``support = (r_min, r_max)`` is closed on both ends; ``r_max=None`` means
    the largest radius allowed by the dealiasing bound.
    """
    profile = power_profile(-2.0) if profile is None else profile
    r_min, r_max = support
    bound = grid.dealias_bound
    if r_max is None:
        r_max = bound
    if r_max > bound or r_min > r_max or r_max <= 0:
        raise ValueError(
            f"support annulus [{r_min}, {r_max}] is empty or exceeds the "
            f"representable bound {bound:.3f} on n={grid.n}"
        )
    a = grid.xi_abs
    shell = (a >= r_min) & (a <= r_max) & (a > 0)
    # Nyquist planes have no partner under xi -> -xi
    shell &= np.all(np.abs(grid.xi) < grid.n // 2, axis=0)
    if not shell.any():
        raise ValueError(f"support annulus [{r_min}, {r_max}] contains no lattice points")
    amp = np.where(shell, profile(a), 0.0)
    if np.any(amp < 0):
        raise ValueError("profile must be nonnegative")

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((3,) + grid.shape) + 1j * rng.standard_normal((3,) + grid.shape)
    coeffs = hermitian_part(z * amp)
    u = leray_project(SpectralField(grid, coeffs))
    if sobolev_norm(u, 0.5) == 0.0:
        raise ValueError("generated field vanished; support too small for a solenoidal field")
    return u
