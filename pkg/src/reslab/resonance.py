"""Resonant high-high interaction block, narrow block, null-form symbol.

Products are evaluated on a zero-padded grid large enough that every
output frequency kept on the working box is alias-free; the dealiasing
fraction of the grid bounds the *inputs* of a product.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.fft as sfft

from .filters import DyadicBank, build_dyadic_bank
from .spectral import (
    TWO_PI,
    VOLUME,
    GridSpec,
    SpectralField,
    fft_workers,
    sobolev_norm,
)


class AliasingError(ValueError):
    """Raised when a product input reaches past the dealiasing bound."""


class DegenerateInputError(ValueError):
    """Raised when a normalizing norm vanishes."""


class VacuousBlockError(ValueError):
    """Raised when the narrow low-pass ball contains no nonzero lattice point."""


@functools.lru_cache(maxsize=8)
def default_bank(grid: GridSpec) -> DyadicBank:
    return build_dyadic_bank(grid, 0, None)


@functools.lru_cache(maxsize=8)
def _padding(n: int, frac: Fraction):
    bound = float(frac) * n / 2
    M = sfft.next_fast_len(int(math.floor(2 * bound + n / 2)) + 1)
    idx = np.fft.fftfreq(n, d=1.0 / n).astype(int) % M
    return M, np.ix_(idx, idx, idx)


def _check_alias(*fields: SpectralField):
    for f in fields:
        lim = f.grid.dealias_bound
        k = f.support_linf()
        if k > lim:
            raise AliasingError(
                f"product input reaches |xi_i| = {k}, beyond the dealias bound "
                f"{lim:.3f} on n={f.grid.n}"
            )


def _to_padded_physical(f: SpectralField) -> np.ndarray:
    n = f.grid.n
    M, sel = _padding(n, f.grid.dealias_fraction)
    big = np.zeros((f.components, M, M, M), dtype=np.complex128)
    big[(slice(None),) + sel] = f.coeffs
    return sfft.ifftn(big, axes=(1, 2, 3), workers=fft_workers()) * (M**3 / VOLUME)


def _from_padded_physical(g: np.ndarray, grid: GridSpec) -> np.ndarray:
    M, sel = _padding(grid.n, grid.dealias_fraction)
    big = sfft.fftn(g, axes=(-3, -2, -1), workers=fft_workers()) * (TWO_PI / M) ** 3
    return big[(Ellipsis,) + sel]


_PAIRS = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]


def _divergence_of_symmetric(T: dict, grid: GridSpec) -> np.ndarray:
    """``out_i = i xi_j T_ij`` for a symmetric tensor stored by unordered pair."""
    xi = grid.xi
    out = np.zeros((3,) + grid.shape, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            out[i] += 1j * xi[j] * T[(min(i, j), max(i, j))]
    return out


def _symmetric_products(grid: GridSpec, phys_pairs) -> dict:
    """Fourier transforms of ``sum_k a_k[i] b_k[j]`` (symmetrized) for each pair."""
    T = {}
    for (i, j) in _PAIRS:
        acc = 0
        for a, b in phys_pairs:
            if a is b:
                acc = acc + a[i] * a[j]
            else:
                acc = acc + 0.5 * (a[i] * b[j] + a[j] * b[i])
        T[(i, j)] = _from_padded_physical(acc, grid)
    return T


def nonlinear_term(u: SpectralField) -> SpectralField:
    """``div(u tensor u)``, which equals ``(u . grad) u`` for solenoidal ``u``."""
    if u.components != 3:
        raise ValueError("nonlinear term needs a vector field")
    _check_alias(u)
    up = _to_padded_physical(u)
    T = _symmetric_products(u.grid, [(up, up)])
    return SpectralField(u.grid, _divergence_of_symmetric(T, u.grid))


@dataclass(frozen=True)
class ResonantConfig:
    N: int
    M_cut: float = 1.0 / 8.0
    delta: float = 2.0 / 3.0
    output_projector: str = "dyadic"

    def __post_init__(self):
        if self.N < 1 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not (0.5 < self.delta < 0.75):
            raise ValueError(f"delta must lie strictly in (1/2, 3/4), got {self.delta}")
        if self.output_projector not in ("dyadic", "leq"):
            raise ValueError(f"unknown output projector {self.output_projector!r}")
        if not self.M_cut > 0:
            raise ValueError("M_cut must be positive")


def resonant_block(u: SpectralField, cfg: ResonantConfig,
                   bank: DyadicBank = None) -> SpectralField:
    """``P_N[div(u u) - div(u_lo u_N) - div(u_N u_lo)]`` with ``u_lo`` the shells ``M <= M_cut N``."""
    if u.components != 3:
        raise ValueError("resonant block needs a vector field")
    bank = default_bank(u.grid) if bank is None else bank
    high_mask = bank.mask(cfg.N)
    _check_alias(u)
    low_mask = bank.low_sum_mask(cfg.M_cut * cfg.N)

    up = _to_padded_physical(u)
    pairs = [(up, up)]
    if np.any(low_mask):
        lo = _to_padded_physical(u.multiply(low_mask))
        hi = _to_padded_physical(u.multiply(high_mask))
        pairs += [(lo, -2.0 * hi)]
    T = _symmetric_products(u.grid, pairs)
    out = _divergence_of_symmetric(T, u.grid)
    proj = high_mask if cfg.output_projector == "dyadic" else bank.low_mask(cfg.N)
    return SpectralField(u.grid, out * proj)


def narrow_radius(lam: float, delta: float, box_scale: float = 1.0) -> float:
    """Low-pass radius in lattice units; ``box_scale`` L maps lattice xi to xi / L."""
    return box_scale ** (1.0 + delta) * lam ** (-delta)


def narrow_block(u: SpectralField, lam: int, delta: float = 2.0 / 3.0,
                 box_scale: float = 1.0, bank: DyadicBank = None) -> SpectralField:
    """``P_{<=rho} div(u_lam u_lam)`` with ``u_lam = P_lam u``."""
    if not (0.5 < delta < 0.75):
        raise ValueError(f"delta must lie strictly in (1/2, 3/4), got {delta}")
    rho = narrow_radius(lam, delta, box_scale)
    if rho < 1.0:
        raise VacuousBlockError(
            f"low-pass radius {rho:.4g} < 1: narrow block is vacuous on n={u.grid.n} "
            f"(lambda={lam}, delta={delta}, box_scale={box_scale})"
        )
    bank = default_bank(u.grid) if bank is None else bank
    ul = u.multiply(bank.mask(lam))
    _check_alias(ul)
    up = _to_padded_physical(ul)
    T = _symmetric_products(u.grid, [(up, up)])
    out = _divergence_of_symmetric(T, u.grid)
    return SpectralField(u.grid, out * bank.profile(u.grid.xi_abs / rho))


def narrow_ratio(u: SpectralField, lam: int, delta: float = 2.0 / 3.0,
                 box_scale: float = 1.0, bank: DyadicBank = None) -> float:
    """``lam * ||R_nar||_{H^-1} / ||P_lam u||_{H^1/2}^2``."""
    bank = default_bank(u.grid) if bank is None else bank
    ul = u.multiply(bank.mask(lam))
    den = sobolev_norm(ul, 0.5) ** 2
    if den == 0.0:
        raise DegenerateInputError(f"P_{lam} u vanishes")
    r = narrow_block(u, lam, delta, box_scale, bank)
    return lam * sobolev_norm(r, -1.0) / den


def hminus_ratio(u: SpectralField, cfg: ResonantConfig, bank: DyadicBank = None) -> float:
    """``N ||R_N(u)||_{H^-1} / (||u||_{H^1/2} ||u||_{H^1})``."""
    a = sobolev_norm(u, 0.5)
    b = sobolev_norm(u, 1.0)
    if a == 0.0 or b == 0.0:
        raise DegenerateInputError("u has vanishing H^1/2 or H^1 norm")
    r = resonant_block(u, cfg, bank)
    return cfg.N * sobolev_norm(r, -1.0) / (a * b)


def rescale_field(u: SpectralField, j: int) -> SpectralField:
    """Move every coefficient from ``xi`` to ``2^j xi`` with weight ``2^(-j/2)``.

    The weight makes ``||u_lam||_{H^s} = lam^(s - 1/2) ||u||_{H^s}`` exact.
    """
    if j < 0:
        raise ValueError("only upward rescaling is grid-exact")
    if j == 0:
        return u.copy()
    lam = 2**j
    n = u.grid.n
    k = u.grid.k.astype(int)
    keep = np.abs(k) * lam < n // 2
    src = np.nonzero(keep)[0]
    dst = (k[keep] * lam) % n
    inner = np.zeros(u.grid.shape, dtype=bool)
    inner[np.ix_(src, src, src)] = True
    if np.any(u.coeffs[:, ~inner] != 0):
        raise ValueError(
            f"support of u does not fit on n={n} after scaling by {lam}"
        )
    out = np.zeros_like(u.coeffs)
    out[(slice(None),) + np.ix_(dst, dst, dst)] = u.coeffs[(slice(None),) + np.ix_(src, src, src)]
    return u.with_coeffs(out * lam**-0.5)


# ---------------------------------------------------------------------------
# null form


@dataclass(frozen=True)
class NullFormSample:
    xi: np.ndarray
    eta: np.ndarray
    matrix: np.ndarray
    op_norm: float
    sin_angle: float
    bound: float


def _sin_angle(a, b):
    c = np.cross(a, b)
    return np.linalg.norm(c, axis=-1) / (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1))


def nullform_symbol(xi, eta, lam: float = None) -> NullFormSample:
    """``xi xi^T/|xi|^2 - eta eta^T/|eta|^2`` with its spectral norm.

    ``bound`` is ``|xi + eta| / lam`` where ``lam`` defaults to
    ``max(|xi|, |eta|)``.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    nx, ne = np.linalg.norm(xi), np.linalg.norm(eta)
    if nx == 0 or ne == 0:
        raise ValueError("null-form symbol needs nonzero frequencies")
    m = np.outer(xi, xi) / nx**2 - np.outer(eta, eta) / ne**2
    op = float(np.abs(np.linalg.eigvalsh(m)).max())
    s = float(_sin_angle(xi, eta))
    if abs(op - s) > 1e-12:
        raise ArithmeticError(f"null-form norm {op} disagrees with sin angle {s}")
    lam = max(nx, ne) if lam is None else lam
    return NullFormSample(xi, eta, m, op, s, float(np.linalg.norm(xi + eta) / lam))


def nullform_opnorms(xi: np.ndarray, eta: np.ndarray) -> tuple:
    """Batched spectral norms and sines for ``(K, 3)`` arrays."""
    px = xi / np.linalg.norm(xi, axis=1, keepdims=True)
    pe = eta / np.linalg.norm(eta, axis=1, keepdims=True)
    m = px[:, :, None] * px[:, None, :] - pe[:, :, None] * pe[:, None, :]
    op = np.abs(np.linalg.eigvalsh(m)).max(axis=1)
    return op, _sin_angle(xi, eta)
