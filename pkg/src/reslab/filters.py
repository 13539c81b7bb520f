"""Dyadic Littlewood-Paley masks and angular cap partitions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .spectral import GridSpec, SpectralField


def _exp_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(r):
    """C-infinity cutoff equal to 1 on r <= 1 and 0 on r >= 2."""
    r = np.asarray(r, dtype=float)
    a = _exp_bump(2.0 - r)
    b = _exp_bump(r - 1.0)
    return a / (a + b)


def linear_step(r):
    """Piecewise-linear cutoff on [1, 2]; continuous only, kept for comparisons."""
    return np.clip(2.0 - np.asarray(r, dtype=float), 0.0, 1.0)


PROFILES: Dict[str, Callable] = {"smooth": smooth_step, "linear": linear_step}


def phi(r, profile: Callable = smooth_step):
    return profile(r)


def psi(r, profile: Callable = smooth_step):
    """Shell cutoff ``phi(r) - phi(2r)``, supported in [1/2, 2]."""
    r = np.asarray(r, dtype=float)
    return profile(r) - profile(2.0 * r)


def _resolve_profile(profile) -> Callable:
    if callable(profile):
        return profile
    try:
        return PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown transition profile {profile!r}") from None


@dataclass
class DyadicBank:
    grid: GridSpec
    k_min: int
    k_max: int
    profile: Callable = smooth_step
    masks: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def scales(self) -> list:
        return [2**k for k in range(self.k_min, self.k_max + 1)]

    def _k(self, N) -> int:
        k = int(round(math.log2(N))) if N > 0 else None
        if k is None or 2**k != N or not (self.k_min <= k <= self.k_max):
            raise ValueError(
                f"N={N} is not a dyadic scale in [2^{self.k_min}, 2^{self.k_max}]"
            )
        return k

    def mask(self, N) -> np.ndarray:
        return self.masks[self._k(N)]

    def low_mask(self, N) -> np.ndarray:
        """Symbol of P_{<=N}: ``phi(|xi| / N)``."""
        return self.profile(self.grid.xi_abs / float(N))

    def low_sum_mask(self, N_top) -> np.ndarray:
        """Sum of the shell masks over all bank scales ``M <= N_top``."""
        out = np.zeros(self.grid.shape)
        for M in self.scales:
            if M <= N_top:
                out += self.masks[self._k(M)]
        return out


def build_dyadic_bank(grid: GridSpec, k_min: int = 0, k_max: Optional[int] = None,
                      transition_profile="smooth") -> DyadicBank:
    """Precompute ``psi(|xi|/2^k)`` for ``k_min <= k <= k_max``."""
    profile = _resolve_profile(transition_profile)
    top = int(math.log2(grid.n // 2)) - 1
    if k_max is None:
        k_max = top
    if k_min > k_max:
        raise ValueError(f"empty dyadic range k_min={k_min} > k_max={k_max}")
    if 2 ** (k_max + 1) > grid.n // 2:
        raise ValueError(
            f"k_max={k_max} needs frequencies up to {2 ** (k_max + 1)}, "
            f"beyond n/2={grid.n // 2}"
        )
    a = grid.xi_abs
    masks = {}
    for k in range(k_min, k_max + 1):
        m = psi(a / 2.0**k, profile)
        m.setflags(write=False)
        masks[k] = m
    return DyadicBank(grid, k_min, k_max, profile, masks)


def project_dyadic(f: SpectralField, bank: DyadicBank, N) -> SpectralField:
    return f.multiply(bank.mask(N))


def project_leq(f: SpectralField, bank: DyadicBank, N) -> SpectralField:
    bank._k(N)
    return f.multiply(bank.low_mask(N))


# ---------------------------------------------------------------------------
# angular caps


def fibonacci_directions(count: int) -> np.ndarray:
    """Quasi-uniform unit vectors from the golden-angle spiral."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    t = golden * np.arange(count)
    return np.stack([r * np.cos(t), r * np.sin(t), z], axis=1)


COVERINGS = {"fibonacci": fibonacci_directions}


@dataclass
class CapWeights:
    """Normalized cap bumps evaluated on the lattice points of one shell."""

    grid: GridSpec
    flat_index: np.ndarray
    raw: list
    total: np.ndarray
    shell: np.ndarray

    def chi(self, j: int) -> np.ndarray:
        """Full-grid symbol ``chi_{N,theta_j}(xi) psi(|xi|/N)``."""
        out = np.zeros(self.grid.n**3)
        cols, vals = self.raw[j]
        out[self.flat_index[cols]] = vals / self.total[cols] * self.shell[cols]
        return out.reshape(self.grid.shape)


@dataclass
class CapSet:
    N: int
    directions: np.ndarray
    aperture: float
    covering: str
    count_factor: float
    profile: Callable = smooth_step
    _weights: Dict[int, CapWeights] = field(default_factory=dict, repr=False)

    @property
    def count(self) -> int:
        return len(self.directions)

    def min_spacing(self) -> float:
        g = np.clip(self.directions @ self.directions.T, -1.0, 1.0)
        np.fill_diagonal(g, -1.0)
        return float(np.arccos(g.max(axis=1)).min())

    def count_constants(self) -> tuple:
        """``(c1, c2)`` with ``c1 N <= count <= c2 N``; equal for this builder."""
        return (self.count / self.N, self.count / self.N)

    def index(self, theta) -> int:
        if isinstance(theta, (int, np.integer)):
            if not 0 <= theta < self.count:
                raise ValueError(f"cap index {theta} out of range [0, {self.count})")
            return int(theta)
        v = np.asarray(theta, dtype=float)
        d = np.linalg.norm(self.directions - v / np.linalg.norm(v), axis=1)
        j = int(np.argmin(d))
        if d[j] > 1e-12:
            raise ValueError(f"direction {theta!r} is not a cap centre for N={self.N}")
        return j

    def raw_bump(self, cosines: np.ndarray) -> np.ndarray:
        ang = np.arccos(np.clip(cosines, -1.0, 1.0))
        return self.profile(ang / self.aperture)

    def weights(self, grid: GridSpec) -> CapWeights:
        if grid.n in self._weights:
            return self._weights[grid.n]
        a = grid.xi_abs.ravel()
        shell_all = psi(a / self.N, self.profile)
        flat = np.nonzero(shell_all > 0)[0]
        unit = grid.xi.reshape(3, -1)[:, flat] / a[flat]
        total = np.zeros(flat.size)
        raw = []
        # angular support of each bump is below 2*aperture
        cos_cut = math.cos(min(math.pi, 2.0 * self.aperture))
        for d in self.directions:
            c = d @ unit
            cols = np.nonzero(c > cos_cut)[0]
            vals = self.raw_bump(c[cols])
            keep = vals > 0
            cols, vals = cols[keep], vals[keep]
            total[cols] += vals
            raw.append((cols, vals))
        if np.any(total <= 0):
            raise ValueError(
                f"cap family for N={self.N} leaves shell directions uncovered; "
                "increase the direction count"
            )
        w = CapWeights(grid, flat, raw, total, shell_all[flat])
        self._weights[grid.n] = w
        return w


def build_caps(N: int, covering: str = "fibonacci", count_factor: float = 2.0,
               profile="smooth") -> CapSet:
    """Caps of aperture ``N^-1/2`` centred on ``ceil(count_factor * N)`` directions."""
    if N < 4:
        raise ValueError(f"caps need N >= 4, got {N}")
    try:
        gen = COVERINGS[covering]
    except KeyError:
        raise ValueError(f"unknown covering strategy {covering!r}") from None
    count = int(math.ceil(count_factor * N))
    dirs = gen(count)
    return CapSet(N, dirs, N**-0.5, covering, count_factor, _resolve_profile(profile))


def project_cap(f: SpectralField, caps: CapSet, theta) -> SpectralField:
    j = caps.index(theta)
    return f.multiply(caps.weights(f.grid).chi(j))
