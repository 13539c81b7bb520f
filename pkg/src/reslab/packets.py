"""Wave packets adapted to a frequency cap: masks, frames and localization.

A packet at scale ``lam`` and direction ``theta`` has Fourier transform

    phi_hat(xi) = A * sigma(xi) * exp(-i a . xi).

The mask ``sigma`` is a product of one-dimensional tight windows ``w`` (with
``w(x)^2 + w(x - m)^2 = 1``) in skew coordinates ``y = B^-T xi``, where the
integer rows of ``B`` approximate ``m_perp e1``, ``m_perp e2`` and
``m_par theta``.  The squared mask therefore sums to one over the frequency
lattice ``B^T Z^3``.  Centers run over ``2 pi B^-1 Z^3`` modulo the torus,
``M = |det B|`` of them, and ``A = sqrt((2 pi)^3 / M)``.  Every packet has unit
L2 norm and the translates form a Parseval frame for their span.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .kernels import exp_sum
from .spectral import TWO_PI, VOLUME, GridSpec, SpectralField, dft_inverse, l2_norm


def _g(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def tight_window(x, m: float, t: float) -> np.ndarray:
    """Smooth window with plateau ``|x| <= (m-t)/2`` and support ``|x| < (m+t)/2``.

    Squares of translates by ``m`` sum to one.
    """
    if not (0 < t <= m):
        raise ValueError(f"transition width must lie in (0, m], got t={t}, m={m}")
    a = np.abs(np.asarray(x, dtype=float))
    u = np.clip((a - m / 2.0) / (t / 2.0), -1.0, 1.0)
    h = _g(1.0 - u) / (_g(1.0 - u) + _g(1.0 + u))
    w2 = np.where(a <= (m - t) / 2.0, 1.0, np.where(a >= (m + t) / 2.0, 0.0, h))
    return np.sqrt(w2)


@dataclass(frozen=True)
class PacketParams:
    """Window periods and transition widths along the radial and transverse axes."""

    m_par: int
    t_par: float
    m_perp: int
    t_perp: float

    def __post_init__(self):
        for m, t in ((self.m_par, self.t_par), (self.m_perp, self.t_perp)):
            if int(m) != m or m < 2 or not (0 < t <= m):
                raise ValueError(f"bad window parameters m={m}, t={t}")

    @classmethod
    def for_scale(cls, lam: int) -> "PacketParams":
        """Default widths: radial period ~ 1.375 lam, transverse ~ 2.12 lam^(1/2)."""
        m_par = max(4, int(round(1.375 * lam)))
        m_perp = max(3, int(round(2.12 * math.sqrt(lam))))
        return cls(m_par, max(1.0, round(0.18 * m_par)), m_perp, m_perp / 3.0)

    def half_support(self) -> tuple:
        """Open half-widths (radial, transverse) of the mask support."""
        return (self.m_par + self.t_par) / 2.0, (self.m_perp + self.t_perp) / 2.0


def packet_frame(theta) -> np.ndarray:
    """Rows ``(e1, e2, theta)``; an orthonormal, right-handed frame.

    ``e1`` comes from the coordinate axis least aligned with ``theta`` so that
    ``theta = e3`` yields the identity.
    """
    th = np.asarray(theta, dtype=float)
    nrm = np.linalg.norm(th)
    if th.shape != (3,) or nrm == 0:
        raise ValueError("theta must be a nonzero 3-vector")
    th = th / nrm
    ref = np.zeros(3)
    ref[int(np.argmin(np.abs(th)))] = 1.0
    e1 = ref - (ref @ th) * th
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(th, e1)
    return np.stack([e1, e2, th])


@functools.lru_cache(maxsize=256)
def _basis_cached(theta: tuple, params: PacketParams) -> np.ndarray:
    frame = packet_frame(np.array(theta))
    B = np.rint(frame * np.array([params.m_perp, params.m_perp, params.m_par])[:, None])
    B = B.astype(np.int64)
    if round(abs(np.linalg.det(B))) == 0:
        raise ValueError(f"degenerate packet lattice for theta={theta}")
    B.setflags(write=False)
    return B


def lattice_basis(theta, params: PacketParams) -> np.ndarray:
    """Integer rows ``(b1, b2, b3)`` close to ``(m_perp e1, m_perp e2, m_par theta)``.

    Translates of the mask by the lattice they span tile frequency space, and
    the packet direction is ``b3 / |b3|``.
    """
    th = packet_frame(theta)[2]
    return _basis_cached(tuple(float(v) for v in th), params)


def snapped_direction(theta, params: PacketParams) -> np.ndarray:
    b3 = lattice_basis(theta, params)[2].astype(float)
    return b3 / np.linalg.norm(b3)


def required_grid(lam: int, params: Optional[PacketParams] = None) -> int:
    """Smallest power-of-two grid (at least 16) holding the packet mask for every direction."""
    params = PacketParams.for_scale(lam) if params is None else params
    hp, ht = params.half_support()
    # skew coordinates stretch the support slightly; 5% covers the rounding
    reach = 1.05 * math.sqrt((lam + hp) ** 2 + 2 * ht**2)
    n = 16
    while n // 2 <= reach:
        n *= 2
    return n


def _skew_coords(B: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``y`` with ``xi = B^T y``; ``xi`` has shape ``(3, ...)``."""
    inv = np.linalg.inv(B.T.astype(float))
    return np.tensordot(inv, xi, axes=(1, 0))


# a 256^3 mask is 128 MB, so keep only a handful
@functools.lru_cache(maxsize=4)
def _mask_cached(n: int, lam: int, theta: tuple, params: PacketParams):
    grid = GridSpec(n)
    B = _basis_cached(theta, params)
    shift = lam / np.linalg.norm(B[2])
    # the support is the parallelepiped |y1|, |y2| < h_perp, |y3 - shift| < h_par in xi = B^T y
    h_par = (params.m_par + params.t_par) / (2.0 * params.m_par)
    h_perp = (params.m_perp + params.t_perp) / (2.0 * params.m_perp)
    absB = np.abs(B.astype(float))
    reach = absB[2] * shift + absB[2] * h_par + (absB[0] + absB[1]) * h_perp
    if np.any(reach >= n // 2):
        raise ValueError(
            f"packet mask at lambda={lam} does not fit on n={n}; need n >= {required_grid(lam, params)}"
        )
    xi = grid.xi
    y = _skew_coords(B, xi)
    sigma = (tight_window(params.m_par * (y[2] - shift), params.m_par, params.t_par)
             * tight_window(params.m_perp * y[0], params.m_perp, params.t_perp)
             * tight_window(params.m_perp * y[1], params.m_perp, params.t_perp))
    sigma.setflags(write=False)
    return sigma


def packet_mask(grid: GridSpec, lam: int, theta, params: Optional[PacketParams] = None) -> np.ndarray:
    """The real mask ``sigma`` on the full grid."""
    params = PacketParams.for_scale(lam) if params is None else params
    th = packet_frame(theta)[2]
    return _mask_cached(grid.n, int(lam), tuple(float(v) for v in th), params)


@dataclass(eq=False)
class WavePacket:
    lam: int
    theta: np.ndarray
    center: np.ndarray
    params: PacketParams
    field: SpectralField = field(repr=False)

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    @property
    def direction(self) -> np.ndarray:
        """Carrier direction after snapping to the lattice."""
        return snapped_direction(self.theta, self.params)

    @property
    def frame(self) -> np.ndarray:
        return packet_frame(self.direction)

    def norm(self) -> float:
        return l2_norm(self.field)


def build_packet(lam: int, theta, a=(0.0, 0.0, 0.0), envelope: Optional[PacketParams] = None,
                 grid: Optional[GridSpec] = None) -> WavePacket:
    """Packet centered at the physical point ``a``."""
    if lam < 2 or lam & (lam - 1):
        raise ValueError(f"lambda must be a power of two >= 2, got {lam}")
    params = PacketParams.for_scale(lam) if envelope is None else envelope
    grid = GridSpec(required_grid(lam, params)) if grid is None else grid
    th = packet_frame(theta)[2]
    a = np.asarray(a, dtype=float)
    sigma = packet_mask(grid, lam, th, params)
    count = abs(round(np.linalg.det(lattice_basis(th, params))))
    phase = np.exp(-1j * np.tensordot(a, grid.xi, axes=(0, 0)))
    coeffs = math.sqrt(VOLUME / count) * sigma * phase
    return WavePacket(lam, th, a, params, SpectralField(grid, coeffs))


def _wrap(d):
    return (d + np.pi) % TWO_PI - np.pi


def tube_mass_fraction(p: WavePacket, multiple: float) -> float:
    """Share of ``||p||^2`` within the tube of ``multiple`` times the packet scales.

    Distances are measured from the center with the minimum-image convention.
    """
    if not multiple >= 1:
        raise ValueError(f"multiple must be >= 1, got {multiple}")
    dens = np.abs(dft_inverse(p.field)[0]) ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    if math.isinf(multiple):
        return 1.0
    d = _wrap(p.grid.points() - p.center[:, None, None, None])
    c = np.tensordot(p.frame, d, axes=(1, 0))
    inside = (np.abs(c[2]) <= multiple / p.lam) & (np.hypot(c[0], c[1]) <= multiple / math.sqrt(p.lam))
    return float(dens[inside].sum() / total)


def _lattice_labels(B: np.ndarray) -> np.ndarray:
    """Integer ``k`` with ``B^-1 k`` in ``[0, 1)^3``: one label per center modulo the torus."""
    det = int(round(np.linalg.det(B)))
    adj = np.rint(np.linalg.inv(B) * det).astype(np.int64)
    corners = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)]) @ B.T
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(3)]
    k = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    # B^-1 = adj / det, applied to column vectors k
    x = k @ adj.T
    if det < 0:
        x, det = -x, -det
    keep = np.all((x >= 0) & (x < det), axis=1)
    labels = k[keep]
    if labels.shape[0] != det:
        raise ArithmeticError(f"found {labels.shape[0]} lattice labels, expected {det}")
    return labels


class PacketFamily:
    """All lattice translates of one packet, with analysis and synthesis maps.

    The translates form a Parseval frame for the span of the family; a single
    packet is reproduced exactly by its own expansion.
    """

    def __init__(self, lam: int, theta, params: Optional[PacketParams] = None,
                 grid: Optional[GridSpec] = None):
        self.lam = int(lam)
        self.params = PacketParams.for_scale(lam) if params is None else params
        self.grid = GridSpec(required_grid(lam, self.params)) if grid is None else grid
        self.theta = packet_frame(theta)[2]
        self.basis = lattice_basis(self.theta, self.params)
        self.direction = snapped_direction(self.theta, self.params)
        self.sigma = packet_mask(self.grid, self.lam, self.theta, self.params)
        self.support = self.sigma > 0
        self.labels = _lattice_labels(self.basis)
        self.count = self.labels.shape[0]
        self.amplitude = math.sqrt(VOLUME / self.count)
        off = self.basis - np.diag(np.diag(self.basis))
        self.exact = not off.any()

    def centers(self) -> np.ndarray:
        """Physical centers ``2 pi B^-1 k``, shape ``(M, 3)``."""
        return TWO_PI * np.linalg.solve(self.basis.astype(float), self.labels.T).T

    def packet(self, index: int) -> WavePacket:
        return build_packet(self.lam, self.theta, self.centers()[index], self.params, self.grid)

    def projector(self, f: SpectralField) -> SpectralField:
        """Sharp restriction to the mask support."""
        return f.multiply(self.support)

    # coefficients ---------------------------------------------------------

    def _fold_index(self):
        d = np.abs(np.diag(self.basis))
        xi = np.rint(self.grid.xi[:, self.support]).astype(np.int64)
        res = tuple(xi[i] % d[i] for i in range(3))
        lab = tuple(np.abs(self.labels[:, i]) for i in range(3))
        return d, res, lab

    def analysis(self, f: SpectralField, exact: Optional[bool] = None) -> np.ndarray:
        """``<f, phi_a>`` for every center, shape ``(M,)`` (or ``(components, M)``)."""
        exact = self.exact if exact is None else exact
        if exact and not self.exact:
            raise ValueError("the folded path needs an axis-aligned lattice")
        scale = self.amplitude / VOLUME
        w = f.coeffs[:, self.support] * self.sigma[self.support] * scale
        if exact:
            d, res, lab = self._fold_index()
            out = []
            for wc in w:
                folded = np.zeros(tuple(d), dtype=np.complex128)
                np.add.at(folded, res, wc)
                out.append((sfft.ifftn(folded) * self.count)[lab])
            out = np.stack(out)
        else:
            freqs = self.grid.xi[:, self.support].T
            targets = self.centers()
            zeros = np.zeros(targets.shape[0])
            out = np.stack([exp_sum(freqs, wc, targets, zeros) for wc in w])
        return out[0] if f.components == 1 else out

    def synthesis(self, coef: np.ndarray, exact: Optional[bool] = None) -> SpectralField:
        """``sum_a coef[a] phi_a`` for a scalar coefficient vector."""
        exact = self.exact if exact is None else exact
        coef = np.asarray(coef, dtype=np.complex128).reshape(-1)
        out = np.zeros(self.grid.shape, dtype=np.complex128)
        if exact:
            d, res, lab = self._fold_index()
            box = np.zeros(tuple(d), dtype=np.complex128)
            box[lab] = coef
            vals = sfft.fftn(box)[res]
        else:
            freqs = -self.centers()
            targets = self.grid.xi[:, self.support].T
            vals = exp_sum(freqs, coef, targets, np.zeros(targets.shape[0]))
        out[self.support] = self.amplitude * self.sigma[self.support] * vals
        return SpectralField(self.grid, out)

    def random_cap_field(self, rng: np.random.Generator) -> SpectralField:
        """Complex Gaussian coefficients times the mask: a random cap-localized field."""
        z = rng.standard_normal(self.grid.shape) + 1j * rng.standard_normal(self.grid.shape)
        return SpectralField(self.grid, z * self.sigma)


def frame_ratio(f: SpectralField, family: PacketFamily) -> Optional[float]:
    """``sum_a |<f, phi_a>|^2 / ||P f||^2``; ``None`` when ``P f`` vanishes."""
    den = l2_norm(family.projector(f)) ** 2
    if den == 0.0:
        return None
    c = family.analysis(f)
    return float(np.sum(np.abs(c) ** 2) / den)


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    ratios: tuple
    skipped: int


def packet_frame_bounds(lam: int, theta, trials: int, seed: int,
                        params: Optional[PacketParams] = None,
                        grid: Optional[GridSpec] = None) -> FrameBounds:
    """Frame-ratio extremes over ``trials`` random cap-localized fields."""
    if trials < 10:
        raise ValueError("need at least 10 trials")
    fam = PacketFamily(lam, theta, params, grid)
    rng = np.random.default_rng(seed)
    ratios = []
    skipped = 0
    for _ in range(trials):
        r = frame_ratio(fam.random_cap_field(rng), fam)
        if r is None:
            skipped += 1
        else:
            ratios.append(r)
    if not ratios:
        return FrameBounds(float("nan"), float("nan"), (), skipped)
    return FrameBounds(min(ratios), max(ratios), tuple(ratios), skipped)


@dataclass(frozen=True)
class Reconstruction:
    field: SpectralField
    error: float


def reconstruct_from_packets(f: SpectralField, lam: int, theta,
                             params: Optional[PacketParams] = None) -> Reconstruction:
    """Packet expansion of ``f`` and its relative L2 distance to the cap projection."""
    fam = PacketFamily(lam, theta, params, f.grid)
    if f.components != 1:
        raise ValueError("packet reconstruction acts on scalar fields")
    rec = fam.synthesis(fam.analysis(f))
    target = fam.projector(f)
    den = l2_norm(target)
    err = 0.0 if den == 0.0 else l2_norm(rec - target) / den
    return Reconstruction(rec, float(err))
