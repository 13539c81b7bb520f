"""Wave and heat propagation, space-time Lebesgue norms and kernel diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from .kernels import exp_sum
from .packets import PacketFamily, PacketParams
from .resonance import DegenerateInputError
from .spectral import VOLUME, GridSpec, SpectralField, dft_inverse, l2_norm


def wave_propagate(f: SpectralField, t: float) -> SpectralField:
    """Half-wave group ``exp(i t |D|)``."""
    return f.multiply(np.exp(1j * t * f.grid.xi_abs))


def heat_propagate(f: SpectralField, t: float) -> SpectralField:
    """Heat semigroup ``exp(t Laplacian)``, forward in time only."""
    if t < 0:
        raise ValueError(f"heat flow needs t >= 0, got {t}")
    return f.multiply(np.exp(-t * f.grid.xi_abs**2))


FLOWS = {"wave": wave_propagate, "heat": heat_propagate}


@dataclass(frozen=True)
class TimeWindow:
    t0: float
    length: float
    nt: int = 8

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"window length must be positive, got {self.length}")
        if self.nt < 8:
            raise ValueError(f"need at least 8 time nodes, got {self.nt}")

    @classmethod
    def for_scale(cls, lam: float, nt: int = 8, t0: float = 0.0) -> "TimeWindow":
        return cls(t0, lam ** -0.5, nt)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.t0 + self.length, self.nt)

    def refined(self) -> "TimeWindow":
        return TimeWindow(self.t0, self.length, 2 * self.nt - 1)


@dataclass(frozen=True)
class SpaceTimeNorm:
    p: int
    value: float
    window: TimeWindow


def _flow(flow) -> Callable:
    if callable(flow):
        return flow
    try:
        return FLOWS[flow]
    except KeyError:
        raise ValueError(f"unknown flow {flow!r}; choose from {sorted(FLOWS)}") from None


def _spatial_pth_power(samples: np.ndarray, grid: GridSpec, p: int) -> float:
    """``int |u|^p dx`` by the grid rule; vector samples use the Euclidean modulus."""
    mod = np.sqrt(np.sum(np.abs(samples) ** 2, axis=0)) if samples.ndim == 4 else np.abs(samples)
    return float(np.sum(mod**p) * VOLUME / grid.n**3)


def _time_lp(profile: Callable[[float], np.ndarray], grid: GridSpec,
             window: TimeWindow, p: int) -> SpaceTimeNorm:
    if p not in (3, 6):
        raise ValueError(f"p must be 3 or 6, got {p}")
    t = window.nodes()
    vals = np.array([_spatial_pth_power(profile(ti), grid, p) for ti in t])
    total = integrate.trapezoid(vals, t)
    return SpaceTimeNorm(p, float(total ** (1.0 / p)), window)


def spacetime_lp_norm(flow, f: SpectralField, window: TimeWindow, p: int) -> SpaceTimeNorm:
    """``||flow(t) f||_{L^p(window x T^3)}`` by the trapezoid rule in time."""
    prop = _flow(flow)
    return _time_lp(lambda t: dft_inverse(prop(f, t)), f.grid, window, p)


def product_lp_norm(flow, f: SpectralField, g: SpectralField,
                    window: TimeWindow, p: int) -> SpaceTimeNorm:
    """Space-time L^p norm of the pointwise product of two evolved scalar fields."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    prop = _flow(flow)

    def prof(t):
        return dft_inverse(prop(f, t))[0] * dft_inverse(prop(g, t))[0]

    return _time_lp(prof, f.grid, window, p)


def local_strichartz_ratio(lam: int, theta, f: SpectralField,
                           window: Optional[TimeWindow] = None, flow="wave",
                           params: Optional[PacketParams] = None) -> float:
    """``||S(.) P f||_{L^6(I x T^3)} / ||P f||_{L^2}`` with ``P`` the cap projector."""
    fam = PacketFamily(lam, theta, params, f.grid)
    pf = fam.projector(f)
    den = l2_norm(pf)
    if den == 0.0:
        raise DegenerateInputError("cap projection of f vanishes")
    window = TimeWindow.for_scale(lam) if window is None else window
    return spacetime_lp_norm(flow, pf, window, 6).value / den


def bilinear_l3_ratio(lam: int, theta1, theta2, f: SpectralField, g: SpectralField,
                      window: Optional[TimeWindow] = None, flow="wave",
                      params: Optional[PacketParams] = None) -> float:
    """``||(S f)(S g)||_{L^3(I x T^3)} / (||f|| ||g||)`` after cap projection."""
    pf = PacketFamily(lam, theta1, params, f.grid).projector(f)
    pg = PacketFamily(lam, theta2, params, g.grid).projector(g)
    a, b = l2_norm(pf), l2_norm(pg)
    if a == 0.0 or b == 0.0:
        raise DegenerateInputError("a cap projection vanishes")
    window = TimeWindow.for_scale(lam) if window is None else window
    return product_lp_norm(flow, pf, pg, window, 3).value / (a * b)


# ---------------------------------------------------------------------------
# TT* kernel


def tt_kernel(lam: int, theta, tau, z, params: Optional[PacketParams] = None,
              grid: Optional[GridSpec] = None) -> np.ndarray:
    """``K(tau, z) = (2 pi)^-3 sum_xi sigma(xi)^2 exp(i (z . xi + tau |xi|))``.

    ``tau`` has shape ``(P,)`` (or scalar) and ``z`` shape ``(P, 3)`` (or ``(3,)``).
    """
    fam = PacketFamily(lam, theta, params, grid)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (z.shape[0],))
    freqs = fam.grid.xi[:, fam.support].T
    w = fam.sigma[fam.support] ** 2 / VOLUME
    return exp_sum(freqs, w.astype(np.complex128), z, tau)


def kernel_decay_profile(lam: int, theta, radii, params: Optional[PacketParams] = None):
    """``|K(0, r e)| / K(0, 0)`` along both transverse frame axes; returns the larger."""
    fam = PacketFamily(lam, theta, params)
    from .packets import packet_frame

    fr = packet_frame(fam.direction)
    r = np.asarray(radii, dtype=float)
    pts = np.concatenate([r[:, None] * fr[0], r[:, None] * fr[1], np.zeros((1, 3))])
    k = np.abs(tt_kernel(lam, theta, 0.0, pts, params, fam.grid))
    k0 = k[-1]
    return np.maximum(k[: len(r)], k[len(r): 2 * len(r)]) / k0


def kernel_l1_profile(lam: int, theta, taus, params: Optional[PacketParams] = None,
                      grid: Optional[GridSpec] = None) -> np.ndarray:
    """``||K(tau, .)||_{L^1(T^3)}`` at each ``tau``, via the inverse FFT."""
    fam = PacketFamily(lam, theta, params, grid)
    s2 = fam.sigma**2
    out = []
    for tau in np.atleast_1d(taus):
        kf = SpectralField(fam.grid, s2 * np.exp(1j * tau * fam.grid.xi_abs))
        out.append(np.sum(np.abs(dft_inverse(kf)[0])) * VOLUME / fam.grid.n**3)
    return np.array(out)


def schur_window_bound(lam: int, theta, length: Optional[float] = None, nt: int = 17,
                       params: Optional[PacketParams] = None) -> float:
    """``sup_{t in I} int_I ||K(t - s, .)||_{L^1} ds`` over ``I = [0, length]``.

    The profile is even in ``tau``, so the inner integral splits at ``s = t``.
    """
    length = lam ** -0.5 if length is None else length
    if nt < 3:
        raise ValueError("need at least three nodes")
    taus = np.linspace(0.0, length, nt)
    G = kernel_l1_profile(lam, theta, taus, params)
    C = integrate.cumulative_trapezoid(G, taus, initial=0.0)
    return float(np.max(C + C[::-1]))


# ---------------------------------------------------------------------------
# bridge and patching


@dataclass(frozen=True)
class BridgeRemainder:
    lam: float
    scalar_integral: float
    operator_bound: float
    abserr: float


def bridge_remainder(lam: float) -> BridgeRemainder:
    """Distance between heat and wave multipliers at ``|xi| = lam`` over a window."""
    if lam < 4:
        raise ValueError(f"lambda must be >= 4, got {lam}")

    def integrand(s):
        return abs(math.exp(-s * lam * lam) - complex(math.cos(s * lam), math.sin(s * lam)))

    T = lam ** -0.5
    val, err = integrate.quad(integrand, 0.0, T, points=[min(T / 2, 10.0 / lam**2)],
                              epsabs=1e-15, epsrel=1e-12, limit=200)
    return BridgeRemainder(float(lam), float(val), float(val / lam), float(err))


def patch_count(lam: float, T: float) -> int:
    """Number of windows of length ``lam^-1/2`` needed to cover ``[0, T]``."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    # guard against T lam^(1/2) landing a few ulps above an integer
    return max(1, math.ceil(T * math.sqrt(lam) - 1e-12))


def patching_factor(lam: float, T: float) -> float:
    return patch_count(lam, T) ** (1.0 / 6.0)


Flow = Union[str, Callable]
