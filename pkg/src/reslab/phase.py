"""Interaction phase ``omega = |xi| + |eta| - |xi + eta|`` and its geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels


class SingularConfigurationError(ValueError):
    """Raised where the phase or the adapted frame is not differentiable/defined."""


CONVENTIONS = {"A": 0, "B": 1}


def _vec(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    return v


def _perp(v: np.ndarray) -> np.ndarray:
    u = v / np.linalg.norm(v)
    return np.eye(3) - np.outer(u, u)


def omega(xi, eta) -> float:
    xi, eta = _vec(xi), _vec(eta)
    return float(np.linalg.norm(xi) + np.linalg.norm(eta) - np.linalg.norm(xi + eta))


def omega_batch(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return (np.linalg.norm(xi, axis=-1) + np.linalg.norm(eta, axis=-1)
            - np.linalg.norm(xi + eta, axis=-1))


def _nonzero(**vecs):
    for name, v in vecs.items():
        if not np.linalg.norm(v) > 0:
            raise SingularConfigurationError(f"{name} = 0: phase is not smooth here")


def grad_omega(xi, eta) -> tuple:
    """``(xi_hat - tau_hat, eta_hat - tau_hat)``."""
    xi, eta = _vec(xi), _vec(eta)
    tau = xi + eta
    _nonzero(xi=xi, eta=eta, tau=tau)
    th = tau / np.linalg.norm(tau)
    return xi / np.linalg.norm(xi) - th, eta / np.linalg.norm(eta) - th


def adapted_frame(xi, eta) -> tuple:
    """Right-handed orthonormal ``(rho1, rho2, tau_hat)``."""
    xi, eta = _vec(xi), _vec(eta)
    tau = xi + eta
    if np.array_equal(xi, eta) or not np.linalg.norm(xi - eta) > 0:
        raise SingularConfigurationError("xi = eta: the direction xi - eta is undefined")
    _nonzero(tau=tau)
    th = tau / np.linalg.norm(tau)
    e = (xi - eta) / np.linalg.norm(xi - eta)
    r1 = e - (e @ th) * th
    nr = np.linalg.norm(r1)
    if not nr > 1e-14:
        raise SingularConfigurationError("xi - eta is parallel to tau")
    r1 = r1 / nr
    return r1, np.cross(th, r1), th


def hessian_full(xi, eta) -> np.ndarray:
    """6x6 Hessian of ``omega`` in the variables ``(xi, eta)``."""
    xi, eta = _vec(xi), _vec(eta)
    tau = xi + eta
    _nonzero(xi=xi, eta=eta, tau=tau)
    pt = _perp(tau) / np.linalg.norm(tau)
    h = np.empty((6, 6))
    h[:3, :3] = _perp(xi) / np.linalg.norm(xi) - pt
    h[3:, 3:] = _perp(eta) / np.linalg.norm(eta) - pt
    h[:3, 3:] = -pt
    h[3:, :3] = -pt
    return h


@dataclass
class PhaseSample:
    xi: np.ndarray
    eta: np.ndarray
    tau: np.ndarray
    frame: np.ndarray
    hessian6: np.ndarray
    a_eff: np.ndarray
    a_renorm: np.ndarray
    det_eff: float
    det_renorm: float
    B: np.ndarray
    C: np.ndarray
    D: float
    D_eff: float
    lam: float
    convention: str
    flagged: bool = False

    @property
    def schur_det(self) -> float:
        return float(np.linalg.det(self.B) * self.D_eff)


def _blocks(A: np.ndarray):
    B = A[..., :2, :2]
    C = A[..., :2, 2]
    D = A[..., 2, 2]
    det_b = B[..., 0, 0] * B[..., 1, 1] - B[..., 0, 1] * B[..., 1, 0]
    scale = np.abs(B).max(axis=(-1, -2))
    flagged = ~(np.abs(det_b) > 1e-12 * scale**2)
    safe = np.where(flagged, 1.0, det_b)
    # C^T B^{-1} C via the 2x2 adjugate
    q = (B[..., 1, 1] * C[..., 0] ** 2 - (B[..., 0, 1] + B[..., 1, 0]) * C[..., 0] * C[..., 1]
         + B[..., 0, 0] * C[..., 1] ** 2) / safe
    d_eff = np.where(flagged, np.nan, D - q)
    return B, C, D, det_b, d_eff, flagged


def effective_minor(xi, eta, convention: str = "A", lam: Optional[float] = None) -> PhaseSample:
    """Effective 3x3 minor in the adapted frame, its blocks and determinants.

    Convention ``"A"`` differentiates ``xi -> omega(xi, tau - xi)`` at fixed
    ``tau``; convention ``"B"`` shifts both arguments along the same vector.
    ``lam`` sets the anisotropic weight ``diag(lam^1/2, lam^1/2, 1)`` and
    defaults to ``max(|xi|, |eta|)``.
    """
    try:
        code = CONVENTIONS[convention]
    except KeyError:
        raise ValueError(f"unknown convention {convention!r}") from None
    xi, eta = _vec(xi), _vec(eta)
    frame_t = adapted_frame(xi, eta)
    h6 = hessian_full(xi, eta)
    A, frame = kernels.phase_minor_batch(xi[None], eta[None], code)
    A, frame = A[0], frame[0]
    lam = float(max(np.linalg.norm(xi), np.linalg.norm(eta))) if lam is None else float(lam)
    S = np.diag([lam**0.5, lam**0.5, 1.0])
    B, C, D, det_b, d_eff, flagged = _blocks(A)
    return PhaseSample(
        xi=xi, eta=eta, tau=xi + eta, frame=np.array(frame_t), hessian6=h6,
        a_eff=A, a_renorm=S @ A @ S, det_eff=float(np.linalg.det(A)),
        det_renorm=float(np.linalg.det(S @ A @ S)), B=B.copy(), C=C.copy(),
        D=float(D), D_eff=float(d_eff), lam=lam, convention=convention,
        flagged=bool(flagged),
    )


def random_unit(rng: np.random.Generator, count: int) -> np.ndarray:
    v = rng.standard_normal((count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _rotate_away(u: np.ndarray, angle: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors at the given angles from ``u`` with uniform azimuth."""
    w = rng.standard_normal(u.shape)
    w -= np.sum(w * u, axis=1, keepdims=True) * u
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return np.cos(angle)[:, None] * u + np.sin(angle)[:, None] * w


@dataclass
class WideRegionStats:
    lam: float
    convention: str
    count: int
    flagged: int
    det_renorm: np.ndarray = field(repr=False)
    norm_B: np.ndarray = field(repr=False)
    norm_C: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    D_eff: np.ndarray = field(repr=False)
    schur_residual: float = 0.0

    def summary(self) -> dict:
        ok = np.isfinite(self.det_renorm) & np.isfinite(self.D_eff)

        def mmm(a):
            a = a[ok]
            if a.size == 0:
                return (float("nan"),) * 3
            return (float(a.min()), float(np.median(a)), float(a.max()))

        d_lo, d_med, d_hi = mmm(self.det_renorm)
        return {
            "lam": self.lam, "convention": self.convention, "count": self.count,
            "flagged": self.flagged,
            "det_renorm_min": d_lo, "det_renorm_median": d_med, "det_renorm_max": d_hi,
            "median_norm_B": mmm(self.norm_B)[1], "median_norm_C": mmm(self.norm_C)[1],
            "median_abs_D": mmm(np.abs(self.D))[1], "median_abs_D_eff": mmm(np.abs(self.D_eff))[1],
            "schur_residual": self.schur_residual,
        }


def wide_region_pairs(lam: float, count: int, seed: int) -> tuple:
    """``|xi|, |eta|`` uniform on [lam/2, 2 lam]; angle uniform on [lam^-1/2, pi - lam^-1/2]."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    u = random_unit(rng, count)
    a0 = lam**-0.5
    ang = rng.uniform(a0, np.pi - a0, count)
    v = _rotate_away(u, ang, rng)
    rx = rng.uniform(lam / 2, 2 * lam, count)
    re = rng.uniform(lam / 2, 2 * lam, count)
    return u * rx[:, None], v * re[:, None]


def sample_wide_region(lam: float, count: int, seed: int, convention: str = "A") -> WideRegionStats:
    xi, eta = wide_region_pairs(lam, count, seed)
    A, _ = kernels.phase_minor_batch(xi, eta, CONVENTIONS[convention])
    B, C, D, det_b, d_eff, flagged = _blocks(A)
    flagged |= ~np.isfinite(A).all(axis=(1, 2))
    det = np.linalg.det(np.where(np.isfinite(A), A, 0.0))
    schur = det_b * d_eff
    scale = np.maximum(np.abs(det), np.abs(schur))
    good = ~flagged & (scale > 0)
    resid = float(np.max(np.abs(det - schur)[good] / scale[good])) if good.any() else 0.0
    det_r = np.where(flagged, np.nan, lam**2 * det)
    return WideRegionStats(
        lam=float(lam), convention=convention, count=count, flagged=int(flagged.sum()),
        det_renorm=det_r, norm_B=np.linalg.norm(B, 2, axis=(1, 2)),
        norm_C=np.linalg.norm(C, axis=1), D=D, D_eff=d_eff, schur_residual=resid,
    )


# ---------------------------------------------------------------------------
# narrow region


@dataclass(frozen=True)
class VolumeEstimate:
    lam: float
    delta: float
    variant: str
    estimate: float
    stderr: float
    hits: int
    samples: int


def narrow_pairs(lam: float, delta: float, count: int, seed: int) -> tuple:
    """``|xi| = lam`` uniform on the sphere, ``eta = -xi + w`` with ``w`` uniform in the ball of radius ``lam^-delta``."""
    rng = np.random.default_rng(seed)
    xi = lam * random_unit(rng, count)
    rho = lam ** (-delta)
    w = random_unit(rng, count) * (rho * rng.uniform(0.0, 1.0, count) ** (1.0 / 3.0))[:, None]
    return xi, -xi + w


def narrow_volume_mc(lam: float, delta: float, samples: int, seed: int,
                     variant: str = "global") -> VolumeEstimate:
    """Monte Carlo volume of the narrow set of pairs at scale ``lam``.

    ``global``: xi on the whole sphere of radius lam (area 4 pi lam^2).
    ``cap``: xi restricted to a cap of angular radius lam^-1/2 around e3 and
    eta required to lie in the antipodal cap.
    """
    if samples < 1000:
        raise ValueError("at least 1000 samples are required")
    rng = np.random.default_rng(seed)
    rho = lam ** (-delta)
    ball = 4.0 / 3.0 * np.pi * rho**3
    if variant == "global":
        xi = lam * random_unit(rng, samples)
        area = 4.0 * np.pi * lam**2
    elif variant == "cap":
        a = lam**-0.5
        cos_a = np.cos(a)
        z = rng.uniform(cos_a, 1.0, samples)
        t = rng.uniform(0.0, 2 * np.pi, samples)
        s = np.sqrt(1.0 - z * z)
        xi = lam * np.stack([s * np.cos(t), s * np.sin(t), z], axis=1)
        area = 2.0 * np.pi * (1.0 - cos_a) * lam**2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    w = random_unit(rng, samples) * (rho * rng.uniform(0.0, 1.0, samples) ** (1.0 / 3.0))[:, None]
    eta = -xi + w
    ne = np.linalg.norm(eta, axis=1)
    hit = (ne >= lam / 2) & (ne <= 2 * lam)
    if variant == "cap":
        hit &= (-eta[:, 2] / ne) >= np.cos(lam**-0.5)
    p = hit.mean()
    total = area * ball
    return VolumeEstimate(float(lam), float(delta), variant, float(total * p),
                          float(total * np.sqrt(p * (1 - p) / samples)), int(hit.sum()), samples)


def collinearity_constant(xi: np.ndarray, eta: np.ndarray, lam: float) -> float:
    """``max angle(xi, -eta) * lam / |xi + eta|`` over a batch of pairs."""
    ang = np.arctan2(np.linalg.norm(np.cross(xi, -eta), axis=1), -np.sum(xi * eta, axis=1))
    nt = np.linalg.norm(xi + eta, axis=1)
    ok = nt > 0
    return float(np.max(ang[ok] * lam / nt[ok]))
