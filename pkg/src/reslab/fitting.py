"""Least-squares power-law fits in log-log coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    n_points: int
    slope_stderr: float

    def predict(self, x):
        return math.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope


def fit_power_law(points) -> FitResult:
    """Fit ``value = exp(intercept) * scale^slope`` to ``(scale, value)`` pairs.

    ``residual`` is the RMS deviation in log space.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(~np.isfinite(y)) or np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("power-law fit needs positive finite scales and values")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("scales must not all coincide")
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(res**2)))
    dof = len(pts) - 2
    if dof > 0:
        s2 = float(np.sum(res**2)) / dof
        se = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    else:
        se = 0.0
    return FitResult(float(slope), float(intercept), rms, len(pts), se)
