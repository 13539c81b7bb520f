"""NumPy implementations of the hot kernels.

Signatures mirror the compiled module ``_ckernels`` exactly; the dispatcher in
:mod:`reslab.kernels` picks one of the two at import time.
"""

import numpy as np

_CHUNK = 1 << 20


def exp_sum(freqs, weights, targets, times):
    """``out[p] = sum_k w[k] exp(i (targets[p] . freqs[k] + times[p] |freqs[k]|))``.

    freqs: (K, 3) float64; weights: (K,) complex128; targets: (P, 3) float64;
    times: (P,) float64.  Returns (P,) complex128.
    """
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    times = np.ascontiguousarray(times, dtype=np.float64)
    mag = np.sqrt(np.sum(freqs**2, axis=1))
    out = np.empty(targets.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK // max(1, freqs.shape[0]))
    for s in range(0, targets.shape[0], step):
        ph = targets[s:s + step] @ freqs.T + np.outer(times[s:s + step], mag)
        out[s:s + step] = np.exp(1j * ph) @ weights
    return out


def phase_minor_batch(xi, eta, convention):
    """Effective 3x3 minors of the interaction phase in the adapted frame.

    Returns ``(A, frame)`` with ``A`` of shape (K, 3, 3) and ``frame`` of
    shape (K, 3, 3) whose rows are (rho1, rho2, tau_hat).  Degenerate rows
    (tau = 0, xi = eta, or xi - eta parallel to tau) are filled with NaN.
    ``convention`` 0 eliminates eta at fixed tau; 1 shifts both arguments.
    """
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    eta = np.ascontiguousarray(eta, dtype=np.float64)
    tau = xi + eta
    nx = np.linalg.norm(xi, axis=1)
    ne = np.linalg.norm(eta, axis=1)
    nt = np.linalg.norm(tau, axis=1)
    d = xi - eta
    nd = np.linalg.norm(d, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        th = tau / nt[:, None]
        e = d / nd[:, None]
        r1 = e - np.sum(e * th, axis=1)[:, None] * th
        nr = np.linalg.norm(r1, axis=1)
        r1 = r1 / nr[:, None]
    bad = (nt == 0) | (nd == 0) | ~(nr > 1e-14) | (nx == 0) | (ne == 0)
    r2 = np.cross(th, r1)
    frame = np.stack([r1, r2, th], axis=1)

    with np.errstate(invalid="ignore", divide="ignore"):
        ux = xi / nx[:, None]
        ue = eta / ne[:, None]
        px = frame @ ux[:, :, None]
        pe = frame @ ue[:, :, None]
        eye = np.eye(3)
        A = (eye - px * px.transpose(0, 2, 1)) / nx[:, None, None]
        A = A + (eye - pe * pe.transpose(0, 2, 1)) / ne[:, None, None]
        if convention == 1:
            pt = np.zeros((3, 1))
            pt[2, 0] = 1.0
            A = A - 4.0 * (eye - pt @ pt.T) / nt[:, None, None]
    A[bad] = np.nan
    frame[bad] = np.nan
    return A, frame
