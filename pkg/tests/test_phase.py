import numpy as np
import pytest

from reslab import phase
from reslab.phase import (
    SingularConfigurationError,
    adapted_frame,
    collinearity_constant,
    effective_minor,
    grad_omega,
    hessian_full,
    narrow_pairs,
    narrow_volume_mc,
    omega,
    omega_batch,
    sample_wide_region,
)
from reslab.fitting import fit_power_law

E1, E2, E3 = np.eye(3)


def test_omega_values():
    assert omega(E1, E1) == 0.0
    assert omega(E1, -E1) == 2.0
    assert omega(E1, E2) == pytest.approx(2 - np.sqrt(2), abs=1e-15)


def test_omega_symmetry_parity_homogeneity():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 500, 3))
    w = omega_batch(x, y)
    assert np.allclose(omega_batch(y, x), w, rtol=1e-12, atol=0)
    assert np.allclose(omega_batch(-x, -y), w, rtol=1e-12, atol=0)
    assert np.allclose(omega_batch(3.7 * x, 3.7 * y), 3.7 * w, rtol=1e-12, atol=1e-15)


def test_gradient_closed_forms():
    gx, ge = grad_omega(E1, E1)
    assert not gx.any() and not ge.any()
    gx, ge = grad_omega(E1, E2)
    t = (E1 + E2) / np.sqrt(2)
    assert np.allclose(gx, E1 - t, atol=1e-15) and np.allclose(ge, E2 - t, atol=1e-15)
    with pytest.raises(SingularConfigurationError):
        grad_omega(E1, -E1)


def test_gradient_finite_differences():
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal((2, 1000, 3))
    h = 1e-5
    err = 0.0
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        fx = (omega_batch(x + d, y) - omega_batch(x - d, y)) / (2 * h)
        fe = (omega_batch(x, y + d) - omega_batch(x, y - d)) / (2 * h)
        for k in range(1000):
            gx, ge = grad_omega(x[k], y[k])
            err = max(err, abs(fx[k] - gx[i]), abs(fe[k] - ge[i]))
    assert err <= 1e-8


def test_frame_examples():
    r1, r2, th = adapted_frame(E1, E2)
    assert np.allclose(th, (E1 + E2) / np.sqrt(2), atol=1e-15)
    assert np.allclose(r1, (E1 - E2) / np.sqrt(2), atol=1e-15)
    assert np.allclose(r2, np.cross(th, r1), atol=1e-15)
    with pytest.raises(SingularConfigurationError):
        adapted_frame(E1, E1)


def test_frame_orthonormal_on_wide_pairs():
    xi, eta = phase.wide_region_pairs(64, 200, 3)
    for x, y in zip(xi, eta):
        F = np.array(adapted_frame(x, y))
        assert np.abs(F @ F.T - np.eye(3)).max() <= 1e-12
        assert np.linalg.det(F) == pytest.approx(1.0, abs=1e-12)


def test_hessian_homogeneity_and_closed_form():
    rng = np.random.default_rng(4)
    x, y = rng.standard_normal((2, 3))
    H = hessian_full(x, y)
    assert np.allclose(H, H.T, atol=0)
    assert np.allclose(hessian_full(2 * x, 2 * y), H / 2, rtol=1e-13, atol=1e-15)
    t = (E1 + E2) / np.sqrt(2)
    expect = -(np.eye(3) - np.outer(t, t)) / np.sqrt(2)
    assert np.allclose(hessian_full(E1, E2)[:3, 3:], expect, atol=1e-15)


def test_hessian_finite_differences():
    # unit-scale pairs: the O(h^2) truncation grows like |xi|^-3, so keep norms in [1/2, 2]
    xs, ys = phase.wide_region_pairs(1.0, 50, 5)
    h = 1e-4
    for x, y in zip(xs, ys):
        H = hessian_full(x, y)
        for j in range(6):
            d = np.zeros(6)
            d[j] = h
            gp = np.concatenate(grad_omega(x + d[:3], y + d[3:]))
            gm = np.concatenate(grad_omega(x - d[:3], y - d[3:]))
            assert np.abs((gp - gm) / (2 * h) - H[:, j]).max() <= 1e-6


@pytest.mark.parametrize("conv", ["A", "B"])
def test_effective_minor_homogeneity_and_schur(conv):
    rng = np.random.default_rng(6)
    for _ in range(20):
        x, y = rng.standard_normal((2, 3)) * 10
        s1 = effective_minor(x, y, conv)
        s2 = effective_minor(2 * x, 2 * y, conv)
        assert s2.det_eff == pytest.approx(s1.det_eff / 8, rel=1e-9)
        if not s1.flagged:
            assert s1.schur_det == pytest.approx(s1.det_eff, rel=1e-10, abs=1e-300)


def test_mirror_pair_has_no_cross_block():
    # xi and eta mirrored across tau_hat = e3
    x = np.array([3.0, 0.0, 5.0])
    y = np.array([-3.0, 0.0, 5.0])
    s = effective_minor(x, y, "A")
    assert np.abs(s.C).max() <= 1e-14


def test_radial_term_vanishes_on_tau():
    rng = np.random.default_rng(7)
    x, y = rng.standard_normal((2, 3))
    tau = x + y
    th = tau / np.linalg.norm(tau)
    p_tau = (np.eye(3) - np.outer(th, th)) / np.linalg.norm(tau)
    assert th @ p_tau @ th == pytest.approx(0.0, abs=1e-16)


def test_unknown_convention():
    with pytest.raises(ValueError):
        effective_minor(E1, E2, "C")


def test_sample_wide_region_deterministic_and_schur():
    a = sample_wide_region(64, 1, 5)
    b = sample_wide_region(64, 1, 5)
    assert np.array_equal(a.det_renorm, b.det_renorm, equal_nan=True)
    st = sample_wide_region(64, 2000, 8)
    assert st.schur_residual <= 1e-10
    s = st.summary()
    assert s["det_renorm_min"] <= s["det_renorm_median"] <= s["det_renorm_max"]


def test_wide_region_ranges():
    xi, eta = phase.wide_region_pairs(32, 5000, 1)
    for v in (xi, eta):
        r = np.linalg.norm(v, axis=1)
        assert r.min() >= 16 and r.max() <= 64
    c = np.sum(xi * eta, axis=1) / np.linalg.norm(xi, axis=1) / np.linalg.norm(eta, axis=1)
    ang = np.arccos(np.clip(c, -1, 1))
    assert ang.min() >= 32**-0.5 - 1e-12 and ang.max() <= np.pi - 32**-0.5 + 1e-12


def test_block_norm_B_scaling_report():
    pts = [(lam, sample_wide_region(lam, 1000, lam).summary()["median_norm_B"]) for lam in (16, 32, 64, 128)]
    assert abs(fit_power_law(pts).slope + 1.0) <= 0.2


@pytest.mark.parametrize("delta,expected,tol,variant", [
    (2 / 3, 0.0, 0.2, "global"),
    (0.55, 2 - 3 * 0.55, 0.2, "global"),
    (0.72, 2 - 3 * 0.72, 0.2, "global"),
    (2 / 3, 1 - 2.0, 0.3, "cap"),
])
def test_narrow_volume_exponent(delta, expected, tol, variant):
    pts = []
    for i, lam in enumerate((16, 32, 64, 128, 256)):
        v = narrow_volume_mc(lam, delta, 100_000, 1000 + i, variant)
        assert v.stderr >= 0 and v.hits > 0
        pts.append((lam, v.estimate))
    assert abs(fit_power_law(pts).slope - expected) <= tol


def test_narrow_volume_argument_checks():
    with pytest.raises(ValueError):
        narrow_volume_mc(16, 2 / 3, 999, 0)
    with pytest.raises(ValueError):
        narrow_volume_mc(16, 2 / 3, 1000, 0, "hemisphere")


def test_collinearity_constant():
    for lam in (16, 64, 256):
        x, y = narrow_pairs(lam, 2 / 3, 20_000, lam)
        assert collinearity_constant(x, y, lam) <= 2.0
