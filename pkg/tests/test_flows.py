import math

import numpy as np
import pytest

from conftest import single_mode
from reslab import flows as F
from reslab.packets import PacketFamily
from reslab.resonance import DegenerateInputError
from reslab.spectral import VOLUME, GridSpec, SpectralField, dft_inverse, l2_norm

E3 = np.array([0.0, 0.0, 1.0])
E1 = np.array([1.0, 0.0, 0.0])


@pytest.fixture(scope="module")
def cap16():
    return PacketFamily(16, E3).random_cap_field(np.random.default_rng(3))


def test_propagators_at_zero_are_identity(rng):
    g = GridSpec(16)
    f = SpectralField(g, rng.standard_normal((1,) + g.shape) + 1j * rng.standard_normal((1,) + g.shape))
    assert np.array_equal(F.wave_propagate(f, 0.0).coeffs, f.coeffs)
    assert np.array_equal(F.heat_propagate(f, 0.0).coeffs, f.coeffs)


def test_single_mode_phases():
    g = GridSpec(16)
    k = (3, -4, 0)
    f = single_mode(g, k, 2.0)
    w = F.wave_propagate(f, 0.3)
    h = F.heat_propagate(f, 0.01)
    idx = (0,) + g.index_of(np.array(k))
    assert w.coeffs[idx] == pytest.approx(2.0 * np.exp(1.5j), abs=1e-15)
    assert h.coeffs[idx] == pytest.approx(2.0 * np.exp(-0.25), abs=1e-15)


def test_wave_isometry(rng):
    g = GridSpec(32)
    f = SpectralField(g, rng.standard_normal((3,) + g.shape) + 0j)
    n0 = l2_norm(f)
    for t in (0.1, 1.0, 17.3):
        assert abs(l2_norm(F.wave_propagate(f, t)) - n0) <= 1e-13 * n0


def test_heat_is_contractive_and_monotone(rng):
    g = GridSpec(16)
    f = SpectralField(g, rng.standard_normal((1,) + g.shape) + 0j)
    norms = [l2_norm(F.heat_propagate(f, t)) for t in (0.0, 0.01, 0.1, 1.0)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))
    with pytest.raises(ValueError):
        F.heat_propagate(f, -0.1)


def test_time_window_validation():
    w = F.TimeWindow.for_scale(64)
    assert w.length == pytest.approx(0.125)
    assert w.refined().nt == 15
    with pytest.raises(ValueError):
        F.TimeWindow(0.0, 0.0)
    with pytest.raises(ValueError):
        F.TimeWindow(0.0, 1.0, nt=4)


@pytest.mark.parametrize("flow", ["wave", "heat"])
def test_constant_in_time_modulus_matches_oracle(flow):
    # a zero mode is fixed by both flows, so the space-time norm is |I|^(1/p) ||f||_p
    g = GridSpec(16)
    f = single_mode(g, (0, 0, 0), 3.0)
    win = F.TimeWindow(0.0, 0.4, 8)
    x = dft_inverse(f)[0]
    for p in (3, 6):
        lp = (np.sum(np.abs(x) ** p) * VOLUME / g.n**3) ** (1 / p)
        assert F.spacetime_lp_norm(flow, f, win, p).value == pytest.approx(0.4 ** (1 / p) * lp, rel=1e-13)


def test_wave_single_mode_has_constant_modulus():
    g = GridSpec(16)
    f = single_mode(g, (2, 1, -3), 1.0)
    win = F.TimeWindow(0.0, 0.7, 8)
    amp = 1.0 / VOLUME
    expect = (0.7 * VOLUME * amp**6) ** (1 / 6)
    assert F.spacetime_lp_norm("wave", f, win, 6).value == pytest.approx(expect, rel=1e-12)


def test_refinement_drift_below_one_percent(cap16):
    win = F.TimeWindow.for_scale(16)
    a = F.spacetime_lp_norm("wave", cap16, win, 6).value
    b = F.spacetime_lp_norm("wave", cap16, win.refined(), 6).value
    assert abs(a - b) <= 0.01 * b


def test_norm_argument_errors(cap16):
    win = F.TimeWindow.for_scale(16)
    with pytest.raises(ValueError):
        F.spacetime_lp_norm("wave", cap16, win, 4)
    with pytest.raises(ValueError):
        F.spacetime_lp_norm("schrodinger", cap16, win, 6)
    with pytest.raises(ValueError):
        F.product_lp_norm("wave", cap16, single_mode(GridSpec(16), (1, 0, 0)), win, 3)


def test_degenerate_cap_projection():
    g = PacketFamily(16, E3).grid
    with pytest.raises(DegenerateInputError):
        F.local_strichartz_ratio(16, E3, SpectralField.zeros(g, 1))
    with pytest.raises(DegenerateInputError):
        F.bilinear_l3_ratio(16, E3, E1, SpectralField.zeros(g, 1), SpectralField.zeros(g, 1))


def test_strichartz_ratios_frozen(cap16, frozen):
    g = PacketFamily(16, E1).random_cap_field(np.random.default_rng(4))
    ref = frozen["flows"]
    assert F.local_strichartz_ratio(16, E3, cap16) == pytest.approx(ref["l6_ratio_lam16_seed3"], rel=1e-9)
    assert F.bilinear_l3_ratio(16, E3, E1, cap16, g) == pytest.approx(ref["l3_ratio_lam16_seed3_4"], rel=1e-9)


def test_kernel_at_origin_and_symmetry():
    fam = PacketFamily(16, E3)
    k0 = F.tt_kernel(16, E3, 0.0, np.zeros(3))[0]
    assert k0.real == pytest.approx(np.sum(fam.sigma**2) / VOLUME, rel=1e-12)
    assert abs(k0.imag) <= 1e-12 * k0.real
    z = np.array([[0.1, -0.2, 0.3], [0.5, 0.0, -0.05]])
    tau = np.array([0.05, 0.2])
    a = F.tt_kernel(16, E3, tau, z)
    b = F.tt_kernel(16, E3, -tau, -z)
    assert np.allclose(a, np.conj(b), rtol=0, atol=1e-12 * k0.real)
    assert np.all(np.abs(a) <= k0.real * (1 + 1e-12))


def test_kernel_decay_profile_normalized():
    prof = F.kernel_decay_profile(16, E3, [0.0, 0.5, 1.0])
    assert prof[0] == pytest.approx(1.0, rel=1e-12)
    assert np.all(prof <= 1.0 + 1e-12)


def test_kernel_l1_at_zero_time_matches_direct_sum():
    fam = PacketFamily(8, E3)
    got = F.kernel_l1_profile(8, E3, [0.0])[0]
    x = dft_inverse(SpectralField(fam.grid, fam.sigma**2))[0]
    assert got == pytest.approx(np.sum(np.abs(x)) * VOLUME / fam.grid.n**3, rel=1e-12)


def test_schur_bound_monotone_in_window(frozen):
    base = F.schur_window_bound(16, E3)
    assert base == pytest.approx(frozen["flows"]["schur_lam16"], rel=1e-9)
    short = F.schur_window_bound(16, E3, length=0.5 * 16 ** -0.5)
    assert short < base
    with pytest.raises(ValueError):
        F.schur_window_bound(16, E3, nt=2)


def test_bridge_remainder(frozen):
    b = F.bridge_remainder(64.0)
    assert b.scalar_integral == pytest.approx(frozen["flows"]["bridge_integral_lam64"], rel=1e-10)
    assert b.operator_bound == pytest.approx(b.scalar_integral / 64.0)
    for lam in (16.0, 64.0, 256.0):
        r = F.bridge_remainder(lam)
        assert r.operator_bound <= 2 * lam ** -1.5
        assert r.abserr <= 1e-10
    with pytest.raises(ValueError):
        F.bridge_remainder(2.0)


def test_patching_counts():
    assert F.patch_count(64, 1.0) == 8
    assert F.patch_count(256, 256 ** -0.5) == 1
    assert F.patch_count(100, 0.001) == 1
    assert F.patching_factor(64, 1.0) == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ValueError):
        F.patch_count(64, 0.0)
