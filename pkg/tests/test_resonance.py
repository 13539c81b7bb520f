import itertools

import numpy as np
import pytest

from reslab.filters import build_dyadic_bank, psi, phi
from reslab.resonance import (
    AliasingError,
    DegenerateInputError,
    ResonantConfig,
    VacuousBlockError,
    default_bank,
    hminus_ratio,
    narrow_block,
    narrow_radius,
    narrow_ratio,
    nonlinear_term,
    nullform_opnorms,
    nullform_symbol,
    rescale_field,
    resonant_block,
)
from reslab.spectral import VOLUME, GridSpec, SpectralField, random_divfree_field, sobolev_norm


def field_from_modes(grid, modes):
    """Real vector field from ``{k: amplitude vector}``, adding the conjugate partners."""
    c = np.zeros((3,) + grid.shape, dtype=complex)
    for k, a in modes.items():
        k = np.array(k)
        a = np.asarray(a, dtype=complex)
        c[(slice(None),) + grid.index_of(k)] += a
        c[(slice(None),) + grid.index_of(-k)] += np.conj(a)
    return SpectralField(grid, c)


def convolution_oracle(u):
    """i xi_j (u_j u)^(xi) with (fg)^(xi) = (2pi)^-3 sum_{a+b=xi} f(a) g(b), summed mode by mode."""
    grid = u.grid
    n = grid.n
    nz = list(zip(*np.nonzero(np.any(u.coeffs != 0, axis=0))))
    k = grid.k.astype(int)
    out = np.zeros_like(u.coeffs)
    for ia, ib in itertools.product(nz, nz):
        a = np.array([k[i] for i in ia])
        b = np.array([k[i] for i in ib])
        xi = a + b
        ua = u.coeffs[(slice(None),) + ia]
        ub = u.coeffs[(slice(None),) + ib]
        # (u . grad) u at xi: sum_j i b_j u_j(a) u(b)
        val = 1j * (ua @ b) * ub / VOLUME
        out[(slice(None),) + tuple(int(v) % n for v in xi)] += val
    return out


def test_nonlinear_term_two_modes_against_convolution():
    grid = GridSpec(8)
    u = field_from_modes(grid, {(1, 0, 0): [0, 1.0, 0.5j], (0, 2, 1): [1.0 - 0.5j, 0.3, -0.6]})
    # second mode is not divergence-free on purpose: the oracle is the advective form,
    # so project it first
    from reslab.spectral import leray_project

    u = leray_project(u)
    got = nonlinear_term(u).coeffs
    assert np.abs(got - convolution_oracle(u)).max() <= 1e-10 * np.abs(got).max()


def test_nonlinear_term_zero_and_single_mode():
    grid = GridSpec(16)
    assert not nonlinear_term(SpectralField.zeros(grid)).coeffs.any()
    k = np.array([2, 1, 0])
    u = field_from_modes(grid, {tuple(k): [0, 0, 1.0]})  # a . k = 0
    out = nonlinear_term(u).coeffs
    support = {tuple(int(v) for v in grid.k[list(i)]) for i in zip(*np.nonzero(np.abs(out).max(axis=0) > 1e-12))}
    assert support <= {(0, 0, 0), tuple(2 * k), tuple(-2 * k)}
    assert np.all(out[:, 0, 0, 0] == 0)


def test_aliasing_violation():
    grid = GridSpec(16)
    u = field_from_modes(grid, {(7, 0, 0): [0, 1.0, 0]})
    with pytest.raises(AliasingError):
        nonlinear_term(u)


def test_resonant_block_high_pair_matches_oracle():
    grid = GridSpec(16)
    N = 4
    u = field_from_modes(grid, {(4, 0, 0): [0, 1.0, 0.2], (0, 4, 1): [1.0, 0, 0]})
    from reslab.spectral import leray_project

    u = leray_project(u)
    bank = default_bank(grid)
    got = resonant_block(u, ResonantConfig(N), bank).coeffs
    ref = convolution_oracle(u) * psi(grid.xi_abs / N)
    assert np.abs(got - ref).max() <= 1e-10 * max(np.abs(ref).max(), 1e-300)
    assert np.abs(ref).max() > 0


def test_resonant_block_support_and_low_field():
    grid = GridSpec(32)
    bank = default_bank(grid)
    u = random_divfree_field(grid, 1)
    for N in (2, 4, 8):
        r = resonant_block(u, ResonantConfig(N), bank)
        assert not r.coeffs[:, bank.mask(N) == 0].any()
        assert np.all(r.coeffs[:, 0, 0, 0] == 0)
    low = random_divfree_field(grid, 2, support=(1.0, 1.0))
    # products of |xi| = 1 modes stay inside |xi| <= 2, where P_8 vanishes; only FFT round-off remains
    scale = np.abs(low.coeffs).max() ** 2
    assert np.abs(resonant_block(low, ResonantConfig(8), bank).coeffs).max() <= 1e-14 * scale
    assert hminus_ratio(low, ResonantConfig(8), bank) <= 1e-13


def test_resonant_config_validation():
    for bad in (dict(N=3), dict(N=4, delta=0.75), dict(N=4, delta=0.5),
                dict(N=4, output_projector="x"), dict(N=4, M_cut=0)):
        with pytest.raises(ValueError):
            ResonantConfig(**bad)


def test_hminus_ratio_degenerate():
    grid = GridSpec(16)
    with pytest.raises(DegenerateInputError):
        hminus_ratio(SpectralField.zeros(grid), ResonantConfig(2))


def test_hminus_ratio_frozen(frozen):
    grid = GridSpec(64)
    u = random_divfree_field(grid, 42)
    r = hminus_ratio(u, ResonantConfig(8))
    assert r == pytest.approx(frozen["resonance"]["r_N8_seed42_grid64"], rel=1e-10)


def test_narrow_block_antipodal_pair():
    grid = GridSpec(32)
    lam = 8
    k = np.array([8, 0, 0])
    e2 = np.array([0, 1, 0])
    u = field_from_modes(grid, {tuple(k): [0, 0, 1.0], tuple(-k + e2): [0, 0, 0.7 + 0.2j]})
    bank = default_bank(grid)
    out = narrow_block(u, lam, 2 / 3, 4.0, bank).coeffs
    nz = {tuple(int(v) for v in grid.k[list(i)]) for i in zip(*np.nonzero(np.abs(out).max(axis=0) > 1e-13))}
    assert nz <= {(0, 1, 0), (0, -1, 0)}
    rho = narrow_radius(lam, 2 / 3, 4.0)
    ul = u.multiply(bank.mask(lam))
    ref = convolution_oracle(ul) * phi(grid.xi_abs / rho)
    assert np.abs(out - ref).max() <= 1e-12 * np.abs(ref).max()


def test_narrow_block_single_mode_vanishes():
    grid = GridSpec(32)
    u = field_from_modes(grid, {(8, 0, 0): [0, 1.0, 0]})
    assert np.abs(narrow_block(u, 8, 2 / 3, 4.0).coeffs).max() == 0.0


def test_narrow_block_vacuous():
    grid = GridSpec(64)
    u = random_divfree_field(grid, 0)
    with pytest.raises(VacuousBlockError):
        narrow_block(u, 8, 0.74)
    with pytest.raises(ValueError):
        narrow_block(u, 8, 0.8)


def test_narrow_ratio_positive():
    grid = GridSpec(64)
    u = random_divfree_field(grid, 3)
    assert narrow_ratio(u, 8, 2 / 3, 4.0) > 0


def test_nullform_examples():
    s = nullform_symbol([1, 0, 0], [-1, 0, 0])
    assert s.op_norm == pytest.approx(0.0, abs=1e-15) and np.abs(s.matrix).max() < 1e-15
    assert nullform_symbol([1, 0, 0], [0, 1, 0]).op_norm == pytest.approx(1.0, abs=1e-15)
    s = nullform_symbol([16.0, 0.0, 0.0], [-16.0, 0.25, 0.0])
    ang = np.arctan2(0.25, 16.0)
    assert ang == pytest.approx(0.015625, rel=1e-4)
    assert s.op_norm == pytest.approx(np.sin(ang), abs=1e-12)
    assert s.bound == pytest.approx(0.015625, rel=1e-3)
    assert s.op_norm <= 2 * s.bound
    with pytest.raises(ValueError):
        nullform_symbol([0, 0, 0], [1, 0, 0])


def test_nullform_batch_identity():
    rng = np.random.default_rng(9)
    op, s = nullform_opnorms(rng.standard_normal((10_000, 3)), rng.standard_normal((10_000, 3)))
    assert np.abs(op - s).max() <= 1e-12


# rescaling -------------------------------------------------------------------


def test_rescale_identity_and_errors():
    grid = GridSpec(32)
    u = random_divfree_field(grid, 4, support=(1.0, 4.0))
    assert np.array_equal(rescale_field(u, 0).coeffs, u.coeffs)
    with pytest.raises(ValueError):
        rescale_field(u, -1)
    with pytest.raises(ValueError):
        rescale_field(random_divfree_field(grid, 4), 2)


@pytest.mark.parametrize("s", [-1.0, 0.5, 1.0])
def test_rescale_single_mode_norm_law(s):
    grid = GridSpec(32)
    u = field_from_modes(grid, {(2, 1, 0): [0, 0, 1.0]})
    for j in (1, 2):
        lam = 2**j
        assert sobolev_norm(rescale_field(u, j), s) == pytest.approx(lam ** (s - 0.5) * sobolev_norm(u, s), rel=1e-14)


@pytest.fixture(scope="module")
def scaled_pair():
    grid = GridSpec(64)
    bank = default_bank(grid)
    u = random_divfree_field(grid, 11, support=(1.0, 8.0))
    u2 = rescale_field(u, 1)
    c1, c2 = ResonantConfig(4), ResonantConfig(8)
    return dict(
        r1=hminus_ratio(u, c1, bank), r2=hminus_ratio(u2, c2, bank),
        n1=sobolev_norm(resonant_block(u, c1, bank), -1), n2=sobolev_norm(resonant_block(u2, c2, bank), -1),
    )


def test_lattice_dilation_laws(scaled_pair):
    p = scaled_pair
    assert p["r2"] == pytest.approx(2**-0.5 * p["r1"], rel=1e-10)
    assert p["n2"] == pytest.approx(0.5 * p["n1"], rel=1e-10)


@pytest.mark.xfail(strict=True, reason="on the lattice the dilated ratio picks up 2^(-1/2); see lattice law test")
def test_ratio_scale_invariant(scaled_pair):
    assert scaled_pair["r2"] == pytest.approx(scaled_pair["r1"], rel=1e-10)


@pytest.mark.xfail(strict=True, reason="on the lattice the block norm scales by 2^(-1), not 2^(1/2)")
def test_block_norm_gains_root_two(scaled_pair):
    assert scaled_pair["n2"] == pytest.approx(2**0.5 * scaled_pair["n1"], rel=1e-10)


# orthogonality ----------------------------------------------------------------


def test_block_orthogonality_and_pythagoras():
    grid = GridSpec(64)
    bank = build_dyadic_bank(grid, 0, None)
    u = random_divfree_field(grid, 6)
    scales = [2, 4, 8, 16]
    blocks = {N: resonant_block(u, ResonantConfig(N), bank) for N in scales}
    norms = {N: sobolev_norm(b, -1) for N, b in blocks.items()}
    for N in scales:
        for M in scales:
            if M >= 4 * N:
                assert abs(blocks[N].inner(blocks[M], -1)) <= 1e-12 * norms[N] * norms[M]
    total = blocks[2] + blocks[8]
    lhs = sobolev_norm(total, -1) ** 2
    assert lhs == pytest.approx(norms[2] ** 2 + norms[8] ** 2, rel=1e-10)


@pytest.mark.parametrize("lam", [4, 8, 16])
def test_mixed_norms_on_one_shell(lam):
    # |xi| lies in [lam/2, 2 lam] on the support of psi(|xi|/lam)
    grid = GridSpec(64)
    ul = random_divfree_field(grid, lam).multiply(default_bank(grid).mask(lam))
    q = sobolev_norm(ul, 1.0) / sobolev_norm(ul, 0.5)
    assert (lam / 2) ** 0.5 <= q <= (2 * lam) ** 0.5
