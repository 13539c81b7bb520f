"""Randomized invariants checked with hypothesis."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from reslab.config import ExperimentConfig, parse_config_text
from reslab.filters import build_dyadic_bank, phi, psi
from reslab.fitting import fit_power_law
from reslab.flows import patch_count
from reslab.packets import tight_window
from reslab.resonance import nullform_opnorms, nullform_symbol
from reslab.spectral import GridSpec, SpectralField, l2_norm, leray_project, sobolev_norm

coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
vec = st.tuples(coord, coord, coord).map(np.array)
fast = settings(max_examples=60, deadline=None)


@fast
@given(vec, vec)
def test_nullform_norm_is_sine(xi, eta):
    assume(np.linalg.norm(xi) > 1e-3 and np.linalg.norm(eta) > 1e-3)
    s = nullform_symbol(xi, eta)
    assert abs(s.op_norm - s.sin_angle) <= 1e-12
    assert s.op_norm <= 1 + 1e-12
    op, sn = nullform_opnorms(xi[None], eta[None])
    assert abs(op[0] - sn[0]) <= 1e-12


@fast
@given(st.floats(0.0, 100.0))
def test_littlewood_paley_sum_telescopes(r):
    total = phi(r) + sum(psi(r / 2.0**k) for k in range(1, 10))
    assert abs(total - phi(r / 2.0**9)) <= 1e-14
    assert 0.0 <= psi(r) <= 1.0


@fast
@given(st.integers(4, 60), st.floats(0.5, 1.0), st.floats(-200, 200))
def test_tight_window_squares_sum_to_one(m, tfrac, x):
    t = tfrac * m / 2
    assume(-t / 2 <= x - m * math.floor((x + t / 2) / m) <= m - t / 2)
    shift = m * math.floor((x + t / 2) / m)
    s = tight_window(np.array([x - shift]), m, t) ** 2 + tight_window(np.array([x - shift - m]), m, t) ** 2
    assert abs(s[0] - 1) <= 1e-13


@fast
@given(st.floats(0.05, 20.0), st.floats(-3.0, 3.0), st.lists(st.floats(1.0, 1e3), min_size=3, max_size=8, unique=True))
def test_fit_recovers_exact_power_law(a, slope, xs):
    assume(max(xs) / min(xs) > 1.5)
    fit = fit_power_law([(x, a * x**slope) for x in xs])
    assert abs(fit.slope - slope) <= 1e-9
    assert abs(math.exp(fit.intercept) - a) <= 1e-8 * a


@fast
@given(st.floats(4.0, 1e4), st.floats(1e-3, 10.0))
def test_patch_count_covers_interval(lam, T):
    n = patch_count(lam, T)
    assert n >= 1
    assert n * lam ** -0.5 >= T * (1 - 1e-10)
    assert n == 1 or (n - 1) * lam ** -0.5 < T


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_leray_projection_properties(seed):
    g = GridSpec(16)
    rng = np.random.default_rng(seed)
    u = SpectralField(g, rng.standard_normal((3,) + g.shape) + 1j * rng.standard_normal((3,) + g.shape))
    p = leray_project(u)
    assert l2_norm(p) <= l2_norm(u) * (1 + 1e-14)
    assert l2_norm(leray_project(p) - p) <= 1e-13 * l2_norm(u)
    bank = build_dyadic_bank(g)
    parts = [p.multiply(bank.mask(N)) for N in bank.scales]
    assert sum(sobolev_norm(q, 0.0) ** 2 for q in parts) <= sobolev_norm(p, 0.0) ** 2 * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([16, 32, 64]), st.integers(0, 2**63), st.sampled_from(["csv", "json"]),
       st.integers(1, 12))
def test_config_text_round_trip(grid, seed, fmt, seeds):
    text = f"grid = {grid}\nseed = {seed}\nformat = {fmt}\nseeds = {seeds}\nn_list = 4\n"
    cfg = parse_config_text(text)
    assert cfg == ExperimentConfig().replace(grid=grid, seed=seed, format=fmt, seeds=seeds, n_list=(4,))
