"""Experiment suites behind the command-line subcommands.

Every suite takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport` whose flags carry the acceptance criterion they
belong to.  Randomness is drawn only from streams derived from
``(cfg.seed, cell index)``; cells may run on a thread pool but results are
gathered in cell order, so reports do not depend on the pool size.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Sequence

import numpy as np

from . import flows, packets, phase
from .config import ExperimentConfig
from .decoupling import BENCHMARKS, admissible_pairs, decoupling_exponent_scan, tile_cap
from .filters import build_caps, build_dyadic_bank, phi, project_cap, project_dyadic
from .fitting import fit_power_law
from .report import HARD, REPORT, SOFT, ExperimentReport, render_degree_table
from .resonance import (
    ResonantConfig,
    default_bank,
    hminus_ratio,
    narrow_ratio,
    nullform_opnorms,
    nullform_symbol,
    rescale_field,
    resonant_block,
)
from .spectral import (
    VOLUME,
    GridSpec,
    SpectralField,
    dft_forward,
    dft_inverse,
    l2_norm,
    leray_project,
    power_profile,
    random_divfree_field,
    riesz_composition,
    sobolev_norm,
)


# ---------------------------------------------------------------------------
# plumbing


def pool_size() -> int:
    env = os.environ.get("RESLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Ordered map over a thread pool capped by ``RESLAB_THREADS``."""
    items = list(items)
    workers = min(pool_size(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def cell_seed(master: int, *index: int) -> int:
    """Independent 63-bit seed for one cell of an experiment."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), *[int(i) for i in index]])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _rng(cfg: ExperimentConfig, *index: int) -> np.random.Generator:
    return np.random.default_rng(cell_seed(cfg.seed, *index))


def _new(name: str, cfg: ExperimentConfig) -> ExperimentReport:
    return ExperimentReport(name, cfg.as_dict(), int(cfg.seed))


def _timed(fn):
    def wrapper(cfg: ExperimentConfig) -> ExperimentReport:
        t0 = time.perf_counter()
        rep = fn(cfg)
        rep.wall_time = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _random_real(grid: GridSpec, rng: np.random.Generator, components: int = 1) -> np.ndarray:
    return rng.standard_normal((components,) + grid.shape)


def _field_for(cfg: ExperimentConfig, grid: GridSpec, seed: int, support=(1.0, None)) -> SpectralField:
    return random_divfree_field(grid, seed, power_profile(cfg.profile_exponent), support)


# ---------------------------------------------------------------------------
# lp: transforms, Littlewood-Paley identities, Leray


@_timed
def run_lp(cfg: ExperimentConfig) -> ExperimentReport:
    """Plancherel, telescoping, dyadic orthogonality and projector identities."""
    rep = _new("lp", cfg)
    grid = GridSpec(cfg.grid)
    bank = build_dyadic_bank(grid, cfg.k_min, cfg.k_max)
    rng = _rng(cfg, 0)

    x = _random_real(grid, rng)
    f = dft_forward(x, grid)
    phys = math.sqrt(float(np.sum(x**2)) * VOLUME / grid.n**3)
    planch = abs(phys - l2_norm(f)) / phys
    back = dft_inverse(f).real
    trip = float(np.linalg.norm(back - x) / np.linalg.norm(x))
    rep.add_row(grid.n, "plancherel_rel_error", planch)
    rep.add_row(grid.n, "roundtrip_rel_error", trip)
    rep.add_flag("Plancherel", 1, HARD, planch <= 1e-12, planch, "<= 1e-12")
    rep.add_flag("transform round trip", 1, HARD, trip <= 1e-12, trip, "<= 1e-12")

    a = grid.xi_abs
    acc = np.zeros(grid.shape)
    tele = 0.0
    for k in range(bank.k_min, bank.k_max + 1):
        acc += bank.mask(2**k)
        ref = phi(a / 2**k, bank.profile) - phi(a / 2 ** (bank.k_min - 1), bank.profile)
        tele = max(tele, float(np.abs(acc - ref).max()))
    rep.add_row(grid.n, "telescoping_max_error", tele)
    rep.add_flag("LP telescoping", 1, HARD, tele <= 1e-14, tele, "<= 1e-14")

    g = dft_forward(_random_real(grid, rng), grid)
    worst = 0.0
    for i, N in enumerate(bank.scales):
        for M in bank.scales[i + 2:]:
            ip = abs(project_dyadic(f, bank, N).inner(project_dyadic(g, bank, M)))
            worst = max(worst, ip)
    rep.add_row(grid.n, "dyadic_orthogonality_max_inner", worst)
    rep.add_flag("dyadic orthogonality (>= 2 octaves)", 1, HARD, worst == 0.0, worst, "== 0")

    u = SpectralField(grid, dft_forward(_random_real(grid, rng, 3), grid).coeffs)
    pu = leray_project(u)
    ppu = leray_project(pu)
    idem = l2_norm(ppu - pu) / l2_norm(pu)
    div = float(np.abs(np.sum(grid.xi * pu.coeffs, axis=0)).max() / np.abs(pu.coeffs).max())
    comm = max(
        l2_norm(leray_project(project_dyadic(u, bank, N)) - project_dyadic(pu, bank, N)) / l2_norm(pu)
        for N in bank.scales
    )
    rep.add_row(grid.n, "leray_idempotence", idem)
    rep.add_row(grid.n, "leray_divergence", div)
    rep.add_row(grid.n, "leray_lp_commutator", comm)
    rep.add_flag("Leray idempotence", 1, HARD, idem <= 1e-14, idem, "<= 1e-14")
    rep.add_flag("Leray output solenoidal", 1, REPORT, div <= 1e-13, div, "<= 1e-13")
    rep.add_flag("Leray commutes with P_N", 1, REPORT, comm <= 1e-14, comm, "<= 1e-14")

    riesz = max(
        sobolev_norm(riesz_composition(f, i, j), -1.0) / sobolev_norm(f, -1.0)
        for i in range(3) for j in range(3)
    )
    rep.add_row(grid.n, "riesz_hminus1_ratio", riesz)
    rep.add_flag("Riesz composition bound", 1, REPORT, riesz <= 1 + 1e-12, riesz, "<= 1 + 1e-12")

    # square-function equivalence on band-limited fields
    for s in (0.5, 1.0):
        worst_c = 1.0
        for t in range(5 if cfg.quick else 20):
            h = _field_for(cfg, grid, cell_seed(cfg.seed, 1, t), (1.0, 2.0 ** bank.k_max))
            lhs = sum(N ** (2 * s) * l2_norm(project_dyadic(h, bank, N)) ** 2 for N in bank.scales)
            r = lhs / sobolev_norm(h, s) ** 2
            worst_c = max(worst_c, r, 1.0 / r)
        rep.add_row(s, "square_function_constant", worst_c)
        rep.add_flag(f"square-function constant s={s}", 1, REPORT, worst_c <= 4.0, worst_c, "<= 4")
    return rep


# ---------------------------------------------------------------------------
# caps


@_timed
def run_caps(cfg: ExperimentConfig) -> ExperimentReport:
    """Cap counts, exact angular partition and angular square-function constants."""
    rep = _new("caps", cfg)
    counts = []
    for N in cfg.cap_n_list:
        caps = build_caps(N)
        counts.append((N, caps.count))
        rep.add_row(N, "cap_count", caps.count)
        rep.add_row(N, "cap_min_spacing_times_sqrtN", caps.min_spacing() * math.sqrt(N))
    fit = fit_power_law(counts)
    rep.add_fit("cap_count", fit)
    rep.add_flag("cap count slope", 1, REPORT, abs(fit.slope - 1.0) <= 0.25, fit.slope, "1 +- 0.25")

    part = 0.0
    for N in cfg.cap_n_list:
        n = max(16, 4 * N)
        if n > (64 if cfg.quick else 128):
            continue
        grid = GridSpec(n)
        caps = build_caps(N)
        w = caps.weights(grid)
        total = np.zeros(w.flat_index.size)
        for cols, vals in w.raw:
            total[cols] += vals / w.total[cols]
        err = float(np.abs(total - 1.0).max())
        part = max(part, err)
        rep.add_row(N, "cap_partition_max_error", err)

        bank = build_dyadic_bank(grid, 0, None)
        worst = 1.0
        for t in range(3 if cfg.quick else 10):
            f = _field_for(cfg, grid, cell_seed(cfg.seed, 2, N, t))
            pn = l2_norm(project_dyadic(f, bank, N)) ** 2
            tot = sum(l2_norm(project_cap(f, caps, j)) ** 2 for j in range(caps.count))
            worst = max(worst, tot / pn, pn / tot)
        rep.add_row(N, "angular_l2_constant", worst)
        rep.add_flag(f"angular l2 constant N={N}", 1, REPORT, worst <= 3.0, worst, "<= 3")
    rep.add_flag("cap partition of unity", 1, HARD, part <= 1e-14, part, "<= 1e-14")
    return rep


# ---------------------------------------------------------------------------
# packets


def _random_direction(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


@_timed
def run_packets(cfg: ExperimentConfig) -> ExperimentReport:
    """Packet norms, tube concentration, frame ratios and reconstructions."""
    rep = _new("packets", cfg)
    e3 = np.array([0.0, 0.0, 1.0])
    norm_lo, norm_hi, tube_lo, fr_lo, fr_hi = np.inf, 0.0, 1.0, np.inf, 0.0
    for i, lam in enumerate(cfg.packet_lambda_list):
        rng = _rng(cfg, 3, i)
        grid = GridSpec(packets.required_grid(lam))
        norms = []
        for _ in range(20):
            th = _random_direction(rng)
            a = rng.uniform(0, 2 * np.pi, 3)
            norms.append(packets.build_packet(lam, th, a, grid=grid).norm())
        rep.add_row(lam, "packet_norm_min", min(norms))
        rep.add_row(lam, "packet_norm_max", max(norms))
        norm_lo, norm_hi = min(norm_lo, min(norms)), max(norm_hi, max(norms))

        th_r = _random_direction(rng)
        for tag, th in (("axis", e3), ("oblique", th_r)):
            t5 = packets.tube_mass_fraction(packets.build_packet(lam, th, grid=grid), 5.0)
            rep.add_row(lam, f"tube5_{tag}", t5)
            tube_lo = min(tube_lo, t5)

        trials = cfg.frame_trials
        fb = packets.packet_frame_bounds(lam, e3, trials, cell_seed(cfg.seed, 4, i), grid=grid)
        fo = packets.packet_frame_bounds(lam, th_r, 10, cell_seed(cfg.seed, 5, i), grid=grid)
        for tag, b in (("axis", fb), ("oblique", fo)):
            rep.add_row(lam, f"frame_ratio_min_{tag}", b.lower)
            rep.add_row(lam, f"frame_ratio_max_{tag}", b.upper)
            fr_lo, fr_hi = min(fr_lo, b.lower), max(fr_hi, b.upper)

        fam = packets.PacketFamily(lam, e3, grid=grid)
        one = packets.reconstruct_from_packets(fam.packet(fam.count // 3).field, lam, e3).error
        rnd = packets.reconstruct_from_packets(fam.random_cap_field(rng), lam, e3).error
        rep.add_row(lam, "reconstruction_error_packet", one)
        rep.add_row(lam, "reconstruction_error_random", rnd)
        rep.add_flag(f"packet reconstruction lambda={lam}", 8, REPORT, one <= 0.2, one, "<= 0.2")
        rep.add_flag(f"random reconstruction lambda={lam}", 8, REPORT, rnd <= 0.5, rnd, "<= 0.5")
    rep.add_flag("packet L2 norms", 8, HARD, norm_lo >= 0.5 and norm_hi <= 2.0,
                 max(norm_hi, 1.0 / norm_lo), "in [1/2, 2]")
    rep.add_flag("frame ratio", 8, HARD, fr_lo >= 0.25 and fr_hi <= 4.0,
                 max(fr_hi, 1.0 / fr_lo), "in [1/4, 4]")
    rep.add_flag("tube mass at multiple 5", 8, HARD, tube_lo >= 0.9, tube_lo, ">= 0.9")
    return rep


# ---------------------------------------------------------------------------
# phase


def _grad_fd(xi: np.ndarray, eta: np.ndarray, h: float) -> tuple:
    gx = np.zeros_like(xi)
    ge = np.zeros_like(eta)
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        gx[:, i] = (phase.omega_batch(xi + d, eta) - phase.omega_batch(xi - d, eta)) / (2 * h)
        ge[:, i] = (phase.omega_batch(xi, eta + d) - phase.omega_batch(xi, eta - d)) / (2 * h)
    return gx, ge


def _grad_exact(xi: np.ndarray, eta: np.ndarray) -> tuple:
    tau = xi + eta
    th = tau / np.linalg.norm(tau, axis=1, keepdims=True)
    return (xi / np.linalg.norm(xi, axis=1, keepdims=True) - th,
            eta / np.linalg.norm(eta, axis=1, keepdims=True) - th)


@_timed
def run_phase(cfg: ExperimentConfig) -> ExperimentReport:
    """Derivative checks, Schur identity and determinant/block scans per convention."""
    rep = _new("phase", cfg)
    rng = _rng(cfg, 6)
    xi = rng.standard_normal((1000, 3))
    eta = rng.standard_normal((1000, 3))
    gx, ge = _grad_fd(xi, eta, 1e-5)
    ex, ee = _grad_exact(xi, eta)
    gerr = float(max(np.abs(gx - ex).max(), np.abs(ge - ee).max()))
    rep.add_row(1000, "gradient_fd_max_error", gerr)
    rep.add_flag("gradient vs finite differences", 1, HARD, gerr <= 1e-8, gerr, "<= 1e-8")

    herr = 0.0
    orth = 0.0
    h = 1e-4
    hx, hy = phase.wide_region_pairs(1.0, 50, cell_seed(cfg.seed, 6, 1))
    for x, y in zip(hx, hy):
        H = phase.hessian_full(x, y)
        for j in range(6):
            d = np.zeros(6)
            d[j] = h
            gp = np.concatenate(phase.grad_omega(x + d[:3], y + d[3:]))
            gm = np.concatenate(phase.grad_omega(x - d[:3], y - d[3:]))
            herr = max(herr, float(np.abs((gp - gm) / (2 * h) - H[:, j]).max()))
        F = np.array(phase.adapted_frame(x, y))
        orth = max(orth, float(np.abs(F @ F.T - np.eye(3)).max()))
    rep.add_row(50, "hessian_fd_max_error", herr)
    rep.add_row(50, "frame_orthonormality", orth)
    rep.add_flag("Hessian vs finite differences", 1, HARD, herr <= 1e-6, herr, "<= 1e-6")
    rep.add_flag("adapted frame orthonormal", 1, REPORT, orth <= 1e-12, orth, "<= 1e-12")

    schur = 0.0
    for conv in ("A", "B"):
        med = {"det": [], "B": [], "C": [], "Deff": []}
        for i, lam in enumerate(cfg.phase_lambda_list):
            st = phase.sample_wide_region(lam, cfg.phase_count, cell_seed(cfg.seed, 7, i), conv)
            s = st.summary()
            schur = max(schur, st.schur_residual)
            rep.add_row(lam, f"det_renorm_median_{conv}", s["det_renorm_median"])
            rep.add_row(lam, f"det_renorm_min_{conv}", s["det_renorm_min"])
            rep.add_row(lam, f"det_renorm_max_{conv}", s["det_renorm_max"])
            rep.add_row(lam, f"norm_B_median_{conv}", s["median_norm_B"])
            rep.add_row(lam, f"norm_C_median_{conv}", s["median_norm_C"])
            rep.add_row(lam, f"abs_D_eff_median_{conv}", s["median_abs_D_eff"])
            rep.add_row(lam, f"flagged_{conv}", s["flagged"])
            med["det"].append((lam, abs(s["det_renorm_median"])))
            med["B"].append((lam, s["median_norm_B"]))
            med["C"].append((lam, s["median_norm_C"]))
            med["Deff"].append((lam, s["median_abs_D_eff"]))
        refs = {"det": 0.0, "B": -1.0, "C": -0.5, "Deff": 0.0}
        for key, pts in med.items():
            pts = [(x, y) for x, y in pts if y > 0 and math.isfinite(y)]
            if len(pts) >= 3:
                fit = fit_power_law(pts)
                rep.add_fit(f"{key}_{conv}", fit)
                rep.add_flag(f"{key} slope convention {conv}", 10, REPORT,
                             abs(fit.slope - refs[key]) <= 0.2, fit.slope, f"{refs[key]:+.2f} +- 0.2")
    rep.add_row(0, "schur_identity_max_rel_residual", schur)
    rep.add_flag("Schur determinant identity", 1, HARD, schur <= 1e-10, schur, "<= 1e-10")
    return rep


# ---------------------------------------------------------------------------
# null form


@_timed
def run_nullform(cfg: ExperimentConfig) -> ExperimentReport:
    """Spectral norm of the projector difference versus the sine of the angle."""
    rep = _new("nullform", cfg)
    rng = _rng(cfg, 8)
    xi = rng.standard_normal((cfg.nullform_pairs, 3))
    eta = rng.standard_normal((cfg.nullform_pairs, 3))
    op, s = nullform_opnorms(xi, eta)
    err = float(np.abs(op - s).max())
    rep.add_row(cfg.nullform_pairs, "opnorm_minus_sin_max", err)
    rep.add_flag("null-form norm equals sine", 1, HARD, err <= 1e-12, err, "<= 1e-12")

    ex = nullform_symbol([16.0, 0.0, 0.0], [-16.0, 0.25, 0.0])
    rep.add_row(16, "example_opnorm", ex.op_norm)
    rep.add_row(16, "example_bound", ex.bound)

    worst = 0.0
    for i, lam in enumerate(cfg.narrow_lambda_list):
        x, y = phase.narrow_pairs(lam, cfg.delta, 20_000, cell_seed(cfg.seed, 9, i))
        o, _ = nullform_opnorms(x, y)
        lam_eff = np.maximum(np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1))
        c = float(np.max(o * lam_eff / np.linalg.norm(x + y, axis=1)))
        rep.add_row(lam, "narrow_nullform_constant", c)
        worst = max(worst, c)
    rep.add_flag("narrow null-form constant", 4, REPORT, worst <= 2.0, worst, "<= 2")
    return rep


# ---------------------------------------------------------------------------
# narrow volume


@_timed
def run_narrow_volume(cfg: ExperimentConfig) -> ExperimentReport:
    """Monte Carlo volumes of the narrow set and the collinearity constant."""
    rep = _new("narrow-volume", cfg)
    for d_i, delta in enumerate(cfg.delta_list):
        for variant, ref, tol, kind in (("global", 2 - 3 * delta, 0.2, HARD),
                                        ("cap", 1 - 3 * delta, 0.3, REPORT)):
            pts = []
            for i, lam in enumerate(cfg.narrow_lambda_list):
                v = phase.narrow_volume_mc(lam, delta, cfg.samples, cell_seed(cfg.seed, 10, d_i, i), variant)
                rep.add_row(lam, f"volume_{variant}_delta{delta:.4f}", v.estimate, v.stderr)
                pts.append((lam, v.estimate))
            fit = fit_power_law(pts)
            rep.add_fit(f"volume_{variant}_delta{delta:.4f}", fit)
            rep.add_flag(f"{variant} volume exponent delta={delta:.4f}", 4, kind,
                         abs(fit.slope - ref) <= tol, fit.slope, f"{ref:+.4f} +- {tol}")
    worst = 0.0
    for i, lam in enumerate(cfg.narrow_lambda_list):
        x, y = phase.narrow_pairs(lam, cfg.delta, 20_000, cell_seed(cfg.seed, 11, i))
        c = phase.collinearity_constant(x, y, lam)
        rep.add_row(lam, "collinearity_constant", c)
        worst = max(worst, c)
    rep.add_flag("almost-collinearity constant", 4, HARD, worst <= 2.0, worst, "<= 2")
    return rep


# ---------------------------------------------------------------------------
# strichartz


@_timed
def run_strichartz(cfg: ExperimentConfig) -> ExperimentReport:
    """Propagator identities, local L6 / bilinear L3 scaling and TT* kernel diagnostics."""
    rep = _new("strichartz", cfg)
    grid = GridSpec(cfg.grid)
    rng = _rng(cfg, 12)
    f = dft_forward(_random_real(grid, rng), grid)
    iso = max(abs(l2_norm(flows.wave_propagate(f, t)) / l2_norm(f) - 1.0)
              for t in rng.uniform(-10, 10, 5))
    s, t = 0.37, 1.91
    grp = l2_norm(flows.wave_propagate(flows.wave_propagate(f, s), t)
                  - flows.wave_propagate(f, s + t)) / l2_norm(f)
    rep.add_row(grid.n, "wave_isometry_error", iso)
    rep.add_row(grid.n, "wave_group_law_error", grp)
    rep.add_flag("wave-flow isometry", 1, HARD, iso <= 1e-13, iso, "<= 1e-13")
    rep.add_flag("wave group law", 1, REPORT, grp <= 1e-12, grp, "<= 1e-12")

    e3 = np.array([0.0, 0.0, 1.0])
    l6, l3, l6r, schur = [], [], [], []
    drift = 0.0

    def cell(item):
        i, lam = item
        pk = packets.build_packet(lam, e3)
        w = flows.TimeWindow.for_scale(lam, cfg.nt)
        r = flows.local_strichartz_ratio(lam, e3, pk.field, w)
        r2 = flows.local_strichartz_ratio(lam, e3, pk.field, w.refined())
        b = flows.bilinear_l3_ratio(lam, e3, e3, pk.field, pk.field, w)
        fam = packets.PacketFamily(lam, e3, grid=pk.grid)
        rf = fam.random_cap_field(_rng(cfg, 13, i))
        rr = flows.local_strichartz_ratio(lam, e3, rf, w)
        sb = flows.schur_window_bound(lam, e3, nt=cfg.nt + 1)
        return lam, r, abs(r2 / r - 1.0), b, rr, sb

    for lam, r, dr, b, rr, sb in parallel_map(cell, list(enumerate(cfg.lambda_list))):
        rep.add_row(lam, "local_L6_ratio_packet", r)
        rep.add_row(lam, "local_L6_time_refinement_drift", dr)
        rep.add_row(lam, "bilinear_L3_ratio_packet", b)
        rep.add_row(lam, "local_L6_ratio_random", rr)
        rep.add_row(lam, "schur_window_integral", sb)
        l6.append((lam, r))
        l3.append((lam, b))
        l6r.append((lam, rr))
        schur.append((lam, sb))
        drift = max(drift, dr)
    rep.add_flag("time quadrature refinement drift", 7, REPORT, drift <= 0.01, drift, "<= 0.01")
    f6, f3 = fit_power_law(l6), fit_power_law(l3)
    fr, fs = fit_power_law(l6r), fit_power_law(schur)
    rep.add_fit("local_L6_ratio_packet", f6)
    rep.add_fit("bilinear_L3_ratio_packet", f3)
    rep.add_fit("local_L6_ratio_random", fr)
    rep.add_fit("schur_window_integral", fs)
    rep.add_flag("local L6 slope", 7, SOFT, f6.slope <= -0.5 + 0.15, f6.slope, "<= -0.35")
    rep.add_flag("bilinear L3 slope", 7, SOFT, f3.slope <= -1.0 + 0.25, f3.slope, "<= -0.75")
    rep.add_flag("Schur window slope", 7, REPORT, fs.slope <= -1.0 + 0.3, fs.slope, "<= -0.7")

    lam_k = 32 if not cfg.quick else 16
    radii = np.array([0.5, 1.0, 2.0, 3.0, 4.0]) / math.sqrt(lam_k)
    prof = flows.kernel_decay_profile(lam_k, e3, radii)
    env = (1.0 + math.sqrt(lam_k) * radii) ** -2.0
    c_env = float(np.max(prof / env))
    for r, p in zip(radii, prof):
        rep.add_row(lam_k, f"kernel_transverse_decay_r{r * math.sqrt(lam_k):.1f}", p)
    rep.add_row(lam_k, "kernel_envelope_constant", c_env)
    return rep


# ---------------------------------------------------------------------------
# bridge and patching


@_timed
def run_bridge(cfg: ExperimentConfig) -> ExperimentReport:
    """Heat-to-wave bridge quadrature and the temporal patching exponent."""
    rep = _new("bridge", cfg)
    pts = []
    for lam in cfg.bridge_lambda_list:
        b = flows.bridge_remainder(lam)
        rep.add_row(lam, "bridge_scalar_integral", b.scalar_integral, b.abserr)
        rep.add_row(lam, "bridge_operator_bound", b.operator_bound)
        pts.append((lam, b.operator_bound))
    fit = fit_power_law(pts)
    rep.add_fit("bridge_operator_bound", fit)
    rep.add_flag("bridge slope", 5, HARD, abs(fit.slope + 1.5) <= 0.1, fit.slope, "-1.5 +- 0.1")

    pp = []
    for k in range(4, 11):
        lam = 2.0**k
        val = lam**-0.5 * flows.patching_factor(lam, 1.0)
        rep.add_row(lam, "patched_L6_factor", val)
        rep.add_row(lam, "patch_count", flows.patch_count(lam, 1.0))
        pp.append((lam, val))
    fp = fit_power_law(pp)
    rep.add_fit("patched_L6_factor", fp)
    rep.add_flag("patching slope", 6, HARD, abs(fp.slope + 5.0 / 12.0) <= 0.02, fp.slope, "-5/12 +- 0.02")
    return rep


# ---------------------------------------------------------------------------
# decoupling


@_timed
def run_decoupling(cfg: ExperimentConfig) -> ExperimentReport:
    """Tiling, admissible pairs and the bilinear extension exponent scan."""
    rep = _new("decoupling", cfg)
    e3 = np.array([0.0, 0.0, 1.0])
    partners = []
    for lam in cfg.decoupling_lambda_list:
        ta = tile_cap(lam, e3)
        tb = tile_cap(lam, -e3)
        pl = admissible_pairs(ta, tb, math.sqrt(lam))
        rep.add_row(lam, "tile_count", len(ta))
        rep.add_row(lam, "admissible_pairs_antipodal", len(pl))
        rep.add_row(lam, "max_partners", pl.max_partners)
        partners.append((lam, pl.max_partners))
    fpp = fit_power_law(partners)
    rep.add_fit("max_partners", fpp)
    rep.add_flag("max partners trend", 9, REPORT, fpp.slope <= 0.2, fpp.slope, "<= 0.2")

    scan = decoupling_exponent_scan(cfg.decoupling_lambda_list, cfg.trials, cell_seed(cfg.seed, 14), nt=cfg.nt)
    for lam, a, b in zip(scan.lambdas, scan.same_cap, scan.separated_cap):
        rep.add_row(lam, "extension_L6_same_cap", a)
        rep.add_row(lam, "extension_L6_separated_cap", b)
    rep.add_fit("extension_L6_same_cap", scan.fit)
    rep.add_fit("extension_L6_separated_cap", scan.separated_fit)
    for name, val in sorted(BENCHMARKS.items()):
        rep.add_row(0, f"benchmark_{name}", val)
    rep.add_flag("extension slope vs tile baseline", 9, HARD, scan.baseline_pass, scan.fit.slope, "<= -0.35")
    rep.add_flag("separated slope <= same-cap slope", 9, REPORT,
                 scan.separated_fit.slope <= scan.fit.slope, scan.separated_fit.slope,
                 f"<= {scan.fit.slope:.4f}")
    return rep


# ---------------------------------------------------------------------------
# resonant sweep


def run_logfree_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Headline ratio ``r_N`` over seeds and scales, plus the narrow-block ratio."""
    rep = _new("resonant", cfg)
    grid = GridSpec(cfg.grid)
    bank = build_dyadic_bank(grid, cfg.k_min, cfg.k_max)
    ns = list(cfg.n_list)

    def cell(j):
        u = _field_for(cfg, grid, cell_seed(cfg.seed, 15, j))
        r = [hminus_ratio(u, ResonantConfig(N, cfg.m_cut, cfg.delta, cfg.output_projector), bank) for N in ns]
        nar = [narrow_ratio(u, lam, cfg.delta, cfg.box_scale, bank) for lam in ns]
        return r, nar

    results = parallel_map(cell, range(cfg.seeds))
    pooled, pooled_nar = [], []
    for j, (r, nar) in enumerate(results):
        for N, v in zip(ns, r):
            rep.add_row(N, f"r_N_seed{j}", v)
            pooled.append((N, v))
        for lam, v in zip(ns, nar):
            rep.add_row(lam, f"narrow_ratio_seed{j}", v)
            pooled_nar.append((lam, v))
    arr = np.array([r for r, _ in results])
    means = arr.mean(axis=0)
    errs = arr.std(axis=0, ddof=1) / math.sqrt(arr.shape[0]) if arr.shape[0] > 1 else np.zeros_like(means)
    for N, m, e in zip(ns, means, errs):
        rep.add_row(N, "r_N_mean", m, e)
    fit = fit_power_law(pooled)
    rep.add_fit("r_N", fit)
    spread = float(means.max() / np.median(means))
    rep.add_row(0, "r_N_max_over_median", spread)
    rep.add_flag("headline slope", 2, HARD, fit.slope <= 0.1, fit.slope, "<= 0.1")
    rep.add_flag("headline max/median", 2, HARD, spread <= 3.0, spread, "<= 3")
    fn = fit_power_law(pooled_nar)
    rep.add_fit("narrow_ratio", fn)
    rep.add_flag("narrow-block ratio slope", 2, HARD, fn.slope <= 0.1, fn.slope, "<= 0.1")
    return rep


def run_scale_identities(cfg: ExperimentConfig, rep: ExperimentReport) -> None:
    """Compare ``R_N(u)`` with ``R_2N`` of the dyadically rescaled field."""
    grid = GridSpec(cfg.grid)
    bank = default_bank(grid)
    u = _field_for(cfg, grid, cell_seed(cfg.seed, 16), (1.0, grid.n / 8))
    u2 = rescale_field(u, 1)
    N = 4
    c1 = ResonantConfig(N, cfg.m_cut, cfg.delta, cfg.output_projector)
    c2 = ResonantConfig(2 * N, cfg.m_cut, cfg.delta, cfg.output_projector)
    r1, r2 = hminus_ratio(u, c1, bank), hminus_ratio(u2, c2, bank)
    n1 = sobolev_norm(resonant_block(u, c1, bank), -1.0)
    n2 = sobolev_norm(resonant_block(u2, c2, bank), -1.0)
    rep.add_row(N, "r_N_base", r1)
    rep.add_row(2 * N, "r_2N_rescaled", r2)
    rep.add_row(N, "R_hminus1_base", n1)
    rep.add_row(2 * N, "R_hminus1_rescaled", n2)
    d_ratio = abs(r2 / r1 - 1.0)
    d_norm = abs(n2 / (math.sqrt(2.0) * n1) - 1.0)
    rep.add_flag("r_2N(u_2) = r_N(u)", 3, HARD, d_ratio <= 1e-10, d_ratio, "<= 1e-10")
    rep.add_flag("||R_2N(u_2)|| = 2^(1/2) ||R_N(u)||", 3, HARD, d_norm <= 1e-10, d_norm, "<= 1e-10")
    lat_r = abs(r2 / (r1 * 2**-0.5) - 1.0)
    lat_n = abs(n2 / (0.5 * n1) - 1.0)
    rep.add_flag("lattice law r_2N(u_2) = 2^(-1/2) r_N(u)", 3, REPORT, lat_r <= 1e-10, lat_r, "<= 1e-10")
    rep.add_flag("lattice law ||R_2N(u_2)|| = 2^(-1) ||R_N(u)||", 3, REPORT, lat_n <= 1e-10, lat_n, "<= 1e-10")


@_timed
def run_resonant(cfg: ExperimentConfig) -> ExperimentReport:
    """Log-free sweep followed by the scale-identity checks."""
    rep = run_logfree_sweep(cfg)
    run_scale_identities(cfg, rep)
    return rep


# ---------------------------------------------------------------------------
# orthogonality


def run_orthogonality_suite(cfg: ExperimentConfig) -> ExperimentReport:
    """Pairwise H^-1 orthogonality of resonant blocks and Pythagorean sums."""
    rep = _new("ortho", cfg)
    grid = GridSpec(cfg.grid)
    bank = build_dyadic_bank(grid, cfg.k_min, cfg.k_max)
    scales = [N for N in bank.scales if N >= 2]
    if len(scales) < 3:
        raise ValueError("orthogonality suite needs at least three dyads")
    far, near, pyth = 0.0, 0.0, 0.0
    for j in range(min(cfg.seeds, 3)):
        u = _field_for(cfg, grid, cell_seed(cfg.seed, 17, j))
        blocks = {N: resonant_block(u, ResonantConfig(N, cfg.m_cut, cfg.delta, cfg.output_projector), bank)
                  for N in scales}
        norms = {N: sobolev_norm(b, -1.0) for N, b in blocks.items()}
        for a_i, N in enumerate(scales):
            for M in scales[a_i + 1:]:
                ip = abs(blocks[N].inner(blocks[M], -1.0)) / (norms[N] * norms[M])
                if M == 2 * N:
                    near = max(near, ip)
                else:
                    far = max(far, ip)
        for parity in (0, 1):
            fam = scales[parity::2]
            total = blocks[fam[0]]
            for N in fam[1:]:
                total = total + blocks[N]
            lhs = sobolev_norm(total, -1.0) ** 2
            rhs = sum(norms[N] ** 2 for N in fam)
            pyth = max(pyth, abs(lhs - rhs) / rhs)
    rep.add_row(0, "far_dyad_max_normalized_inner", far)
    rep.add_row(0, "adjacent_dyad_max_normalized_inner", near)
    rep.add_row(0, "pythagorean_rel_residual", pyth)
    rep.add_flag("resonant blocks orthogonal (>= 2 octaves)", 1, REPORT, far <= 1e-12, far, "<= 1e-12")
    rep.add_flag("Pythagorean sum over separated dyads", 1, REPORT, pyth <= 1e-10, pyth, "<= 1e-10")
    rep.add_flag("adjacent dyads overlap", 1, REPORT, True, near, "reported")
    return rep


run_ortho = _timed(run_orthogonality_suite)


# ---------------------------------------------------------------------------
# exponent summary


def _slope(reports: Dict[str, ExperimentReport], exp: str, qty: str):
    rep = reports.get(exp)
    if rep is None:
        return None
    try:
        return rep.fit(qty)["slope"]
    except KeyError:
        return None


def run_summary(cfg: ExperimentConfig, reports: Sequence[ExperimentReport]) -> ExperimentReport:
    """Measured counterparts of the reference exponent table."""
    by = {r.experiment: r for r in reports}
    tt = _slope(by, "strichartz", "schur_window_integral")
    two = _slope(by, "strichartz", "bilinear_L3_ratio_packet")
    ext = _slope(by, "decoupling", "extension_L6_same_cap")
    gain = None if ext is None else ext + 0.5
    wide = None if None in (tt, two, gain) else tt + two + gain
    # ||R_nar||_{H^-1} / ||u_lam||_{H^1/2}^2 is the narrow ratio divided by lam
    nr = _slope(by, "resonant", "narrow_ratio")
    nar = None if nr is None else nr - 1.0
    measured = {
        "phase IBPs + TT* localization": tt,
        "two local Strichartz estimates": two,
        "bilinear decoupling gain": gain,
        "wide region combined": wide,
        "outcome on one dyad (narrow)": nar,
    }
    rep = _new("degree-table", cfg)
    for i, (label, val) in enumerate(measured.items()):
        rep.add_row(i, label, float("nan") if val is None else val)
    rep.notes.append(render_degree_table(measured))
    return rep


SUITES = {
    "lp": run_lp,
    "caps": run_caps,
    "packets": run_packets,
    "phase": run_phase,
    "nullform": run_nullform,
    "narrow-volume": run_narrow_volume,
    "strichartz": run_strichartz,
    "bridge": run_bridge,
    "decoupling": run_decoupling,
    "resonant": run_resonant,
    "ortho": run_ortho,
}


def run_all(cfg: ExperimentConfig) -> List[ExperimentReport]:
    reports = [SUITES[name](cfg) for name in SUITES]
    reports.append(run_summary(cfg, reports))
    return reports
