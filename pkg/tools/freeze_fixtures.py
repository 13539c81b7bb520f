"""Compute the frozen regression values used by the test suite.

Run from the repository root::

    python3 tools/freeze_fixtures.py

The output goes to ``tests/fixtures/frozen.json``. Quantities with a cheap
independent evaluation (Sobolev norms, the bridge integral) are computed here
without the package routine that the tests exercise.
"""

import json
import math
from pathlib import Path

import numpy as np

from reslab import decoupling, flows, packets
from reslab.filters import build_caps
from reslab.resonance import ResonantConfig, hminus_ratio
from reslab.spectral import GridSpec, power_profile, random_divfree_field

E3 = np.array([0.0, 0.0, 1.0])
OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "frozen.json"


def direct_sobolev(u, s):
    # sum over nonzero modes of |xi|^{2s} |c|^2 / (2 pi)^3, written out by hand
    n = u.grid.n
    k = np.fft.fftfreq(n, 1.0 / n)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    r2 = kx**2 + ky**2 + kz**2
    w = np.zeros_like(r2)
    nz = r2 > 0
    w[nz] = r2[nz] ** s
    return math.sqrt(float(np.sum(w * np.sum(np.abs(u.coeffs) ** 2, axis=0))) / (2 * math.pi) ** 3)


def gauss_bridge(lam, panels=4000):
    # composite 20-point Gauss-Legendre, finer near s = 0 where the heat factor varies
    x, w = np.polynomial.legendre.leggauss(20)
    T = lam ** -0.5
    edges = np.unique(np.concatenate([np.geomspace(1e-9, T, panels), [0.0]]))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * x + 0.5 * (a + b)
        f = np.abs(np.exp(-s * lam * lam) - np.exp(1j * s * lam))
        total += 0.5 * (b - a) * float(np.dot(w, f))
    return total


def main():
    data = {}

    u = random_divfree_field(GridSpec(128), 0, power_profile(-2.0), (2.0, 32.0))
    data["spectral"] = {"divfree_128_profile_m2_support_2_32": {
        "h_half": direct_sobolev(u, 0.5), "h_one": direct_sobolev(u, 1.0)}}

    data["filters"] = {"cap_count_N16": int(build_caps(16).count)}

    data["resonance"] = {"r_N8_seed42_grid64": hminus_ratio(
        random_divfree_field(GridSpec(64), 42), ResonantConfig(8))}

    fb = packets.packet_frame_bounds(32, E3, 50, 7)
    fam = packets.PacketFamily(16, E3)
    f = fam.random_cap_field(np.random.default_rng(12))
    data["packets"] = {
        "frame_bounds_lam32_e3_50_seed7": {"lower": fb.lower, "upper": fb.upper},
        "random_reconstruction_lam16_seed12": packets.reconstruct_from_packets(f, 16, E3).error,
    }

    f16 = packets.PacketFamily(16, E3).random_cap_field(np.random.default_rng(3))
    g16 = packets.PacketFamily(16, [1.0, 0.0, 0.0]).random_cap_field(np.random.default_rng(4))
    data["flows"] = {
        "l6_ratio_lam16_seed3": flows.local_strichartz_ratio(16, E3, f16),
        "l3_ratio_lam16_seed3_4": flows.bilinear_l3_ratio(16, E3, [1.0, 0.0, 0.0], f16, g16),
        "schur_lam16": flows.schur_window_bound(16, E3),
        "bridge_integral_lam64": gauss_bridge(64.0),
    }

    tiles = decoupling.tile_cap(64, E3)
    t16 = decoupling.tile_cap(16, E3)
    anti = decoupling.tile_cap(16, -E3)
    scan = decoupling.decoupling_exponent_scan([4, 8, 16], 5, 11)
    data["decoupling"] = {
        "tile_count_lam64_e3": len(tiles),
        "antipodal_pairs_lam16_corridor4": len(decoupling.admissible_pairs(t16, anti, 4.0)),
        "scan_4_8_16_trials5_seed11": {"same": list(scan.same_cap), "separated": list(scan.separated_cap),
                                       "slope": scan.fit.slope},
    }

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(json.dumps(data, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
