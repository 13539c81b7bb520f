"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are called on identical inputs; the script also reports the
largest disagreement so a speedup never hides a wrong answer.
"""

import argparse
import timeit

import numpy as np

from reslab import _kernels_py as py
from reslab import kernels


def cases(rng):
    f = rng.integers(-64, 65, (4000, 3)).astype(float)
    w = rng.standard_normal(4000) + 1j * rng.standard_normal(4000)
    z = rng.standard_normal((256, 3))
    t = rng.standard_normal(256)
    xi = rng.standard_normal((200_000, 3)) * 50
    eta = rng.standard_normal((200_000, 3)) * 50
    return {
        "exp_sum K=4000 P=256": ("exp_sum", (f, w, z, t)),
        "phase_minor_batch K=2e5": ("phase_minor_batch", (xi, eta, 0)),
    }


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    ok = ~np.isnan(a)
    return float(np.max(np.abs(a[ok] - b[ok]))) if ok.any() else 0.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, (name, argv) in cases(rng).items():
        fp = getattr(py, name)
        fc = getattr(kernels.compiled_backend, name)
        tp = min(timeit.repeat(lambda: fp(*argv), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fc(*argv), number=1, repeat=args.repeat))
        print(f"{label:28s} {tp:11.4f} {tc:11.4f} {tp / tc:8.2f} {max_diff(fp(*argv), fc(*argv)):11.2e}")


if __name__ == "__main__":
    main()
