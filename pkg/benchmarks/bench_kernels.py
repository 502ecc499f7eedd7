"""Compare the compiled kernels against the numpy fallback.

Runs each hot kernel on realistic shapes (a few hundred to a few hundred
thousand vocabulary entries) and prints per-call timings for both
backends. Invoke as:

    python3 benchmarks/bench_kernels.py [--repeat 2000]
"""

import argparse
import importlib
import timeit

import numpy as np

from stegopivot._kernels import _fallback

try:
    from stegopivot._kernels import _native
except ImportError:
    _native = None

SIZES = (146, 2_000, 32_000, 200_000)


def make_case(m: int, rng: np.random.Generator):
    n_seen = max(1, m // 20)
    ids = np.sort(rng.choice(m, size=n_seen, replace=False)).astype(np.int64)
    counts = rng.integers(1, 500, size=n_seen).astype(np.float64)
    probs = rng.random(m) + 1e-9
    probs /= probs.sum()
    excluded = np.sort(rng.choice(m, size=max(1, m // 100), replace=False)).astype(np.int64)
    candidates = np.sort(rng.choice(m, size=max(2, m // 8), replace=False)).astype(np.int64)
    return ids, counts, float(counts.sum()), probs, excluded, candidates


def bench(impl, m, repeat, rng):
    ids, counts, total, probs, excluded, candidates = make_case(m, rng)
    out = np.empty(m)
    t_fill = timeit.timeit(
        lambda: impl.add_k_fill(out, ids, counts, total, 1.0), number=repeat
    )
    work = probs.copy()

    def renorm():
        np.copyto(work, probs)
        impl.renormalize_excluding(work, excluded)

    t_renorm = timeit.timeit(renorm, number=repeat)
    t_argmax = timeit.timeit(
        lambda: impl.argmax_subset(probs, candidates), number=repeat
    )
    return t_fill / repeat, t_renorm / repeat, t_argmax / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()

    impls = [("fallback", _fallback)]
    if _native is not None:
        impls.append(("native", _native))
    else:
        print("compiled extension not available; benchmarking fallback only")

    header = f"{'kernel':<22}{'m':>9}" + "".join(
        f"{name + ' us/call':>18}" for name, _ in impls
    )
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for m in SIZES:
        rng = np.random.default_rng(1234)
        results = [bench(impl, m, args.repeat, rng) for _, impl in impls]
        for row, kernel in enumerate(("add_k_fill", "renormalize_excluding",
                                      "argmax_subset")):
            line = f"{kernel:<22}{m:>9}"
            for res in results:
                line += f"{res[row] * 1e6:>18.2f}"
            if len(results) == 2 and results[1][row] > 0:
                line += f"{results[0][row] / results[1][row]:>9.2f}x"
            print(line)
        print()


if __name__ == "__main__":
    main()
