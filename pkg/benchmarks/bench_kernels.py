"""Compare the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--paths 4096] [--params 64] [--stages 252]

Reports wall time, nanoseconds per (parameter, path, stage) step and the
speed-up, and checks that both backends return identical numbers.
"""

import argparse
import time

import numpy as np

from drawdown_modulation import kernels
from drawdown_modulation.returns import coin, sample_indices


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def bench_grid(impl, values, idx, kind, gains, dmaxes, repeats):
    def run():
        out = np.zeros((len(gains), 4))
        impl.grid_sums(values, idx, kind, gains, dmaxes, out)
        return out
    return best_of(repeats, run)


def bench_paths(impl, values, idx, kind, gain, d_max, repeats):
    def run():
        w, d = np.empty(len(idx)), np.empty(len(idx))
        impl.path_stats(values, idx, kind, gain, d_max, w, d)
        return np.stack([w, d])
    return best_of(repeats, run)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=4096)
    parser.add_argument("--params", type=int, default=64)
    parser.add_argument("--stages", type=int, default=252)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    dist = coin(1 / 30, -1 / 30, 0.6)
    values = np.ascontiguousarray(dist.values)
    idx = sample_indices(dist, args.stages, 0, 0, args.paths)
    gains = np.linspace(-4.0, 4.0, args.params)
    dmaxes = np.linspace(0.05, 0.25, args.params)
    backends = kernels.available()
    print(f"backends: {backends} (selected: {kernels.BACKEND})")
    print(f"workload: {args.params} params x {args.paths} paths x {args.stages} stages")

    rows = []
    for label, kind in (("markowitz", kernels.MARKOWITZ), ("modulated", kernels.MODULATED)):
        steps = args.params * args.paths * args.stages
        results = {}
        for name in backends:
            impl = kernels.load(name)
            t, out = bench_grid(impl, values, idx, kind, gains, dmaxes, args.repeats)
            results[name] = (t, out)
            rows.append((f"grid_sums/{label}", name, t, 1e9 * t / steps))
        t, out = bench_paths(kernels.load(backends[0]), values, idx, kind, 1.5, 0.2,
                             args.repeats)
        rows.append((f"path_stats/{label}", backends[0], t, 1e9 * t / (args.paths * args.stages)))
        if len(results) == 2:
            same = np.array_equal(results["compiled"][1], results["python"][1])
            speedup = results["python"][0] / results["compiled"][0]
            print(f"{label}: compiled is {speedup:.1f}x faster; identical output: {same}")

    print(f"{'kernel':<22}{'backend':<10}{'seconds':>10}{'ns/step':>10}")
    for kernel, name, t, ns in rows:
        print(f"{kernel:<22}{name:<10}{t:>10.4f}{ns:>10.2f}")


if __name__ == "__main__":
    main()
