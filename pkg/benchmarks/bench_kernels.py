"""Compare the compiled kernels against the pure-python fallback.

Runs the same workload twice in subprocesses, once as installed and once
with FSC_NO_NUMBA=1, then prints a side-by-side table.  Usage:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_workload(repeats):
    import numpy as np

    from fewshotword import CodeSequence, FeatureSequence, dtw, edit_distance
    from fewshotword._kernels import NUMBA_ENABLED
    from fewshotword.features import _nearest_centroid

    gen = np.random.RandomState(0)
    pairs = [(FeatureSequence(gen.rand(100, 13).astype(np.float32)),
              FeatureSequence(gen.rand(120, 13).astype(np.float32)))
             for _ in range(20)]
    code_pairs = [(CodeSequence(gen.randint(0, 100, 60), 100),
                   CodeSequence(gen.randint(0, 100, 70), 100))
                  for _ in range(200)]
    frames = gen.rand(20000, 13)
    centroids = gen.rand(100, 13)

    # first call may compile; do one throwaway pass before timing
    dtw(*pairs[0])
    edit_distance(*code_pairs[0])
    _nearest_centroid(frames[:10], centroids)

    def best_of(fn):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    results = {
        "numba": bool(NUMBA_ENABLED),
        "dtw 20x(100x120, d=13)": best_of(
            lambda: [dtw(a, b) for a, b in pairs]),
        "edit distance 200x(60,70)": best_of(
            lambda: [edit_distance(a, b) for a, b in code_pairs]),
        "nearest centroid 20000x100": best_of(
            lambda: _nearest_centroid(frames, centroids)),
    }
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--inner", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.inner:
        print(json.dumps(run_workload(args.repeats)))
        return

    rows = []
    for label, env_value in (("compiled", None), ("fallback", "1")):
        env = dict(os.environ)
        env.pop("FSC_NO_NUMBA", None)
        if env_value:
            env["FSC_NO_NUMBA"] = env_value
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner",
             "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env, check=True)
        rows.append((label, json.loads(proc.stdout.strip().splitlines()[-1])))

    names = [k for k in rows[0][1] if k != "numba"]
    width = max(len(n) for n in names)
    print(f"{'workload':<{width}}  {'compiled':>10}  {'fallback':>10}  "
          f"{'speedup':>8}")
    for name in names:
        fast = rows[0][1][name]
        slow = rows[1][1][name]
        print(f"{name:<{width}}  {fast * 1e3:>8.2f}ms  {slow * 1e3:>8.2f}ms  "
              f"{slow / fast:>7.1f}x")
    if not rows[0][1]["numba"]:
        print("note: compiled run reported numba disabled; timings are "
              "fallback vs fallback")


if __name__ == "__main__":
    main()
