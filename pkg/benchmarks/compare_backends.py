"""Compare the compiled kernel core against the numpy fallback.

Two views: microbenchmarks of the core primitives (both backends loaded
side by side in one process), and an end-to-end benchmark run in a
subprocess per backend, since the scoring modules bind their backend at
import time.

Usage:
    python benchmarks/compare_backends.py [--n 2000] [--dim 32] [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from gmi.backend import available_backends, get_impl


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def micro(n, dim, gamma, repeats):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(n, dim))
    Y = rng.normal(size=(n // 2, dim))
    q = rng.normal(size=dim)
    a = rng.uniform(-1, 1, size=n)
    b = rng.uniform(-1, 1, size=n // 2)

    cases = {
        f"rbf_gram {n}x{n // 2}x{dim}":
            lambda impl: impl.rbf_gram(X, Y, gamma),
        f"rbf_to_point {n}x{dim}":
            lambda impl: impl.rbf_to_point(X, q, gamma),
        f"expansion_sq_distance {n}/{n // 2}":
            lambda impl: impl.expansion_sq_distance(X, a, Y, b, gamma),
        f"cosine_weights {n}x{dim}":
            lambda impl: impl.cosine_weights(X, q),
    }

    rows = []
    for label, call in cases.items():
        row = {"case": label}
        for name in available_backends():
            impl = get_impl(name)
            call(impl)  # warm up
            row[name] = best_of(lambda: call(impl), repeats)
        rows.append(row)
    return rows


PIPELINE_SNIPPET = """
import json, time
from gmi.backend import active_backend
from gmi.bench.harness import BenchmarkConfig, build_benchmark, run_benchmark

specs, tasks = build_benchmark(BenchmarkConfig(n_seeds=2))
t0 = time.perf_counter()
reports = run_benchmark(specs, tasks, strategies=("weighted", "rkme-embed"))
elapsed = time.perf_counter() - t0
print(json.dumps({"backend": active_backend(), "seconds": elapsed,
                  "tasks": len(tasks)}))
"""


def pipeline(repeats):
    rows = []
    for name in available_backends():
        env = dict(os.environ, GMI_BACKEND=name)
        best = None
        for _ in range(repeats):
            out = subprocess.run([sys.executable, "-c", PIPELINE_SNIPPET],
                                 capture_output=True, text=True, env=env,
                                 check=True)
            doc = json.loads(out.stdout)
            assert doc["backend"] == name
            best = doc["seconds"] if best is None else min(best, doc["seconds"])
        rows.append({"case": f"benchmark {doc['tasks']} tasks, 2 strategies",
                     name: best})
    # merge the per-backend rows into one
    merged = {"case": rows[0]["case"]}
    for row in rows:
        merged.update({k: v for k, v in row.items() if k != "case"})
    return [merged]


def print_table(rows, backends):
    width = max(len(r["case"]) for r in rows) + 2
    header = "case".ljust(width) + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for r in rows:
        line = r["case"].ljust(width)
        for b in backends:
            line += f"{r[b] * 1e3:>10.3f}ms"
        if len(backends) == 2 and r[backends[1]] > 0:
            line += f"{r[backends[1]] / r[backends[0]]:>9.2f}x"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--gamma", type=float, default=0.02)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--skip-pipeline", action="store_true",
                    help="microbenchmarks only")
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled extension not built; timing the numpy fallback only")

    rows = micro(args.n, args.dim, args.gamma, args.repeats)
    if not args.skip_pipeline:
        rows += pipeline(max(1, args.repeats // 2))
    print_table(rows, backends)


if __name__ == "__main__":
    main()
