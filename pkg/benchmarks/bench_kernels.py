"""Compare the compiled and pure-Python RREF kernels.

Runs both on random integer matrices and on the Leibniz systems that the
derivation solver builds, checks that the outputs agree and prints timings.  Rows marked
``fallback`` overflowed int64, so the compiled path handed over to the
bigint kernel.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import random
import time

from carnotlie import free_nilpotent, heisenberg
from carnotlie.derivations import _leibniz_rows
from carnotlie.linalg import _integer_rows, _kernels_c, rref_int


def random_system(rows: int, cols: int, density: float, seed: int):
    rng = random.Random(seed)
    out = []
    for _ in range(rows):
        out.append({c: rng.randint(-5, 5) for c in range(cols) if rng.random() < density})
    return [{c: v for c, v in r.items() if v} for r in out]


def leibniz_system(alg):
    n = alg.dim
    var = {(l, k): l * n + k for l in range(n) for k in range(n)}
    rows, _ = _integer_rows(_leibniz_rows(alg, var))
    return rows, n * n


def bench(label, rows, ncols, repeat):
    timings = {}
    results = {}
    for backend in ("python", "cython"):
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            results[backend] = rref_int(rows, ncols, backend)
            best = min(best, time.perf_counter() - t)
        timings[backend] = best
    same = results["python"] == results["cython"]
    try:
        _kernels_c.rref_int([[r.get(c, 0) for c in range(ncols)] for r in rows], ncols)
        path = "int64"
    except OverflowError:
        path = "fallback"
    speedup = timings["python"] / timings["cython"] if timings["cython"] else float("inf")
    print(
        f"{label:<28} {len(rows):>5}x{ncols:<5} python {timings['python'] * 1e3:9.2f} ms"
        f"  cython {timings['cython'] * 1e3:9.2f} ms  x{speedup:6.1f}  {path:<8} {'agree' if same else 'MISMATCH'}"
    )
    return same


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if _kernels_c is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return 1
    cases = [
        ("random 12x12 dense", 12, 12, 0.9),
        ("random 60x60 sparse", 60, 60, 0.04),
        ("random 40x40 dense", 40, 40, 0.9),
    ]
    ok = True
    for seed, (label, nrows, ncols, density) in enumerate(cases):
        ok &= bench(label, random_system(nrows, ncols, density, seed), ncols, args.repeat)
    for alg in (heisenberg(2), free_nilpotent(2, 4), free_nilpotent(3, 3)):
        rows, ncols = leibniz_system(alg)
        ok &= bench(f"Leibniz {alg.name}", rows, ncols, args.repeat)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
