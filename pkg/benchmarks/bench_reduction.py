"""Benchmark: compiled vs pure-Python elimination kernels.

Times ``streaming_reduce`` (the full construction hot path) and
``reduce_block`` (one elimination round) on matched random inputs and
verifies both kernels satisfy the moment-conservation contract.

Run:  python3 benchmarks/bench_reduction.py
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from quadcal import _reduction_py
from quadcal.basis import enumerate_basis, vandermonde

try:
    from quadcal import _reduction as _compiled
except ImportError:
    _compiled = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_streaming(d: int, n_basis: int, n_samples: int, repeats: int, seed: int):
    rng = np.random.default_rng(seed)
    basis = enumerate_basis(d, n_basis, box=(np.zeros(d), np.ones(d)))
    samples = rng.random((n_samples, d))
    V = np.ascontiguousarray(vandermonde(basis, samples))
    mu = V.mean(axis=1)

    results = {}
    for name, mod in (("compiled", _compiled), ("python", _reduction_py)):
        if mod is None:
            continue

        def run(mod=mod):
            w = np.full(n_samples, 1.0 / n_samples)
            surv = np.asarray(mod.streaming_reduce(V.copy(), w, 32))
            return surv, w

        elapsed = _time(lambda: run(), repeats)
        surv, w = run()
        err = np.abs(V[:, surv] @ w[surv] - mu).max() / max(1.0, np.abs(mu).max())
        assert surv.size <= n_basis and w[surv].min() >= 0.0
        results[name] = (elapsed, err, surv.size)
    return results


def bench_reduce_block(n_basis: int, m: int, repeats: int, seed: int):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_basis, m))
    import scipy.linalg

    q, _ = scipy.linalg.qr(A.T, mode="full")
    C0 = np.ascontiguousarray(q[:, n_basis:].T)
    w0 = np.full(m, 1.0 / m)
    protect = np.zeros(m, dtype=np.uint8)

    results = {}
    for name, mod in (("compiled", _compiled), ("python", _reduction_py)):
        if mod is None:
            continue

        def run(mod=mod):
            C = C0.copy()
            w = w0.copy()
            return mod.reduce_block(C, w, protect), w

        elapsed = _time(lambda: run(), repeats)
        pivots, w = run()
        assert w.min() >= 0.0 and len(pivots) >= 1
        results[name] = (elapsed, None, len(pivots))
    return results


def _report(label: str, results: dict) -> None:
    print(f"\n{label}")
    base = results.get("python", (float("nan"),))[0]
    for name, (elapsed, err, n) in results.items():
        speed = base / elapsed if elapsed else float("nan")
        extra = f"  rel_moment_err={err:.2e}" if err is not None else ""
        print(
            f"  {name:8s}  {elapsed * 1e3:9.2f} ms  x{speed:6.2f} vs python"
            f"  survivors/pivots={n}{extra}"
        )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _compiled is None:
        print("compiled kernel not available; timing the python kernel only")

    for d, n_basis, n_samples in ((1, 8, 20_000), (1, 31, 50_000), (2, 28, 50_000), (7, 120, 20_000)):
        label = f"streaming_reduce  d={d} n_basis={n_basis} K={n_samples}"
        _report(label, bench_streaming(d, n_basis, n_samples, args.repeats, args.seed))

    for n_basis, m in ((16, 48), (56, 88), (120, 152)):
        label = f"reduce_block      n_basis={n_basis} window={m}"
        _report(label, bench_reduce_block(n_basis, m, args.repeats, args.seed))


if __name__ == "__main__":
    main()
