"""Benchmark the compiled solver kernels against the pure numpy fallback.

Runs the two hot loops (gram-form coordinate descent and proximal
subgradient ascent) and one full training solve on a range of problem
sizes, with both backends, and prints a comparison table:

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np


def _problem(k: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    half = rng.normal(size=(max(2 * k, 8), k))
    gram = np.ascontiguousarray(half.T @ half / half.shape[0])
    linear = np.ascontiguousarray(rng.normal(size=k) * 0.3)
    slopes = np.ascontiguousarray(rng.normal(size=(2, k)))
    offsets = np.ascontiguousarray(rng.normal(size=2))
    return gram, linear, slopes, offsets


def bench_kernels(impl, k: int, repeats: int) -> dict[str, float]:
    gram, linear, slopes, offsets = _problem(k)
    out = {}
    was = time.perf_counter()
    for _ in range(repeats):
        impl.lasso_cd_gram(gram, linear, 0.05, np.zeros(k), 500, 0.0)
    out["cd_500_sweeps"] = (time.perf_counter() - was) / repeats
    was = time.perf_counter()
    for _ in range(repeats):
        impl.prox_subgradient_maxmin(
            slopes, offsets, gram, linear, 1.0, 0.5, 0.05, 0.8,
            np.zeros(k), 5000, 0.05,
        )
    out["prox_5000_iters"] = (time.perf_counter() - was) / repeats
    return out


def bench_full_solve(k: int, n: int, repeats: int) -> float:
    from eopkit.core import crime_utility_spec
    from eopkit.solver import SolverConfig, fit_l1_regularized, solve_eop_training
    from eopkit.core import Dataset

    rng = np.random.default_rng(1)
    X = rng.normal(size=(n, k))
    y = X @ rng.uniform(-0.5, 0.5, size=k) + 0.2 * rng.normal(size=n)
    y = (y - y.min()) / (y.max() - y.min())
    ds = Dataset(X=X, y=y, groups=(rng.uniform(size=n) < 0.4).astype(int))
    lam = 1e-3
    _, eps_min = fit_l1_regularized(ds, lam)
    config = SolverConfig(loss_bound=1.5 * eps_min, lam=lam)
    spec = crime_utility_spec()
    was = time.perf_counter()
    for _ in range(repeats):
        result = solve_eop_training(ds, spec, config)
        assert result.status == "optimal"
    return (time.perf_counter() - was) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    import eopkit.solver._kernels_py as pure

    try:
        import eopkit.solver._kernels as compiled
    except ImportError:
        compiled = None
        print("compiled kernels not built; benchmarking the fallback only\n")

    print(f"{'kernel':<22}{'k':>5}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>9}")
    for k in (2, 20, 100):
        pure_times = bench_kernels(pure, k, args.repeats)
        comp_times = bench_kernels(compiled, k, args.repeats) if compiled else {}
        for name, pt in pure_times.items():
            ct = comp_times.get(name)
            ratio = f"{pt / ct:8.1f}x" if ct else "      --"
            ct_txt = f"{ct * 1e3:13.2f}" if ct else "           --"
            print(f"{name:<22}{k:>5}{pt * 1e3:>12.2f}{ct_txt:>15}{ratio:>9}")

    print("\nfull max-min training solve (n=400):")
    print(f"{'backend':<22}{'k':>5}{'time (ms)':>12}")
    import eopkit.solver._backend as backend

    for k in (2, 20, 100):
        t = bench_full_solve(k, 400, max(1, args.repeats // 2))
        print(f"{backend.BACKEND:<22}{k:>5}{t * 1e3:>12.1f}")
    if compiled is not None and backend.BACKEND == "compiled":
        print("(set EOPKIT_PURE_PYTHON=1 and rerun to time the fallback end to end)")


if __name__ == "__main__":
    main()
