"""Benchmark the compiled Gibbs-sweep kernel against the pure-numpy path.

Both paths consume the same uniforms, so outputs are verified identical
before timing.  Run from the repository root:

    python3 benchmarks/bench_gibbs.py
"""

import time

import numpy as np

from hybridstream import kernels
from hybridstream.dhbm import HybridParams
from hybridstream.numerics import make_rng


def _fresh_state(params, n_particles, seed):
    rng = make_rng(seed)
    x = (rng.random((n_particles, params.n_visible)) < 0.5).astype(np.float64)
    hs = [(rng.random((n_particles, h)) < 0.5).astype(np.float64)
          for h in params.hidden_dims]
    y = rng.integers(0, params.n_classes, size=n_particles).astype(np.int64)
    return x, hs, y


def run(n_visible=24, hidden=(24, 24), n_classes=10, n_particles=10,
        n_sweeps=2000, seed=3):
    rng = make_rng(seed)
    params = HybridParams.initialize(n_visible, list(hidden), n_classes, rng,
                                     weight_std=0.1)
    stride = kernels.uniforms_per_sweep(params, n_particles)
    uniforms = rng.random(stride * n_sweeps)

    if not kernels.NUMBA_ENABLED:
        print("numba unavailable (or disabled); timing the numpy path only")
        x, hs, y = _fresh_state(params, n_particles, seed)
        t0 = time.perf_counter()
        kernels.gibbs_sweeps_numpy(params, x, hs, y, uniforms, n_sweeps)
        print(f"numpy: {time.perf_counter() - t0:.3f}s for {n_sweeps} sweeps")
        return

    # warm up the JIT so compilation is excluded from the timing
    xw, hsw, yw = _fresh_state(params, n_particles, seed)
    kernels.gibbs_sweeps_numba(params, xw, hsw, yw, uniforms[:stride], 1)

    x1, hs1, y1 = _fresh_state(params, n_particles, seed)
    t0 = time.perf_counter()
    kernels.gibbs_sweeps_numpy(params, x1, hs1, y1, uniforms, n_sweeps)
    t_numpy = time.perf_counter() - t0

    x2, hs2, y2 = _fresh_state(params, n_particles, seed)
    t0 = time.perf_counter()
    kernels.gibbs_sweeps_numba(params, x2, hs2, y2, uniforms, n_sweeps)
    t_numba = time.perf_counter() - t0

    same = (np.array_equal(x1, x2) and np.array_equal(y1, y2)
            and all(np.array_equal(a, b) for a, b in zip(hs1, hs2)))
    print(f"model: D={n_visible}, hidden={list(hidden)}, C={n_classes}, "
          f"M={n_particles}, sweeps={n_sweeps}")
    print(f"numpy : {t_numpy:.3f}s ({n_sweeps / t_numpy:,.0f} sweeps/s)")
    print(f"numba : {t_numba:.3f}s ({n_sweeps / t_numba:,.0f} sweeps/s)")
    print(f"speedup: {t_numpy / t_numba:.1f}x, chains identical: {same}")
    if not same:
        raise SystemExit("kernel outputs diverged")


if __name__ == "__main__":
    run()
