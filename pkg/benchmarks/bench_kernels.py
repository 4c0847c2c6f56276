"""Time the numba and numpy solver kernels on random sparse problems.

    python3 benchmarks/bench_kernels.py [--rows 400] [--features 5000] [--nnz 60] [--repeat 3]

Both backends are imported from the same module, so the numba versions are
compiled here regardless of TWEETPURPOSE_DISABLE_NUMBA.
"""

import argparse
import time

import numba
import numpy as np
import scipy.sparse as sp

from tweetpurpose import _kernels as K


def problem(rows, features, nnz, seed=0):
    rng = np.random.default_rng(seed)
    X = sp.random(rows, features, density=nnz / features, format="csr", random_state=rng)
    X.data[:] = 1.0
    X.sort_indices()
    w = rng.normal(size=features)
    y = np.where(X @ w > np.median(X @ w), 1.0, -1.0)
    return X, y


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=400)
    ap.add_argument("--features", type=int, default=5000)
    ap.add_argument("--nnz", type=int, default=60, help="average non-zeros per row")
    ap.add_argument("--C", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    X, y = problem(args.rows, args.features, args.nnz)
    arrays = (X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data)
    solve_args = (*arrays, y, args.C, 1e-3, 1000, 7, args.features)
    jit_cd = numba.njit(cache=False)(K._dual_cd_loops)
    jit_dec = numba.njit(cache=False)(K._decision_loops)

    t = time.perf_counter()
    jit_cd(*solve_args)
    compile_s = time.perf_counter() - t

    t_jit, (w_jit, _, it_jit) = best_of(lambda: jit_cd(*solve_args), args.repeat)
    t_np, (w_np, _, it_np) = best_of(lambda: K._dual_cd_numpy(*solve_args), args.repeat)

    W = np.vstack([w_jit[:-1]] * 3)
    b = np.full(3, w_jit[-1])
    jit_dec(*arrays, W, b)
    d_jit, s_jit = best_of(lambda: jit_dec(*arrays, W, b), args.repeat)
    d_np, s_np = best_of(lambda: K._decision_numpy(*arrays, W, b), args.repeat)

    print(f"problem: {args.rows} rows x {args.features} features, {X.nnz} non-zeros, C={args.C}")
    print(f"numba first call (compile + solve): {compile_s:.3f} s")
    print(f"dual_cd   numba {t_jit * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms   speedup {t_np / t_jit:6.1f}x"
          f"   epochs {it_jit}/{it_np}")
    print(f"decision  numba {d_jit * 1e3:9.2f} ms   numpy {d_np * 1e3:9.2f} ms   speedup {d_np / d_jit:6.1f}x")
    print(f"max |w_numba - w_numpy| = {np.max(np.abs(w_jit - w_np)):.2e}")
    print(f"max |decision diff|     = {np.max(np.abs(s_jit - s_np)):.2e}")


if __name__ == "__main__":
    main()
