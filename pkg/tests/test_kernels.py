import json
import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from tweetpurpose import _kernels


def random_problem(n, d, density, seed):
    rng = np.random.default_rng(seed)
    X = sp.random(n, d, density=density, format="csr", random_state=rng, data_rvs=lambda k: rng.normal(0, 1, k))
    X.sort_indices()
    w = rng.normal(0, 1, d)
    y = np.where(X @ w + 0.3 * rng.normal(0, 1, n) > 0, 1.0, -1.0)
    return X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data.astype(np.float64), y, d


def lcg_permutations(seed, n, epochs):
    """Reference shuffle stream: Fisher-Yates driven by the 31-bit LCG, order carried across epochs."""
    state = seed % 2**31
    order = list(range(n))
    out = []
    for _ in range(epochs):
        for s in range(n - 1, 0, -1):
            state = (state * 1103515245 + 12345) % 2**31
            j = state % (s + 1)
            order[s], order[j] = order[j], order[s]
        out.append(list(order))
    return out


needs_numba = pytest.mark.skipif(_kernels.dual_cd_jit is None, reason="numba backend disabled")


@needs_numba
@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("C", [0.01, 1.0, 100.0])
def test_dual_cd_backends_agree(seed, C):
    indptr, indices, data, y, d = random_problem(120, 40, 0.1, seed)
    w1, a1, it1 = _kernels.dual_cd_jit(indptr, indices, data, y, C, 1e-3, 1000, seed, d)
    w2, a2, it2 = _kernels._dual_cd_numpy(indptr, indices, data, y, C, 1e-3, 1000, seed, d)
    assert it1 == it2
    assert np.allclose(w1, w2, atol=1e-10) and np.allclose(a1, a2, atol=1e-10)


@needs_numba
def test_decision_backends_agree():
    indptr, indices, data, _, d = random_problem(50, 30, 0.2, 5)
    rng = np.random.default_rng(0)
    W = rng.normal(0, 1, (4, d))
    b = rng.normal(0, 1, 4)
    a = _kernels.decision_jit(indptr, indices, data, W, b)
    c = _kernels._decision_numpy(indptr, indices, data, W, b)
    X = sp.csr_matrix((data, indices, indptr), shape=(50, d))
    assert np.allclose(a, c, atol=1e-12) and np.allclose(a, X @ W.T + b, atol=1e-12)


def test_dual_solution_is_kkt_consistent():
    indptr, indices, data, y, d = random_problem(80, 20, 0.2, 3)
    C = 1.0
    w, alpha, _ = _kernels._dual_cd_loops(indptr, indices, data, y, C, 1e-6, 5000, 7, d)
    X = sp.csr_matrix((data, indices, indptr), shape=(80, d))
    Xa = sp.hstack([X, np.ones((80, 1))]).tocsr()
    # w is the dual combination of the augmented rows
    assert np.allclose(w, Xa.T @ (alpha * y), atol=1e-9)
    assert np.all(alpha >= -1e-12) and np.all(alpha <= C + 1e-12)
    margin = y * (Xa @ w)
    assert np.all(margin[alpha <= 1e-9] >= 1 - 1e-3)
    assert np.all(margin[alpha >= C - 1e-9] <= 1 + 1e-3)


def reference_dual_cd(X, y, C, epochs, seed):
    """Plain-Python dual coordinate descent over the replayed shuffle stream, no early stop."""
    n, d = X.shape
    rows = [X.getrow(i) for i in range(n)]
    w = [0.0] * (d + 1)
    alpha = [0.0] * n
    for order in lcg_permutations(seed, n, epochs):
        for i in order:
            r = rows[i]
            pairs = list(zip(r.indices.tolist(), r.data.tolist()))
            g = y[i] * (w[d] + sum(w[j] * v for j, v in pairs)) - 1.0
            q = 1.0 + sum(v * v for _, v in pairs)
            new = min(max(alpha[i] - g / q, 0.0), C)
            delta = (new - alpha[i]) * y[i]
            alpha[i] = new
            for j, v in pairs:
                w[j] += delta * v
            w[d] += delta
    return np.array(w)


def test_lcg_stream_is_a_permutation_sequence():
    perms = lcg_permutations(12345, 6, 3)
    assert all(sorted(p) == list(range(6)) for p in perms)
    assert perms[0] != perms[1]


@pytest.mark.parametrize("kernel", ["_dual_cd_loops", "_dual_cd_numpy"])
@pytest.mark.parametrize("seed", [0, 12345])
def test_kernel_matches_reference_solver(kernel, seed):
    indptr, indices, data, y, d = random_problem(30, 8, 0.4, 9)
    X = sp.csr_matrix((data, indices, indptr), shape=(30, d))
    fn = getattr(_kernels, kernel)
    # tol below zero disables the stopping test so exactly three epochs run
    w, _, n_iter = fn(indptr, indices, data, y, 1.0, -1.0, 3, seed, d)
    assert n_iter == 3
    assert np.allclose(w, reference_dual_cd(X, y, 1.0, 3, seed), atol=1e-12)


def test_env_flag_selects_numpy_backend(tmp_path):
    script = (
        "import json, numpy as np\n"
        "from tweetpurpose import _kernels\n"
        "from tweetpurpose.learner import Dataset, train\n"
        "inst = [(str(i), {'a': float(i % 2), 'b': float(i % 3)}, 'xy'[i % 2]) for i in range(12)]\n"
        "m = train(Dataset.build(inst), 1.0, seed=3)\n"
        "print(json.dumps({'backend': _kernels.backend(), 'w': m.weights.tolist(), 'b': m.biases.tolist()}))\n"
    )
    env = dict(os.environ)
    runs = {}
    for flag in ("1", ""):
        env[_kernels.DISABLE_ENV] = flag
        out = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
        runs[flag] = json.loads(out.stdout)
    assert runs["1"]["backend"] == "numpy"
    if _kernels.numba is not None:
        assert runs[""]["backend"] == "numba"
    assert np.allclose(runs["1"]["w"], runs[""]["w"], atol=1e-10)
    assert np.allclose(runs["1"]["b"], runs[""]["b"], atol=1e-10)
