import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from clscore import _kernels

pytestmark = pytest.mark.skipif(_kernels.numba is None, reason="numba not installed")


@pytest.fixture
def both():
    saved = _kernels.backend()

    def call(fn, *args):
        out = {}
        for name in ("numpy", "numba"):
            _kernels.set_backend(name)
            out[name] = fn(*args)
        return out["numpy"], out["numba"]

    yield call
    _kernels.set_backend(saved)


def random_graph(rng, n, p):
    upper = np.triu(rng.random((n, n)) < p, 1)
    return upper | upper.T


def brute_cliques(adj, d):
    n = adj.shape[0]
    return sorted(c for c in itertools.combinations(range(n), d)
                  if all(adj[a, b] for a, b in itertools.combinations(c, 2)))


@pytest.mark.parametrize("seed", range(4))
def test_expand_cliques_matches_brute_force(both, seed):
    rng = np.random.default_rng(seed)
    adj = random_graph(rng, 14, 0.5)
    edges = np.array(brute_cliques(adj, 2), dtype=np.int64).reshape(-1, 2)
    a, b = both(_kernels.expand_cliques, edges, adj)
    assert np.array_equal(a, b)
    assert [tuple(r) for r in a.tolist()] == brute_cliques(adj, 3)
    c, d = both(_kernels.expand_cliques, a, adj)
    assert np.array_equal(c, d)
    assert [tuple(r) for r in c.tolist()] == brute_cliques(adj, 4)


def test_expand_cliques_empty(both):
    a, b = both(_kernels.expand_cliques, np.empty((0, 2), np.int64), np.zeros((3, 3), bool))
    assert a.shape == b.shape == (0, 3)


@pytest.mark.parametrize("shape", [(1, 5), (7, 40), (33, 200)])
def test_quadratic_forms_agree(both, rng, shape):
    b, n = shape
    A = sp.random(n, n, density=0.1, random_state=int(rng.integers(1 << 30)), format="csr")
    M = (A + A.T).tocsr()
    X = rng.normal(size=(b, n))
    a, c = both(_kernels.quadratic_forms, M, X)
    ref = np.einsum("ij,ij->i", X, (M @ X.T).T)
    assert np.allclose(a, ref, rtol=1e-12, atol=1e-12)
    assert np.allclose(c, ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("agg", ["mean", "min", "max"])
@pytest.mark.parametrize("width", [2, 3])
def test_gather_aggregate_agree(both, rng, agg, width):
    X = rng.normal(size=(6, 30))
    S = np.sort(np.array([rng.choice(30, width, replace=False) for _ in range(50)]), axis=1)
    a, b = both(_kernels.gather_aggregate, X, S, agg)
    ref = getattr(np, agg)(X[:, S], axis=2)
    assert np.allclose(a, ref, rtol=0, atol=1e-14)
    assert np.allclose(b, ref, rtol=0, atol=1e-14)


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")


def test_env_flag_selects_numpy():
    code = "from clscore import _kernels; print(_kernels.backend())"
    for flag, expected in (("1", "numpy"), ("0", "numba")):
        env = dict(os.environ, CLSCORE_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
        assert out.stdout.strip() == expected


def test_scores_agree_across_backends(both, rng):
    from clscore.complex import build_vietoris_rips, compute_distances, compute_weights
    from clscore.features import FeatureSet
    from clscore.inference import PermutationConfig, permutation_pvalues, score_features

    d = compute_distances(rng.uniform(size=(40, 2)))
    fs = FeatureSet([f"f{i}" for i in range(5)], rng.normal(size=(5, 40)))

    def pipeline():
        k = compute_weights(build_vietoris_rips(d, 0.3, 2))
        return np.concatenate([score_features(k, fs, 1),
                               permutation_pvalues(k, fs, 0, PermutationConfig(40, seed=2))])

    a, b = both(pipeline)
    assert np.allclose(a, b, rtol=1e-10)
