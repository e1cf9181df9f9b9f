"""Time each hot kernel and the end-to-end q=0 permutation run under both backends.

    python3 benchmarks/bench_kernels.py [--vertices 500] [--edges 60000] [--features 1000]

Numba compile time is excluded by a warm-up call per kernel.
"""

import argparse
import time

import numpy as np

from clscore import _kernels
from clscore.complex import build_vietoris_rips, compute_distances, compute_weights
from clscore.features import FeatureSet
from clscore.inference import PermutationConfig, permutation_pvalues
from clscore.spectral import assemble_laplacian


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--vertices", type=int, default=500)
    ap.add_argument("--edges", type=int, default=60000)
    ap.add_argument("--features", type=int, default=1000)
    ap.add_argument("--permutations", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    n = args.vertices
    d = compute_distances(rng.normal(size=(n, 5)))
    iu = np.sort(d[np.triu_indices(n, 1)])
    eps = float(iu[min(args.edges, iu.size) - 1])
    k = compute_weights(build_vietoris_rips(d, eps, 1))
    k2 = build_vietoris_rips(d, float(iu[min(args.edges // 10, iu.size) - 1]), 1)
    L = assemble_laplacian(k, 0)
    X = rng.normal(size=(args.features, n))
    fs = FeatureSet([f"g{i}" for i in range(args.features)], X)
    adj = np.zeros((n, n), bool)
    e2 = k2.simplices_at(1)
    adj[e2[:, 0], e2[:, 1]] = adj[e2[:, 1], e2[:, 0]] = True
    edges = k.simplices_at(1)
    cfg = PermutationConfig(args.permutations, seed=args.seed)

    cases = {
        "expand_cliques (edges -> triangles)": lambda: _kernels.expand_cliques(e2, adj),
        "quadratic_forms (L0, 200 rows)": lambda: _kernels.quadratic_forms(L.form, X[:200]),
        "gather_aggregate (mean onto edges, 50 rows)": lambda: _kernels.gather_aggregate(X[:50], edges, "mean"),
    }
    print(f"complex: {k.counts()} simplices (triangle case uses {k2.n_simplices(1)} edges); "
          f"{args.features} features, {args.permutations} permutations")
    print(f"{'case':48s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        res = {}
        for backend in ("numpy", "numba"):
            _kernels.set_backend(backend)
            fn()
            res[backend] = best_of(fn, args.repeat)
        print(f"{name:48s} {res['numpy']:10.4f} {res['numba']:10.4f} {res['numpy'] / res['numba']:8.2f}")

    res = {}
    for backend in ("numpy", "numba"):
        _kernels.set_backend(backend)
        permutation_pvalues(k, FeatureSet(["w"], X[:1]), 0, PermutationConfig(2), laplacian=L)
        t0 = time.perf_counter()
        permutation_pvalues(k, fs, 0, cfg, laplacian=L)
        res[backend] = time.perf_counter() - t0
    name = "permutation_pvalues (end to end)"
    print(f"{name:48s} {res['numpy']:10.4f} {res['numba']:10.4f} {res['numpy'] / res['numba']:8.2f}")


if __name__ == "__main__":
    main()
