"""Hot loops, each with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``CLSCORE_DISABLE_NUMBA`` is
unset (or ``0``). Both paths return identical results up to floating-point
summation order; ``tests/test_kernels.py`` checks them against each other.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_DISABLED = os.environ.get("CLSCORE_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = numba is not None and not _DISABLED

AGG_CODES = {"mean": 0, "min": 1, "max": 2}


def backend():
    return "numba" if USE_NUMBA else "numpy"


def set_backend(name):
    """Switch backend at runtime ("numba" or "numpy"). Used by tests and benchmarks."""
    global USE_NUMBA
    if name == "numba":
        if numba is None:
            raise RuntimeError("numba is not installed")
        USE_NUMBA = True
    elif name == "numpy":
        USE_NUMBA = False
    else:
        raise ValueError(f"unknown backend {name!r}")


# ---------------------------------------------------------------- numpy paths


def _expand_cliques_np(simplices, adj):
    m, d = simplices.shape
    n = adj.shape[0]
    cols = np.arange(n)
    chunk = max(1, (1 << 22) // max(n, 1))
    out = []
    for start in range(0, m, chunk):
        s = simplices[start:start + chunk]
        mask = cols[None, :] > s[:, -1:]
        for k in range(d):
            mask &= adj[s[:, k]]
        r, v = np.nonzero(mask)
        out.append(np.column_stack([s[r], v]))
    if not out:
        return np.empty((0, d + 1), dtype=np.int64)
    return np.ascontiguousarray(np.concatenate(out), dtype=np.int64)


def _quadratic_forms_np(indptr, indices, data, X):
    from scipy.sparse import csr_matrix

    n = X.shape[1]
    M = csr_matrix((data, indices, indptr), shape=(n, n))
    MX = (M @ X.T).T
    return np.einsum("ij,ij->i", X, MX)


def _gather_aggregate_np(X, simplices, code):
    g = X[:, simplices]
    if code == 0:
        return g.mean(axis=2)
    if code == 1:
        return g.min(axis=2)
    return g.max(axis=2)


# ---------------------------------------------------------------- numba paths

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _expand_cliques_nb(simplices, adj):
        m, d = simplices.shape
        n = adj.shape[0]
        counts = np.zeros(m, np.int64)
        for r in range(m):
            c = 0
            for v in range(simplices[r, d - 1] + 1, n):
                ok = True
                for k in range(d):
                    if not adj[simplices[r, k], v]:
                        ok = False
                        break
                if ok:
                    c += 1
            counts[r] = c
        out = np.empty((counts.sum(), d + 1), np.int64)
        pos = 0
        for r in range(m):
            if counts[r] == 0:
                continue
            for v in range(simplices[r, d - 1] + 1, n):
                ok = True
                for k in range(d):
                    if not adj[simplices[r, k], v]:
                        ok = False
                        break
                if ok:
                    for k in range(d):
                        out[pos, k] = simplices[r, k]
                    out[pos, d] = v
                    pos += 1
        return out

    @numba.njit(cache=True, nogil=True)
    def _quadratic_forms_nb(indptr, indices, data, XT):
        # XT is (n, b): one column per vector, rows contiguous across the batch
        n, b = XT.shape
        out = np.zeros(b)
        row = np.empty(b)
        for i in range(n):
            row[:] = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                a = data[p]
                j = indices[p]
                for c in range(b):
                    row[c] += a * XT[j, c]
            for c in range(b):
                out[c] += XT[i, c] * row[c]
        return out

    @numba.njit(cache=True, nogil=True)
    def _gather_aggregate_nb(X, simplices, code):
        b = X.shape[0]
        m, k = simplices.shape
        out = np.empty((b, m))
        for c in range(b):
            for r in range(m):
                v = X[c, simplices[r, 0]]
                for j in range(1, k):
                    x = X[c, simplices[r, j]]
                    if code == 0:
                        v += x
                    elif code == 1:
                        if x < v:
                            v = x
                    elif x > v:
                        v = x
                if code == 0:
                    v /= k
                out[c, r] = v
        return out


# ---------------------------------------------------------------- dispatch


def expand_cliques(simplices, adj):
    """All (d+1)-cliques extending the sorted d-cliques in ``simplices``.

    ``simplices`` is (m, d) int64, lexicographically sorted; ``adj`` a boolean
    adjacency matrix with False diagonal. Output rows are lexicographically
    sorted because parents are sorted and appended vertices ascend.
    """
    simplices = np.ascontiguousarray(simplices, dtype=np.int64)
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    if simplices.shape[0] == 0:
        return np.empty((0, simplices.shape[1] + 1), dtype=np.int64)
    if USE_NUMBA:
        return _expand_cliques_nb(simplices, adj)
    return _expand_cliques_np(simplices, adj)


def quadratic_forms(M, X):
    """Row-wise ``x @ M @ x`` for each row of ``X``; ``M`` is a CSR matrix."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        return np.empty(0)
    if USE_NUMBA:
        return _quadratic_forms_nb(M.indptr.astype(np.int64, copy=False), M.indices.astype(np.int64, copy=False),
                                   M.data.astype(np.float64, copy=False), np.ascontiguousarray(X.T))
    return _quadratic_forms_np(M.indptr, M.indices, M.data, X)


def gather_aggregate(X, simplices, agg):
    """Push rows of vertex values ``X`` (b, n) onto simplices by mean/min/max."""
    code = AGG_CODES[agg]
    X = np.ascontiguousarray(X, dtype=np.float64)
    simplices = np.ascontiguousarray(simplices, dtype=np.int64)
    if USE_NUMBA:
        return _gather_aggregate_nb(X, simplices, code)
    return _gather_aggregate_np(X, simplices, code)
