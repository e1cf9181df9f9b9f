"""Ordered, weighted abstract simplicial complexes built from finite metric data.

Simplices of dimension q are stored as a lexicographically sorted
``(m_q, q + 1)`` int64 array whose rows list vertex indices in ascending
order. Vertex order is input row order and fixes orientation.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import (
    DimensionMismatch,
    DuplicateSimplex,
    MalformedDocument,
    MissingWeights,
    NoSimplicesAtDimension,
    NotClosedUnderInclusion,
    ZeroVarianceRow,
)

DEFAULT_FLOOR = 1e-12
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class Unit:
    """Every simplex gets weight 1."""


@dataclass(frozen=True)
class CofaceSum:
    """Top simplices get ``top_weight``; lower ones the floored sum over cofaces.

    ``top_weight`` may be a scalar or one positive value per top-dimensional
    simplex (e.g. edge weights of a weighted graph).
    """

    top_weight: Union[float, np.ndarray] = 1.0
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        if not self.floor > 0:
            raise ValueError("CofaceSum floor must be > 0")
        if np.any(np.asarray(self.top_weight) <= 0):
            raise ValueError("CofaceSum top_weight must be > 0")


WeightScheme = Union[Unit, CofaceSum]


def weight_scheme(name, floor=DEFAULT_FLOOR):
    """Map a CLI-style name (``unit`` / ``coface``) to a scheme."""
    if name == "unit":
        return Unit()
    if name in ("coface", "coface-sum", "cofacesum"):
        return CofaceSum(1.0, floor)
    raise ValueError(f"unknown weight scheme {name!r}")


# ---------------------------------------------------------------- distances


def compute_distances(points, metric="euclidean"):
    """Pairwise dissimilarities between the rows of ``points``.

    ``correlation`` is ``1 - r`` with ``r`` the Pearson correlation, so values
    lie in [0, 2].
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"points must be a 2-d array, got shape {X.shape}")
    n, p = X.shape
    if n < 2 or p < 1:
        raise DimensionMismatch(f"need at least 2 rows and 1 column, got {n}x{p}")
    if metric == "euclidean":
        sq = np.einsum("ij,ij->i", X, X)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.maximum(d2, 0.0, out=d2)
        d = np.sqrt(d2)
        # the Gram trick loses digits for near-identical rows; redo those exactly
        close = d < 1e-6 * max(1.0, float(np.sqrt(sq.max())))
        ii, jj = np.nonzero(np.triu(close, 1))
        if len(ii):
            d[ii, jj] = d[jj, ii] = np.linalg.norm(X[ii] - X[jj], axis=1)
    elif metric == "correlation":
        C = X - X.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(C, axis=1)
        scale = np.maximum(np.abs(X).max(axis=1), 1.0)
        bad = np.nonzero(norms <= 1e-12 * scale * np.sqrt(p))[0]
        if len(bad):
            raise ZeroVarianceRow(f"row {int(bad[0])} has zero variance; correlation undefined")
        U = C / norms[:, None]
        r = np.clip(U @ U.T, -1.0, 1.0)
        d = 1.0 - r
    else:
        raise ValueError(f"unknown metric {metric!r}")
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def check_distance_matrix(dist, atol=1e-12):
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionMismatch(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix has non-finite entries")
    if np.any(np.abs(np.diag(d)) > atol):
        raise ValueError("distance matrix must have zero diagonal")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if not np.allclose(d, d.T, rtol=0.0, atol=atol * max(1.0, float(np.abs(d).max()))):
        i, j = np.unravel_index(np.argmax(np.abs(d - d.T)), d.shape)
        raise ValueError(f"distance matrix is not symmetric at ({i}, {j})")
    return d


# ---------------------------------------------------------------- complex


def _encode(rows, base):
    """Injective order-preserving int64 keys for equal-length sorted rows."""
    k = rows.shape[1]
    powers = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return rows @ powers


def _fits_int64(base, k):
    return k * np.log2(max(base, 2)) < 62


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    vertex_count: int
    simplices: tuple
    weights: Optional[tuple] = None
    epsilon: Optional[float] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        simplices = [np.ascontiguousarray(np.asarray(s, dtype=np.int64).reshape(-1, q + 1))
                     for q, s in enumerate(self.simplices)]
        while len(simplices) > 1 and simplices[-1].shape[0] == 0:
            simplices.pop()
        if not simplices:
            simplices = [np.arange(self.vertex_count, dtype=np.int64).reshape(-1, 1)]
        for s in simplices:
            s.setflags(write=False)
        object.__setattr__(self, "simplices", tuple(simplices))
        if self.weights is not None:
            weights = []
            for q, s in enumerate(simplices):
                w = np.asarray(self.weights[q], dtype=np.float64) if q < len(self.weights) else np.empty(0)
                if w.shape != (s.shape[0],):
                    raise DimensionMismatch(
                        f"weights at dimension {q} have length {w.size}, expected {s.shape[0]}")
                if np.any(~(w > 0)):
                    raise ValueError(f"weights at dimension {q} must be strictly positive")
                w = w.copy()
                w.setflags(write=False)
                weights.append(w)
            object.__setattr__(self, "weights", tuple(weights))

    # -- basic queries

    @property
    def dim(self):
        """Top dimension with at least one simplex."""
        return len(self.simplices) - 1

    def n_simplices(self, q):
        if q < 0 or q > self.dim:
            return 0
        return self.simplices[q].shape[0]

    def counts(self):
        return [s.shape[0] for s in self.simplices]

    def simplices_at(self, q):
        if self.n_simplices(q) == 0:
            raise NoSimplicesAtDimension(f"complex has no {q}-simplices")
        return self.simplices[q]

    def weights_at(self, q):
        if self.weights is None:
            raise MissingWeights("complex has no weights; call compute_weights first")
        if self.n_simplices(q) == 0:
            raise NoSimplicesAtDimension(f"complex has no {q}-simplices")
        return self.weights[q]

    def with_weights(self, weights):
        return SimplicialComplex(self.vertex_count, self.simplices, tuple(weights), self.epsilon)

    # -- index lookup

    def index_of(self, q, rows):
        """Positions of the given sorted vertex rows within S_q, -1 if absent."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, q + 1)
        if self.n_simplices(q) == 0:
            return np.full(rows.shape[0], -1, dtype=np.int64)
        base = max(self.vertex_count, 1)
        if _fits_int64(base, q + 1):
            key = ("keys", q)
            if key not in self._cache:
                self._cache[key] = _encode(self.simplices[q], base)
            keys = self._cache[key]
            probe = _encode(rows, base)
            pos = np.searchsorted(keys, probe)
            pos = np.minimum(pos, keys.size - 1)
            return np.where(keys[pos] == probe, pos, -1).astype(np.int64)
        key = ("dict", q)
        if key not in self._cache:
            self._cache[key] = {tuple(r): i for i, r in enumerate(self.simplices[q].tolist())}
        table = self._cache[key]
        return np.array([table.get(tuple(r), -1) for r in rows.tolist()], dtype=np.int64)

    def face_indices(self, q):
        """(m_q, q + 1) array: column k is the index in S_{q-1} of the face omitting vertex k."""
        if q < 1:
            raise ValueError("face_indices needs q >= 1")
        key = ("faces", q)
        if key not in self._cache:
            s = self.simplices_at(q)
            cols = []
            for k in range(q + 1):
                face = np.delete(s, k, axis=1)
                idx = self.index_of(q - 1, face)
                if np.any(idx < 0):
                    bad = int(np.nonzero(idx < 0)[0][0])
                    raise NotClosedUnderInclusion(
                        f"face {face[bad].tolist()} of {s[bad].tolist()} is missing")
                cols.append(idx)
            arr = np.ascontiguousarray(np.column_stack(cols)) if cols else np.empty((0, q + 1), np.int64)
            arr.setflags(write=False)
            self._cache[key] = arr
        return self._cache[key]

    def check_closure(self):
        for q in range(1, self.dim + 1):
            self.face_indices(q)

    def check_canonical(self):
        """Raise if any dimension has unsorted rows, bad vertices or duplicates."""
        n = self.vertex_count
        for q, s in enumerate(self.simplices):
            if s.size and (s.min() < 0 or s.max() >= n):
                raise MalformedDocument(f"{q}-simplex references a vertex outside [0, {n})")
            if q and np.any(np.diff(s, axis=1) <= 0):
                raise MalformedDocument(f"{q}-simplex vertices are not strictly ascending")
            if s.shape[0] > 1:
                order = np.lexsort(s.T[::-1])
                ss = s[order]
                dup = np.all(ss[1:] == ss[:-1], axis=1)
                if np.any(dup):
                    raise DuplicateSimplex(f"duplicate {q}-simplex {ss[1:][dup][0].tolist()}")
                if np.any(order != np.arange(s.shape[0])):
                    raise MalformedDocument(f"{q}-simplices are not lexicographically sorted")

    def boundary_matrix(self, q):
        """Unweighted signed incidence, rows S_{q-1}, columns S_q (CSC)."""
        key = ("boundary", q)
        if key not in self._cache:
            if q < 1 or self.n_simplices(q) == 0:
                raise NoSimplicesAtDimension(f"complex has no {q}-simplices")
            faces = self.face_indices(q)
            m = faces.shape[0]
            signs = np.where(np.arange(q + 1) % 2 == 0, 1.0, -1.0)
            rows = faces.ravel()
            cols = np.repeat(np.arange(m), q + 1)
            data = np.tile(signs, m)
            B = sp.csc_matrix((data, (rows, cols)), shape=(self.n_simplices(q - 1), m))
            B.sort_indices()
            self._cache[key] = B
        return self._cache[key]


def boundary_faces(simplex):
    """Signed codimension-1 faces: the k-th face drops vertex k with sign (-1)^k."""
    s = tuple(int(v) for v in simplex)
    if len(s) <= 1:
        return []
    return [(s[:k] + s[k + 1:], 1 if k % 2 == 0 else -1) for k in range(len(s))]


def _sorted_rows(rows):
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[0] <= 1:
        return rows
    return rows[np.lexsort(rows.T[::-1])]


def build_vietoris_rips(dist, epsilon, max_dim=2):
    """Clique complex of the graph {i, j} with d[i, j] <= epsilon, up to ``max_dim``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    d = check_distance_matrix(dist)
    n = d.shape[0]
    adj = d <= epsilon
    np.fill_diagonal(adj, False)
    simplices = [np.arange(n, dtype=np.int64).reshape(-1, 1)]
    if max_dim >= 1:
        i, j = np.nonzero(np.triu(adj, 1))
        simplices.append(np.column_stack([i, j]).astype(np.int64))
    for _ in range(2, max_dim + 1):
        if simplices[-1].shape[0] == 0:
            break
        simplices.append(_kernels.expand_cliques(simplices[-1], adj))
    return SimplicialComplex(n, tuple(simplices), None, float(epsilon))


def compute_weights(k, scheme=None):
    """Return a copy of ``k`` carrying weights from ``scheme`` (default CofaceSum)."""
    if scheme is None:
        scheme = CofaceSum()
    if k.n_simplices(0) == 0:
        raise ValueError("cannot weight an empty complex")
    top = k.dim
    if isinstance(scheme, Unit):
        return k.with_weights([np.ones(k.n_simplices(q)) for q in range(top + 1)])
    if not isinstance(scheme, CofaceSum):
        raise TypeError(f"unknown weight scheme {scheme!r}")
    weights = [None] * (top + 1)
    tw = np.asarray(scheme.top_weight, dtype=np.float64)
    if tw.ndim == 0:
        weights[top] = np.full(k.n_simplices(top), float(tw))
    elif tw.shape == (k.n_simplices(top),):
        weights[top] = tw.copy()
    else:
        raise DimensionMismatch(
            f"top_weight has length {tw.size}, expected {k.n_simplices(top)} top simplices")
    for q in range(top - 1, -1, -1):
        faces = k.face_indices(q + 1)
        acc = np.zeros(k.n_simplices(q))
        np.add.at(acc, faces.ravel(), np.repeat(weights[q + 1], q + 2))
        weights[q] = np.maximum(acc, scheme.floor)
    return k.with_weights(weights)


def betti_numbers(k, max_q=None):
    """Betti numbers over the reals from ranks of unweighted boundary matrices."""
    if max_q is None:
        max_q = k.dim
    if max_q > k.dim:
        raise ValueError(f"max_q={max_q} exceeds the top dimension {k.dim}")

    def rank(q):
        if q < 1 or q > k.dim or k.n_simplices(q) == 0:
            return 0
        B = k.boundary_matrix(q).toarray()
        sv = np.linalg.svd(B, compute_uv=False)
        if sv.size == 0 or sv[0] == 0:
            return 0
        return int(np.sum(sv > RANK_RTOL * sv[0]))

    ranks = [rank(q) for q in range(max_q + 2)]
    return [k.n_simplices(q) - ranks[q] - ranks[q + 1] for q in range(max_q + 1)]


# ---------------------------------------------------------------- JSON


def import_complex(doc, scheme=None):
    """Validate a complex-JSON document and return the complex.

    Missing faces raise instead of being filled in. Vertex lists are sorted;
    weights, if present, follow their simplices through the sort. When weights
    are absent they are computed with ``scheme`` (default CofaceSum).
    """
    if not isinstance(doc, dict):
        raise MalformedDocument("document must be a JSON object")
    try:
        n = doc["vertex_count"]
        raw = doc["simplices"]
    except KeyError as exc:
        raise MalformedDocument(f"missing key {exc.args[0]!r}") from None
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise MalformedDocument("vertex_count must be a nonnegative integer")
    eps = doc.get("epsilon")
    if eps is not None and not isinstance(eps, (int, float)):
        raise MalformedDocument("epsilon must be a number or null")
    if not isinstance(raw, dict):
        raise MalformedDocument("simplices must be an object keyed by dimension")
    try:
        dims = {int(key): val for key, val in raw.items()}
    except ValueError:
        raise MalformedDocument("simplex dimensions must be integer strings") from None
    if any(q < 0 for q in dims):
        raise MalformedDocument("negative simplex dimension")
    raw_w = doc.get("weights")
    if raw_w is not None and not isinstance(raw_w, dict):
        raise MalformedDocument("weights must be an object keyed by dimension")
    top = max(dims) if dims else 0
    simplices, weights = [], []
    for q in range(top + 1):
        rows = dims.get(q, [])
        if not isinstance(rows, list) or any(
                not isinstance(r, list) or len(r) != q + 1
                or any(not isinstance(v, int) or isinstance(v, bool) for v in r) for r in rows):
            raise MalformedDocument(f"simplices[{q!r}] must be a list of {q + 1}-element integer lists")
        arr = np.array(rows, dtype=np.int64).reshape(-1, q + 1)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise MalformedDocument(f"a {q}-simplex references a vertex outside [0, {n})")
        arr = np.sort(arr, axis=1)
        if q and np.any(np.diff(arr, axis=1) == 0):
            raise MalformedDocument(f"a {q}-simplex repeats a vertex")
        order = np.lexsort(arr.T[::-1]) if arr.shape[0] else np.empty(0, np.int64)
        arr = arr[order]
        if arr.shape[0] > 1:
            dup = np.all(arr[1:] == arr[:-1], axis=1)
            if np.any(dup):
                raise DuplicateSimplex(f"duplicate {q}-simplex {arr[1:][dup][0].tolist()}")
        simplices.append(arr)
        if raw_w is not None:
            w = raw_w.get(str(q), raw_w.get(q))
            if w is None:
                w = []
            if not isinstance(w, list) or len(w) != len(rows) or any(
                    not isinstance(x, (int, float)) or isinstance(x, bool) for x in w):
                raise MalformedDocument(f"weights[{q!r}] must be {len(rows)} numbers")
            w = np.asarray(w, dtype=np.float64)[order]
            if np.any(~(w > 0)):
                raise MalformedDocument(f"weights[{q!r}] must be strictly positive")
            weights.append(w)
    if not np.array_equal(simplices[0].ravel(), np.arange(n)):
        raise MalformedDocument("0-simplices must be exactly the vertices 0 .. vertex_count-1")
    k = SimplicialComplex(n, tuple(simplices), None, None if eps is None else float(eps))
    k.check_closure()
    if raw_w is not None:
        return k.with_weights(weights[: k.dim + 1])
    return compute_weights(k, scheme)


def export_complex(k):
    """Canonical complex-JSON document (plain Python containers)."""
    doc = {
        "vertex_count": int(k.vertex_count),
        "epsilon": None if k.epsilon is None else float(k.epsilon),
        "simplices": {str(q): s.tolist() for q, s in enumerate(k.simplices)},
    }
    if k.weights is not None:
        doc["weights"] = {str(q): w.tolist() for q, w in enumerate(k.weights)}
    return doc
