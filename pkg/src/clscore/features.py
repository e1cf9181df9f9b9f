"""Point and q-point features, and the cochains they induce on a complex."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .complex import _encode, _fits_int64
from .errors import DimensionMismatch, MissingTupleValue, NoSimplicesAtDimension
from .spectral import Cochain, ZERO_VARIANCE_RTOL

AGGREGATIONS = ("mean", "min", "max")

OK = "ok"
ZERO_VARIANCE = "zero_variance"
DIMENSION_MISMATCH = "dimension_mismatch"
MISSING_TUPLE = "missing_tuple"


class PointTable:
    """Sparse q-point feature: values keyed by strictly ascending sample tuples."""

    def __init__(self, keys, values, n_samples):
        keys = np.asarray(keys, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if keys.ndim != 2 or keys.shape[0] != values.shape[0]:
            raise DimensionMismatch("keys must be (m, arity) with one value per key")
        if keys.shape[1] > 1 and np.any(np.diff(keys, axis=1) <= 0):
            raise ValueError("q-point keys must be strictly ascending tuples")
        if keys.size and (keys.min() < 0 or keys.max() >= n_samples):
            raise DimensionMismatch(f"q-point key outside [0, {n_samples})")
        self.arity = keys.shape[1]
        self.n_samples = int(n_samples)
        self._dict = None
        if _fits_int64(max(self.n_samples, 1), self.arity):
            codes = _encode(keys, max(self.n_samples, 1))
            order = np.argsort(codes, kind="stable")
            self._codes = codes[order]
            self._values = values[order]
            if np.any(self._codes[1:] == self._codes[:-1]):
                raise ValueError("duplicate q-point key")
        else:
            self._dict = {tuple(r): v for r, v in zip(keys.tolist(), values.tolist())}
            if len(self._dict) != keys.shape[0]:
                raise ValueError("duplicate q-point key")

    @classmethod
    def from_dict(cls, table, n_samples):
        if not table:
            raise ValueError("empty q-point table")
        keys = list(table.keys())
        return cls(keys, [table[key] for key in keys], n_samples)

    def lookup(self, rows):
        """Values at ascending vertex rows (any leading shape); NaN where absent."""
        rows = np.asarray(rows, dtype=np.int64)
        flat = rows.reshape(-1, self.arity)
        if self._dict is not None:
            out = np.array([self._dict.get(tuple(r), np.nan) for r in flat.tolist()])
        else:
            if self._codes.size == 0:
                out = np.full(flat.shape[0], np.nan)
            else:
                probe = _encode(flat, max(self.n_samples, 1))
                pos = np.minimum(np.searchsorted(self._codes, probe), self._codes.size - 1)
                out = np.where(self._codes[pos] == probe, self._values[pos], np.nan)
        return out.reshape(rows.shape[:-1])


@dataclass
class FeatureSet:
    """Named features over a sample set.

    ``arity == 1``: ``values`` is a (features x samples) array, or a list of
    1-d arrays when lengths may disagree (validation flags those).
    ``arity >= 2``: ``values`` is a list of :class:`PointTable`, dicts keyed by
    ascending tuples, or dense ``arity``-way arrays.
    """

    names: List[str]
    values: Sequence
    arity: int = 1
    n_samples: Optional[int] = None
    _tables: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if len(self.names) != len(self.values):
            raise DimensionMismatch(f"{len(self.names)} names for {len(self.values)} features")
        if self.arity == 1:
            try:
                self.values = np.asarray(self.values, dtype=np.float64)
                if self.values.ndim != 2:
                    raise ValueError
            except ValueError:
                self.values = [np.asarray(v, dtype=np.float64) for v in self.values]
            if self.n_samples is None and isinstance(self.values, np.ndarray):
                self.n_samples = self.values.shape[1]
        elif self.n_samples is None:
            raise ValueError("n_samples is required for q-point features")

    def __len__(self):
        return len(self.names)

    @property
    def q(self):
        """Cochain dimension induced by q-point features (None for 1-point)."""
        return None if self.arity == 1 else self.arity - 1

    def table(self, r):
        if self._tables is None:
            self._tables = [None] * len(self)
        if self._tables[r] is None:
            v = self.values[r]
            if isinstance(v, PointTable):
                t = v
            elif isinstance(v, dict):
                t = PointTable.from_dict(v, self.n_samples)
            else:
                t = _DenseTable(np.asarray(v, dtype=np.float64), self.arity)
            self._tables[r] = t
        return self._tables[r]

    def point_values(self, r):
        return np.asarray(self.values[r], dtype=np.float64)


class _DenseTable:
    def __init__(self, tensor, arity):
        if tensor.ndim != arity:
            raise DimensionMismatch(f"dense {arity}-point feature must have {arity} axes")
        self.arity = arity
        self.n_samples = tensor.shape[0]
        self.tensor = tensor

    def lookup(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return self.tensor[tuple(np.moveaxis(rows, -1, 0))]


def _check_agg(agg):
    if agg not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {agg!r}")


def induce_point_features(X, k, q, agg="mean"):
    """Rows of vertex values (features x samples) pushed to q-cochains (features x |S_q|)."""
    _check_agg(agg)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != k.vertex_count:
        raise DimensionMismatch(f"features have {X.shape[1]} samples, complex has {k.vertex_count} vertices")
    if q == 0:
        return X.copy()
    return _kernels.gather_aggregate(X, k.simplices_at(q), agg)


def induce_from_point_feature(f, k, q, agg="mean"):
    """Cochain whose value on each q-simplex aggregates ``f`` over its vertices."""
    if q < 0:
        raise ValueError("q must be >= 0")
    if k.n_simplices(q) == 0:
        raise NoSimplicesAtDimension(f"complex has no {q}-simplices")
    return Cochain(q, induce_point_features(f, k, q, agg)[0])


def induce_from_qpoint_feature(f, k, n_samples=None):
    """Evaluate a q-point feature on the (q-1)-simplices at ascending vertex order.

    ``f`` may be a :class:`PointTable`, a dict keyed by ascending tuples or a
    dense q-way array.
    """
    if isinstance(f, dict):
        f = PointTable.from_dict(f, k.vertex_count if n_samples is None else n_samples)
    elif isinstance(f, np.ndarray):
        f = _DenseTable(f, f.ndim)
    q = f.arity - 1
    rows = k.simplices_at(q)
    vals = f.lookup(rows)
    missing = np.isnan(vals)
    if np.any(missing):
        raise MissingTupleValue(f"no value for tuple {tuple(rows[np.argmax(missing)].tolist())}")
    return Cochain(q, vals)


def permuted_cochains(fs, r, k, q, agg, perms):
    """Cochains of feature ``r`` after relabelling samples by each row of ``perms``.

    A permutation ``pi`` sends the feature ``f`` to ``i -> f(pi(i))``; for
    q-point features the permuted tuple is re-sorted before lookup.
    """
    if fs.arity == 1:
        f = fs.point_values(r)
        return induce_point_features(f[perms], k, q, agg)
    rows = k.simplices_at(q)
    mapped = np.sort(perms[:, rows], axis=2)
    return fs.table(r).lookup(mapped)


def zero_variance_mask(X, w):
    """True for rows of ``X`` that are constant after weighted centering."""
    X = np.atleast_2d(X)
    wn = w / w.mean()
    Xc = X - (X @ wn / wn.sum())[:, None]
    den = (Xc * Xc) @ wn
    return ~(den > ZERO_VARIANCE_RTOL * np.maximum(1.0, np.einsum("ij,ij->i", X, X)))


def induce_features(fs, k, q, agg="mean"):
    """Induce every feature at dimension ``q``.

    Returns ``(C, status)`` where ``C`` is (features x |S_q|) with NaN rows for
    features that could not be induced, and ``status`` one code per feature.
    """
    _check_agg(agg)
    m = k.simplices_at(q).shape[0]
    C = np.full((len(fs), m), np.nan)
    status = [OK] * len(fs)
    if fs.arity == 1:
        if isinstance(fs.values, np.ndarray):
            if fs.values.shape[1] != k.vertex_count:
                return C, [DIMENSION_MISMATCH] * len(fs)
            C[:] = induce_point_features(fs.values, k, q, agg)
        else:
            for r, v in enumerate(fs.values):
                if v.ndim != 1 or v.shape[0] != k.vertex_count:
                    status[r] = DIMENSION_MISMATCH
                else:
                    C[r] = induce_point_features(v, k, q, agg)[0]
    else:
        if fs.q != q:
            raise DimensionMismatch(f"{fs.arity}-point features induce {fs.q}-cochains, not {q}-cochains")
        if fs.n_samples != k.vertex_count:
            return C, [DIMENSION_MISMATCH] * len(fs)
        rows = k.simplices_at(q)
        for r in range(len(fs)):
            try:
                vals = fs.table(r).lookup(rows)
            except (DimensionMismatch, IndexError):
                status[r] = DIMENSION_MISMATCH
                continue
            if np.any(np.isnan(vals)):
                status[r] = MISSING_TUPLE
            else:
                C[r] = vals
    return C, status


def validate_features(fs, k, q=0, agg="mean"):
    """Per-feature status codes; never raises for individual bad features."""
    C, status = induce_features(fs, k, q, agg)
    w = k.weights[q] if k.weights is not None else np.ones(C.shape[1])
    good = [r for r, s in enumerate(status) if s == OK]
    if good:
        flat = zero_variance_mask(C[good], w)
        for r, z in zip(good, flat):
            if z:
                status[r] = ZERO_VARIANCE
    return status
