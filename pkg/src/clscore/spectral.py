"""Weighted combinatorial Laplacians, Rayleigh scores, spectra and eigenmaps.

All operators act on cochains (one value per q-simplex, in the complex's
S_q order) and are self-adjoint for the weighted inner product
``<f, g>_K = sum_tau w(tau) f(tau) g(tau)``. Internally each operator keeps the
symmetric matrix ``W_q L`` (its "form"); ``L`` itself is ``W_q^{-1}`` times it.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .complex import boundary_faces
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NoSimplicesAtDimension,
    ZeroVarianceFeature,
)

ZERO_VARIANCE_RTOL = 1e-12
DENSE_LIMIT = 512
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class Cochain:
    q: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    def __len__(self):
        return self.values.shape[0]


def _values(f, k, q=None):
    if isinstance(f, Cochain):
        if q is not None and f.q != q:
            raise DimensionMismatch(f"expected a {q}-cochain, got a {f.q}-cochain")
        q = f.q
        v = f.values
    else:
        v = np.asarray(f, dtype=np.float64)
    if k is not None and v.shape != (k.n_simplices(q),):
        raise DimensionMismatch(
            f"{q}-cochain has {v.shape[0]} values but the complex has {k.n_simplices(q)} {q}-simplices")
    return q, v


def inner_product(f, g, k):
    """Weighted inner product of two q-cochains on ``k``."""
    if f.q != g.q:
        raise DimensionMismatch(f"cannot pair a {f.q}-cochain with a {g.q}-cochain")
    q, a = _values(f, k)
    _, b = _values(g, k)
    return float(np.dot(k.weights_at(q) * a, b))


def assemble_boundary(k, q):
    """Signed incidence matrix of S_{q-1} x S_q as a sparse CSC matrix."""
    if q < 1 or k.n_simplices(q) == 0:
        raise NoSimplicesAtDimension(f"complex has no {q}-simplices")
    return k.boundary_matrix(q)


@dataclass(frozen=True, eq=False)
class LaplacianOperator:
    q: int
    parts: str
    form: sp.csr_matrix
    weights: np.ndarray

    @property
    def size(self):
        return self.weights.shape[0]

    @cached_property
    def matrix(self):
        """L itself (not symmetric unless weights are uniform)."""
        L = sp.diags(1.0 / self.weights) @ self.form
        return L.tocsr()

    @cached_property
    def symmetrized(self):
        """``W^{1/2} L W^{-1/2}``, a symmetric matrix with the spectrum of L."""
        s = sp.diags(1.0 / np.sqrt(self.weights))
        S = (s @ self.form @ s).tocsr()
        return (0.5 * (S + S.T)).tocsr()

    def apply(self, f):
        v = f.values if isinstance(f, Cochain) else np.asarray(f, dtype=np.float64)
        return self.matrix @ v


def assemble_laplacian(k, q, parts="both"):
    """Up, down or full weighted combinatorial Laplacian at dimension ``q``.

    ``L_up = W_q^-1 B_{q+1} W_{q+1} B_{q+1}^T`` and
    ``L_down = B_q^T W_{q-1}^-1 B_q W_q``. The up part is zero when there are
    no (q+1)-simplices.
    """
    if parts not in ("up", "down", "both"):
        raise ValueError(f"parts must be up, down or both, got {parts!r}")
    if q < 0:
        raise ValueError("q must be >= 0")
    if parts == "down" and q == 0:
        raise ValueError("the down Laplacian needs q >= 1")
    w = k.weights_at(q)
    m = w.shape[0]
    form = sp.csr_matrix((m, m))
    if parts in ("up", "both") and k.n_simplices(q + 1) > 0:
        B = k.boundary_matrix(q + 1)
        form = form + B @ sp.diags(k.weights_at(q + 1)) @ B.T
    if parts in ("down", "both") and q >= 1:
        B = k.boundary_matrix(q)
        BW = B @ sp.diags(w)
        form = form + BW.T @ sp.diags(1.0 / k.weights_at(q - 1)) @ BW
    form = (0.5 * (form + form.T)).tocsr()
    form.sum_duplicates()
    form.sort_indices()
    return LaplacianOperator(q, parts, form, w)


def apply_laplacian_direct(k, q, f, parts="both"):
    """Apply the Laplacian term by term over cofaces and shared faces.

    Slow reference path kept to cross-check :func:`assemble_laplacian`.
    """
    q, vals = _values(f, k, q)
    S = [tuple(r) for r in k.simplices_at(q).tolist()]
    index = {s: i for i, s in enumerate(S)}
    w = k.weights_at(q)
    out = np.zeros(len(S))

    if parts in ("up", "both") and k.n_simplices(q + 1) > 0:
        w_up = k.weights_at(q + 1)
        cofaces = {s: [] for s in S}
        for j, sigma in enumerate(k.simplices[q + 1].tolist()):
            faces = boundary_faces(sigma)
            for tau, sgn in faces:
                cofaces[tau].append((j, sgn, faces))
        for tau, i in index.items():
            acc = 0.0
            for j, sgn, faces in cofaces[tau]:
                ratio = w_up[j] / w[i]
                acc += ratio * vals[i]
                for other, sgn_other in faces:
                    if other != tau:
                        acc += ratio * sgn * sgn_other * vals[index[other]]
            out[i] += acc

    if parts in ("down", "both") and q >= 1:
        lower = {tuple(r): i for i, r in enumerate(k.simplices_at(q - 1).tolist())}
        w_lo = k.weights_at(q - 1)
        cofaces = {}
        for tau in S:
            for rho, sgn in boundary_faces(tau):
                cofaces.setdefault(rho, []).append((tau, sgn))
        for tau, i in index.items():
            acc = 0.0
            for rho, sgn in boundary_faces(tau):
                r = lower[rho]
                acc += w[i] / w_lo[r] * vals[i]
                for other, sgn_other in cofaces[rho]:
                    if other != tau:
                        acc += w[index[other]] / w_lo[r] * sgn * sgn_other * vals[index[other]]
            out[i] += acc

    return Cochain(q, out)


def center_cochain(f, k):
    """Subtract the weighted mean times the unit cochain."""
    q, v = _values(f, k)
    w = k.weights_at(q)
    return Cochain(q, v - np.dot(w, v) / w.sum())


def rayleigh_scores(L, X):
    """Scores for each row of ``X`` (rows are q-cochains); NaN for constant rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != L.size:
        raise DimensionMismatch(f"cochains have {X.shape[1]} values, operator acts on {L.size}")
    w = L.weights
    wn = w / w.mean()
    Xc = X - (X @ wn / wn.sum())[:, None]
    num = _kernels.quadratic_forms(L.form, Xc) / w.mean()
    den_n = (Xc * Xc) @ wn
    ok = den_n > ZERO_VARIANCE_RTOL * np.maximum(1.0, np.einsum("ij,ij->i", X, X))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ok, num / np.where(ok, den_n, 1.0), np.nan)


def rayleigh_score(f, L, k=None):
    """Rayleigh quotient of the centered cochain ``f`` under ``L``."""
    q, v = _values(f, k, L.q)
    r = rayleigh_scores(L, v[None, :])[0]
    if np.isnan(r):
        raise ZeroVarianceFeature("feature is constant after centering; score is undefined")
    return float(r)


@dataclass(frozen=True)
class Spectrum:
    q: int
    values: np.ndarray
    vectors: np.ndarray
    residuals: Optional[np.ndarray] = None

    def cochain(self, i):
        return Cochain(self.q, self.vectors[:, i])


def _fix_signs(Y):
    # first entry within rounding of the largest magnitude decides the sign
    mag = np.abs(Y)
    idx = np.argmax(mag >= mag.max(axis=0) * (1 - 1e-8), axis=0)
    signs = np.sign(Y[idx, np.arange(Y.shape[1])])
    signs[signs == 0] = 1.0
    return Y * signs


def eigendecompose(L, m):
    """The ``m`` smallest eigenpairs of ``L``, orthonormal in the weighted inner product."""
    n = L.size
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    S = L.symmetrized
    if n <= DENSE_LIMIT or m >= n - 1:
        vals, Z = scipy.linalg.eigh(S.toarray(), subset_by_index=[0, m - 1])
    else:
        scale = max(1.0, float(np.abs(S.diagonal()).max()))
        try:
            vals, Z = spla.eigsh(S.tocsc(), k=m, sigma=-1e-6 * scale, which="LM")
        except (spla.ArpackNoConvergence, RuntimeError) as exc:
            raise ConvergenceFailure(f"iterative eigensolver failed: {exc}") from exc
        order = np.argsort(vals)
        vals, Z = vals[order], Z[:, order]
    residuals = np.linalg.norm(S @ Z - Z * vals, axis=0)
    bad = residuals > RESIDUAL_RTOL * np.maximum(1.0, np.abs(vals))
    if np.any(bad):
        raise ConvergenceFailure(
            f"{int(bad.sum())} eigenpairs exceed the residual tolerance", residuals)
    Y = _fix_signs(Z / np.sqrt(L.weights)[:, None])
    return Spectrum(L.q, vals, Y, residuals)


def spectral_bounds(L):
    """(smallest, largest) eigenvalue of ``L``."""
    S = L.symmetrized
    if L.size <= DENSE_LIMIT:
        vals = scipy.linalg.eigvalsh(S.toarray())
        return float(vals[0]), float(vals[-1])
    lo = eigendecompose(L, 1).values[0]
    hi = spla.eigsh(S, k=1, which="LA", return_eigenvectors=False)[0]
    return float(lo), float(hi)


def eigenmap(k, q, m, parts="both", skip=0):
    """|S_q| x m table of coordinates from eigen-cochains of L^(q).

    Column i holds eigenvector ``skip + i`` (ascending eigenvalues). ``skip=0``
    keeps the lowest eigenvectors, harmonic ones included; ``skip=1`` at q=0 on
    a connected complex drops the constant vector as classical Laplacian
    eigenmaps do.
    """
    size = k.n_simplices(q)
    if size == 0:
        raise NoSimplicesAtDimension(f"complex has no {q}-simplices")
    if skip < 0 or not 1 <= m <= size - skip:
        raise ValueError(f"need 1 <= m <= {size - skip} for q={q} with skip={skip}, got m={m}")
    return eigendecompose(assemble_laplacian(k, q, parts), m + skip).vectors[:, skip:]
