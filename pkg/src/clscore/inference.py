"""Batch scoring, permutation p-values, Benjamini-Hochberg control and scale sweeps."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .complex import CofaceSum, Unit, build_vietoris_rips, compute_weights
from .errors import ClscoreError, InvalidPValue
from .features import OK, ZERO_VARIANCE, induce_features, permuted_cochains
from .spectral import assemble_laplacian, rayleigh_scores

log = logging.getLogger(__name__)

# permuted scores within this relative distance of the observed one count as ties
TIE_RTOL = 1e-10
BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class PermutationConfig:
    n_permutations: int = 1000
    seed: int = 0
    alpha: float = 0.05

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class FeatureResult:
    name: str
    q: int
    score: float
    p_value: float = math.nan
    q_value: float = math.nan
    rejected: bool = False
    status: str = OK


@dataclass
class ScoreReport:
    results: List[FeatureResult]
    epsilon: Optional[float] = None
    n_permutations: int = 0
    seed: int = 0
    alpha: float = 0.05
    weight_scheme: str = "coface"

    @property
    def n_rejected(self):
        return sum(r.rejected for r in self.results)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.results])

    def to_tsv(self):
        lines = ["feature\tq\tscore\tp_value\tq_value\trejected"]
        for r in self.results:
            lines.append("\t".join([
                r.name, str(r.q), _fmt(r.score), _fmt(r.p_value), _fmt(r.q_value),
                "true" if r.rejected else "false",
            ]))
        return "\n".join(lines) + "\n"


def _fmt(x):
    return "NA" if x is None or math.isnan(x) else repr(float(x))


# ---------------------------------------------------------------- scoring


def _observed(k, fs, q, agg, L):
    C, status = induce_features(fs, k, q, agg)
    scores = np.full(len(fs), np.nan)
    good = np.array([s == OK for s in status])
    if good.any():
        scores[good] = rayleigh_scores(L, C[good])
    for r in np.nonzero(good & np.isnan(scores))[0]:
        status[r] = ZERO_VARIANCE
    return scores, status


def score_features(k, fs, q, agg="mean", parts="both", laplacian=None):
    """One score per feature; NaN marks features that could not be scored."""
    L = laplacian if laplacian is not None else assemble_laplacian(k, q, parts)
    return _observed(k, fs, q, agg, L)[0]


def _block_size(P, m):
    return max(1, min(P, BLOCK_ELEMENTS // max(m, 1)))


def _feature_pvalue(k, fs, r, q, agg, L, cfg, observed):
    """Add-one left-tail permutation p-value for feature ``r``.

    The permutation stream depends only on ``(cfg.seed, r)``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, r]))
    n = k.vertex_count
    P = cfg.n_permutations
    block = _block_size(P, L.size)
    base = np.arange(n)
    cutoff = observed + TIE_RTOL * max(1.0, abs(observed))
    below = valid = 0
    for start in range(0, P, block):
        b = min(block, P - start)
        perms = rng.permuted(np.tile(base, (b, 1)), axis=1)
        R = rayleigh_scores(L, permuted_cochains(fs, r, k, q, agg, perms))
        ok = ~np.isnan(R)
        valid += int(ok.sum())
        below += int(np.count_nonzero(R[ok] <= cutoff))
    if valid == 0:
        return math.nan
    return (1 + below) / (1 + valid)


def permutation_pvalues(k, fs, q, cfg, agg="mean", parts="both", threads=1,
                        laplacian=None, observed=None):
    """Permutation p-values (NaN where the feature has no defined score).

    Feature values are permuted across samples with the complex held fixed.
    Results do not depend on ``threads``.
    """
    L = laplacian if laplacian is not None else assemble_laplacian(k, q, parts)
    if observed is None:
        observed = _observed(k, fs, q, agg, L)[0]
    todo = [r for r in range(len(fs)) if not np.isnan(observed[r])]
    p = np.full(len(fs), np.nan)

    def work(r):
        return _feature_pvalue(k, fs, r, q, agg, L, cfg, observed[r])

    if threads <= 1 or len(todo) <= 1:
        for r in todo:
            p[r] = work(r)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for r, val in zip(todo, pool.map(work, todo)):
                p[r] = val
    return p


def bh_adjust(p, alpha=0.05):
    """Benjamini-Hochberg step-up adjusted p-values and rejections at ``alpha``."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise InvalidPValue("p-values must form a 1-d sequence")
    if np.any(~((p > 0) & (p <= 1))):
        raise InvalidPValue("p-values must lie in (0, 1]")
    m = p.size
    if m == 0:
        return np.empty(0), np.zeros(0, dtype=bool)
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    adj = np.minimum(np.minimum.accumulate(ranked[::-1])[::-1], 1.0)
    qv = np.empty(m)
    qv[order] = adj
    return qv, qv <= alpha


def bh_adjust_partial(p, alpha=0.05):
    """:func:`bh_adjust` over the finite entries only; NaN entries stay NaN/unrejected."""
    p = np.asarray(p, dtype=np.float64)
    qv = np.full(p.shape, np.nan)
    rej = np.zeros(p.shape, dtype=bool)
    ok = ~np.isnan(p)
    if ok.any():
        qv[ok], rej[ok] = bh_adjust(p[ok], alpha)
    return qv, rej


def score_report(k, fs, q, cfg, agg="mean", parts="both", threads=1, names=None,
                 weight_scheme="coface"):
    """Score, permute and BH-adjust every feature of ``fs`` on ``k``."""
    L = assemble_laplacian(k, q, parts)
    scores, status = _observed(k, fs, q, agg, L)
    p = permutation_pvalues(k, fs, q, cfg, agg, parts, threads, laplacian=L, observed=scores)
    qv, rej = bh_adjust_partial(p, cfg.alpha)
    names = fs.names if names is None else names
    results = [
        FeatureResult(str(names[r]), q, float(scores[r]), float(p[r]), float(qv[r]), bool(rej[r]), status[r])
        for r in range(len(fs))
    ]
    for res in results:
        if res.status != OK:
            log.warning("feature %s not scored: %s", res.name, res.status)
    return ScoreReport(results, k.epsilon, cfg.n_permutations, cfg.seed, cfg.alpha, weight_scheme)


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepRow:
    epsilon: float
    n_edges: int
    n_rejected: int
    diagnostic: str = ""


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def best_epsilon(self):
        """Smallest epsilon attaining the maximal rejection count."""
        best = max(r.n_rejected for r in self.rows)
        return next(r.epsilon for r in self.rows if r.n_rejected == best)

    def to_tsv(self):
        lines = ["epsilon\tn_edges\tn_rejected"]
        lines += [f"{r.epsilon!r}\t{r.n_edges}\t{r.n_rejected}" for r in self.rows]
        return "\n".join(lines) + "\n"


def sweep_epsilon(dist, fs, q, grid, cfg, max_dim=None, scheme=None, agg="mean",
                  parts="both", threads=1):
    """Rejection counts over an ascending epsilon grid.

    A failure at one epsilon is recorded as zero rejections with a diagnostic.
    """
    grid = [float(e) for e in grid]
    if not grid:
        raise ValueError("epsilon grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("epsilon grid must be strictly ascending")
    if max_dim is None:
        max_dim = q + 1
    if scheme is None:
        scheme = CofaceSum()
    result = SweepResult()
    for eps in grid:
        k = build_vietoris_rips(dist, eps, max_dim)
        n_edges = k.n_simplices(1)
        try:
            k = compute_weights(k, scheme)
            report = score_report(k, fs, q, cfg, agg, parts, threads,
                                  weight_scheme="unit" if isinstance(scheme, Unit) else "coface")
            row = SweepRow(eps, n_edges, report.n_rejected)
        except ClscoreError as exc:
            row = SweepRow(eps, n_edges, 0, f"{type(exc).__name__}: {exc}")
            log.warning("epsilon=%r: %s", eps, row.diagnostic)
        log.info("epsilon=%r edges=%d rejected=%d", eps, n_edges, row.n_rejected)
        result.rows.append(row)
    return result

