"""Structural statistics of the lineage graph.

In-degree histograms (overall and per relation type), a discrete power-law
tail fit selected by Kolmogorov-Smirnov distance (Clauset, Shalizi & Newman
2009, SIAM Rev. 51), and a weakly-connected-component census via union-find.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .lineage import RELATION_TYPES, LineageGraph

OVERALL = "overall"
DEGREE_SCOPES = (OVERALL,) + RELATION_TYPES


class InsufficientTailError(ValueError):
    """Too few positive-degree observations to fit a tail."""


@dataclass(frozen=True)
class DegreeDistribution:
    """Histogram of in-degrees over every node in the graph.

    For a relation scope, only edges of that relation contribute to a
    node's degree; the node set stays the same.
    """

    histogram: dict[int, int]
    scope: str

    @property
    def n_nodes(self) -> int:
        return sum(self.histogram.values())

    def positive_degrees(self) -> tuple[np.ndarray, np.ndarray]:
        """(degrees, counts) arrays for degrees >= 1, ascending."""
        items = sorted((d, c) for d, c in self.histogram.items() if d >= 1)
        if not items:
            return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
        degrees, counts = zip(*items)
        return np.array(degrees, dtype=np.int64), np.array(counts, dtype=np.int64)


def in_degrees(graph: LineageGraph, scope: str = OVERALL) -> DegreeDistribution:
    """Exact in-degree histogram for the given scope."""
    if scope not in DEGREE_SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    relation = None if scope == OVERALL else scope
    hist: Counter = Counter()
    for model_id in graph.nodes:
        hist[graph.in_degree(model_id, relation)] += 1
    return DegreeDistribution(histogram=dict(hist), scope=scope)


@dataclass(frozen=True)
class PowerLawFit:
    """Discrete power-law tail fit: p(x) ~ x^-alpha for x >= x_min."""

    alpha: float
    x_min: int
    ks_distance: float
    n_tail: int

    def standard_error(self) -> float:
        return (self.alpha - 1.0) / math.sqrt(self.n_tail)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "x_min": int(self.x_min),
            "ks_distance": self.ks_distance,
            "n_tail": int(self.n_tail),
        }


def _weighted_percentile(degrees: np.ndarray, counts: np.ndarray, q: float) -> int:
    cum = np.cumsum(counts)
    target = q * cum[-1]
    return int(degrees[np.searchsorted(cum, target)])


def _hurwitz_zeta(alpha: float, a: int, n_direct: int = 20_000) -> float:
    """``sum_{k=a}^{inf} k^-alpha`` for alpha > 1: direct summation of the
    head plus an Euler-Maclaurin tail estimate."""
    head_ks = np.arange(a, a + n_direct, dtype=np.float64)
    big = float(a + n_direct)
    tail = (
        big ** (1.0 - alpha) / (alpha - 1.0)
        + 0.5 * big**-alpha
        + alpha * big ** (-alpha - 1.0) / 12.0
    )
    return float(np.sum(head_ks**-alpha)) + tail


_ALPHA_MIN, _ALPHA_MAX = 1.01, 20.0


def _discrete_mle(xs: np.ndarray, ws: np.ndarray, x_min: int) -> float:
    """Maximum-likelihood alpha for the discrete power-law tail.

    Golden-section search on the exact zeta-normalized likelihood, started
    from the continuous approximation
    ``1 + n / sum(ln(x_i / (x_min - 0.5)))``. The approximation alone
    biases alpha low enough to distort KS-based x_min selection, so it
    only seeds the bracket.
    """
    n = float(ws.sum())
    sum_log = float(np.dot(ws, np.log(xs)))
    approx = 1.0 + n / float(np.dot(ws, np.log(xs / (x_min - 0.5))))

    def nll(alpha: float) -> float:
        return alpha * sum_log + n * math.log(_hurwitz_zeta(alpha, x_min))

    lo = max(_ALPHA_MIN, approx - 1.0)
    hi = min(_ALPHA_MAX, approx + 1.0)
    for _ in range(8):  # widen until the minimum is interior
        if nll(lo) > nll(lo + 1e-4) or lo <= _ALPHA_MIN:
            break
        lo = max(_ALPHA_MIN, lo - 1.0)
    for _ in range(8):
        if nll(hi) > nll(hi - 1e-4) or hi >= _ALPHA_MAX:
            break
        hi = min(_ALPHA_MAX, hi + 1.0)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    m1 = hi - invphi * (hi - lo)
    m2 = lo + invphi * (hi - lo)
    f1, f2 = nll(m1), nll(m2)
    for _ in range(48):
        if f1 <= f2:
            hi, m2, f2 = m2, m1, f1
            m1 = hi - invphi * (hi - lo)
            f1 = nll(m1)
        else:
            lo, m1, f1 = m1, m2, f2
            m2 = lo + invphi * (hi - lo)
            f2 = nll(m2)
    return 0.5 * (lo + hi)


def _fitted_cdf(alpha: float, x_min: int, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact model CDF evaluated at each tail degree and just below it."""
    z = _hurwitz_zeta(alpha, x_min)
    x_max = int(xs[-1])
    if x_max - x_min <= 5_000_000:
        support = np.arange(x_min, x_max + 1, dtype=np.float64)
        cdf_all = np.cumsum(support**-alpha) / z
        idx = xs.astype(np.int64) - x_min
        at = cdf_all[idx]
        below = np.where(idx > 0, cdf_all[np.maximum(idx - 1, 0)], 0.0)
    else:  # sparse huge tail: per-point zeta evaluation
        at = np.array([1.0 - _hurwitz_zeta(alpha, int(x) + 1) / z for x in xs])
        below = np.array([1.0 - _hurwitz_zeta(alpha, int(x)) / z for x in xs])
    return at, below


def _tail_fit(degrees: np.ndarray, counts: np.ndarray, x_min: int) -> tuple[float, float, int]:
    """MLE alpha and KS distance for one x_min candidate.

    The KS distance compares the empirical tail CDF against the fitted
    discrete CDF at both edges of each empirical step.
    """
    mask = degrees >= x_min
    xs = degrees[mask].astype(np.float64)
    ws = counts[mask].astype(np.float64)
    n = float(ws.sum())
    if len(xs) == 1:  # a single support point cannot bracket a likelihood
        return math.inf, 1.0, int(n)
    alpha = _discrete_mle(xs, ws, x_min)

    emp_cdf = np.cumsum(ws) / n
    emp_lower = np.concatenate(([0.0], emp_cdf[:-1]))
    fit_cdf, fit_lower = _fitted_cdf(alpha, x_min, xs)
    ks = float(
        max(np.abs(emp_cdf - fit_cdf).max(), np.abs(emp_lower - fit_lower).max())
    )
    return alpha, ks, int(n)


def fit_power_law(
    dist: DegreeDistribution | Iterable[int],
    x_min_range: Optional[tuple[int, int]] = None,
    min_tail: int = 10,
) -> PowerLawFit:
    """Fit a discrete power law to positive degrees, selecting x_min by
    minimum KS distance over the candidate range.

    ``x_min_range`` defaults to [1, 95th percentile of positive degrees].
    Candidates are the distinct observed degrees inside the range; those
    with a tail smaller than ``min_tail`` are skipped. Raises
    :class:`InsufficientTailError` when nothing is fittable.
    """
    if not isinstance(dist, DegreeDistribution):
        dist = DegreeDistribution(histogram=dict(Counter(int(v) for v in dist)), scope="raw")
    degrees, counts = dist.positive_degrees()
    n_positive = int(counts.sum()) if len(counts) else 0
    if n_positive < min_tail:
        raise InsufficientTailError(
            f"need at least {min_tail} positive-degree observations, have {n_positive}"
        )

    if x_min_range is None:
        x_min_range = (1, _weighted_percentile(degrees, counts, 0.95))
    lo, hi = x_min_range
    candidates = [int(d) for d in degrees if lo <= d <= hi]
    if not candidates:
        raise ValueError("x_min_range contains no observed degree")

    best: Optional[PowerLawFit] = None
    for x_min in candidates:
        alpha, ks, n_tail = _tail_fit(degrees, counts, x_min)
        if n_tail < min_tail or not math.isfinite(alpha):
            continue
        if best is None or ks < best.ks_distance:
            best = PowerLawFit(alpha=alpha, x_min=x_min, ks_distance=ks, n_tail=n_tail)
    if best is None:
        raise InsufficientTailError("no x_min candidate retains a usable tail")
    return best


@dataclass(frozen=True)
class WccSummary:
    component_count: int
    component_sizes: tuple[int, ...]  # descending
    largest_share: float

    def to_json(self) -> dict:
        return {
            "component_count": self.component_count,
            "component_sizes": list(self.component_sizes),
            "largest_share": self.largest_share,
        }


class UnionFind:
    """Disjoint sets over ids, with path compression and union by size."""

    def __init__(self, items: Iterable[str]):
        self.parent = {item: item for item in items}
        self.size = {item: 1 for item in self.parent}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def components(self) -> dict[str, list[str]]:
        groups: dict[str, list[str]] = {}
        for item in self.parent:
            groups.setdefault(self.find(item), []).append(item)
        return groups


def weakly_connected_components(graph: LineageGraph) -> WccSummary:
    """Component census over the undirected view of the graph."""
    uf = UnionFind(graph.nodes)
    for child, parent, _ in graph.edges():
        uf.union(child, parent)
    sizes = sorted((len(members) for members in uf.components().values()), reverse=True)
    n = len(graph)
    return WccSummary(
        component_count=len(sizes),
        component_sizes=tuple(sizes),
        largest_share=(sizes[0] / n) if sizes else 0.0,
    )


def component_partition(graph: LineageGraph) -> frozenset:
    """Partition of node ids into components, as a set of frozensets
    (order-independent; convenient for oracle comparisons)."""
    uf = UnionFind(graph.nodes)
    for child, parent, _ in graph.edges():
        uf.union(child, parent)
    return frozenset(frozenset(m) for m in uf.components().values())
