"""Correlational and temporal analyses over the disruption-score table.

Includes rank correlation, a robust LOWESS smoother (Cleveland 1979),
trend zero-crossing detection, parameter-scale and derivation-strategy
group summaries, and the monthly/period/window temporal report.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from .disruption import MdiResult
from .ingest import parse_timestamp
from .lineage import RELATION_TYPES, LineageGraph
from .scales import ParamScale, bucket_for, extract_param_scale  # noqa: F401

SCALE_BUCKETS = ("small", "medium", "large", "unknown")
DEFAULT_PERIOD_BOUNDARIES = ("2023-03-01", "2024-04-01", "2025-04-01")
DEFAULT_HISTOGRAM_BINS = 40


def _as_float_array(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean rank of the tie group."""
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts
    mean_rank = (starts + ends + 1) / 2.0
    return mean_rank[inverse]


def spearman(xs, ys) -> float:
    """Rank correlation: Pearson correlation of average-ranked data.

    Exactly +/-1 for strictly co-monotone or anti-monotone inputs. Raises
    on length mismatch, fewer than 3 points, or a constant input (the
    coefficient is undefined there).
    """
    x = _as_float_array("xs", xs)
    y = _as_float_array("ys", ys)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("rank correlation undefined for constant input")

    rx = _average_ranks(x)
    ry = _average_ranks(y)
    if np.array_equal(rx, ry):
        return 1.0
    if np.array_equal(rx, len(rx) + 1 - ry):
        return -1.0
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def lowess(
    xs, ys, frac: float = 0.3, robust_iters: int = 2
) -> np.ndarray:
    """Locally weighted linear regression at each input point.

    Tricube weights over the ``frac`` nearest neighbours per point, then
    ``robust_iters`` bisquare reweighting passes to damp outliers.
    Deterministic; needs at least 5 points. Reproduces exactly-linear data
    to machine precision for any ``frac``.
    """
    x = _as_float_array("xs", xs)
    y = _as_float_array("ys", ys)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 5:
        raise ValueError("need at least 5 points")
    if not 0.0 < frac <= 1.0:
        raise ValueError("frac must be in (0, 1]")

    r = min(n - 1, max(2, int(math.ceil(frac * n)) - 1))
    span = float(x.max() - x.min())
    tiny = 1e-12 * max(span, 1.0)

    # Bandwidth per point: distance to the r-th nearest neighbour.
    dist = np.abs(x[:, None] - x[None, :])
    h = np.maximum(np.sort(dist, axis=1)[:, r], tiny)
    w = np.clip(dist / h[:, None], 0.0, 1.0)
    w = (1.0 - w**3) ** 3

    smoothed = np.zeros(n)
    delta = np.ones(n)
    for _ in range(max(1, robust_iters + 1)):
        for i in range(n):
            weights = delta * w[i]
            xi = x - x[i]  # center for conditioning; fit value is the intercept
            sw = weights.sum()
            swx = np.dot(weights, xi)
            swy = np.dot(weights, y)
            swxx = np.dot(weights, xi * xi)
            swxy = np.dot(weights, xi * y)
            denom = sw * swxx - swx * swx
            if sw <= 0.0 or denom <= 1e-12 * sw * swxx:
                smoothed[i] = swy / sw if sw > 0 else y[i]
            else:
                slope = (sw * swxy - swx * swy) / denom
                smoothed[i] = (swy - slope * swx) / sw
        residuals = y - smoothed
        s = float(np.median(np.abs(residuals)))
        # near-perfect fits leave only float noise; reweighting on it would
        # zero out healthy points
        if s <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
            break
        delta = np.clip(residuals / (6.0 * s), -1.0, 1.0)
        delta = (1.0 - delta**2) ** 2
    return smoothed


@dataclass(frozen=True)
class TrendFit:
    """Smoothed disruption-vs-in-degree trend for the scored focal models."""

    points: tuple[tuple[float, float, float], ...]  # (in_degree, mdi, smoothed)
    spearman_rho: Optional[float]
    zero_crossing: Optional[float]

    def to_json(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "spearman_rho": self.spearman_rho,
            "zero_crossing": self.zero_crossing,
        }


def zero_crossing(points) -> Optional[float]:
    """First x where the smoothed curve passes from <= 0 to > 0, linearly
    interpolated; None when the curve never crosses.

    Accepts a :class:`TrendFit` or (x, smoothed) pairs sorted by x
    ascending.
    """
    if isinstance(points, TrendFit):
        points = [(p[0], p[2]) for p in points.points]
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if y0 <= 0.0 < y1:
            if y1 == y0:
                return float(x0)
            return float(x0 + (0.0 - y0) * (x1 - x0) / (y1 - y0))
    return None


def fit_trend(
    in_degree_values,
    mdi_values,
    frac: float = 0.3,
    robust_iters: int = 2,
) -> TrendFit:
    """LOWESS trend of disruption score against in-degree, with rank
    correlation and the zero-crossing point of the smoothed curve."""
    x = _as_float_array("in_degree_values", in_degree_values)
    y = _as_float_array("mdi_values", mdi_values)
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    smoothed = lowess(x, y, frac=frac, robust_iters=robust_iters)
    try:
        rho = spearman(x, y)
    except ValueError:
        rho = None
    points = tuple((float(a), float(b), float(c)) for a, b, c in zip(x, y, smoothed))
    crossing = zero_crossing([(p[0], p[2]) for p in points])
    return TrendFit(points=points, spearman_rho=rho, zero_crossing=crossing)


@dataclass(frozen=True)
class MdiSummary:
    """Distribution summary of disruption scores for one scope."""

    label: str
    n: int
    mean: Optional[float]
    median: Optional[float]
    histogram_counts: tuple[int, ...]
    histogram_edges: tuple[float, ...]
    positive_fraction: Optional[float]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "mean": self.mean,
            "median": self.median,
            "histogram": {
                "bin_edges": list(self.histogram_edges),
                "counts": list(self.histogram_counts),
            },
            "positive_fraction": self.positive_fraction,
        }


def summarize_mdi(
    label: str, values: Sequence[float], bins: int = DEFAULT_HISTOGRAM_BINS
) -> MdiSummary:
    """Mean/median/positive-share plus a fixed-bin histogram over [-1, 1]."""
    arr = np.asarray(list(values), dtype=np.float64)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    if arr.size == 0:
        return MdiSummary(
            label=label,
            n=0,
            mean=None,
            median=None,
            histogram_counts=tuple([0] * bins),
            histogram_edges=tuple(float(e) for e in edges),
            positive_fraction=None,
        )
    counts, _ = np.histogram(arr, bins=edges)
    return MdiSummary(
        label=label,
        n=int(arr.size),
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        histogram_counts=tuple(int(c) for c in counts),
        histogram_edges=tuple(float(e) for e in edges),
        positive_fraction=float(np.mean(arr > 0.0)),
    )


def _scored_at_window(mdi_table: Sequence[MdiResult], window_days: int) -> list[MdiResult]:
    return [r for r in mdi_table if r.eligible and r.window_days == window_days]


def group_summaries(
    mdi_table: Sequence[MdiResult],
    graph: LineageGraph,
    window_days: int = 90,
    bins: int = DEFAULT_HISTOGRAM_BINS,
) -> tuple[dict[str, MdiSummary], dict[str, MdiSummary]]:
    """Summaries per parameter-scale bucket and per derivation strategy.

    A focal model's strategy is the relation type of its outgoing edges;
    multi-parent models contribute to each of their edge types once.
    Bucket n values over the four scale buckets sum to the scored row
    count; strategy groups can overlap.
    """
    rows = _scored_at_window(mdi_table, window_days)

    by_bucket: dict[str, list[float]] = {b: [] for b in SCALE_BUCKETS}
    by_relation: dict[str, list[float]] = {rel: [] for rel in RELATION_TYPES}
    for row in rows:
        scale = extract_param_scale(row.focal_id)
        by_bucket[scale.bucket].append(row.mdi)
        for relation in {rel for _, rel in graph.out_edges(row.focal_id)}:
            by_relation[relation].append(row.mdi)

    scale_summaries = {
        bucket: summarize_mdi(bucket, values, bins=bins)
        for bucket, values in by_bucket.items()
    }
    relation_summaries = {
        relation: summarize_mdi(relation, values, bins=bins)
        for relation, values in by_relation.items()
    }
    return scale_summaries, relation_summaries


def _month_of(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m")


def _month_range(first: str, last: str) -> list[str]:
    y, m = map(int, first.split("-"))
    ly, lm = map(int, last.split("-"))
    months = []
    while (y, m) <= (ly, lm):
        months.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return months


@dataclass(frozen=True)
class MonthlyRow:
    month: str
    new_models: int
    eligible: int
    positive_fraction: Optional[float]


@dataclass(frozen=True)
class PeriodRow:
    label: str
    start: Optional[str]  # ISO date, inclusive; None for the open left end
    end: Optional[str]  # ISO date, exclusive; None for the open right end
    summary: MdiSummary
    values: tuple[float, ...]


@dataclass(frozen=True)
class TemporalReport:
    monthly: tuple[MonthlyRow, ...]
    periods: tuple[PeriodRow, ...]
    window_sensitivity: tuple[MdiSummary, ...]  # labelled by window

    def to_json(self) -> dict:
        return {
            "monthly": [
                {
                    "month": r.month,
                    "new_models": r.new_models,
                    "eligible": r.eligible,
                    "positive_fraction": r.positive_fraction,
                }
                for r in self.monthly
            ],
            "periods": [
                {
                    "label": p.label,
                    "start": p.start,
                    "end": p.end,
                    "summary": p.summary.to_json(),
                    "values": list(p.values),
                }
                for p in self.periods
            ],
            "window_sensitivity": [s.to_json() for s in self.window_sensitivity],
        }


def temporal_report(
    mdi_table: Sequence[MdiResult],
    graph: LineageGraph,
    period_boundaries: Sequence[str] = DEFAULT_PERIOD_BOUNDARIES,
    main_window_days: int = 90,
    bins: int = DEFAULT_HISTOGRAM_BINS,
) -> TemporalReport:
    """Monthly counts, release-anchored period distributions, and the
    observation-window sensitivity table.

    Monthly new-model counts cover every dated node in the graph; the
    positive share per month covers eligible focal models created that
    month (scored at the main window). Periods are half-open
    ``[boundary, next boundary)`` partitions of the timeline.
    """
    boundaries = sorted(period_boundaries)
    boundary_ts = [parse_timestamp(b) for b in boundaries]
    if boundary_ts != sorted(boundary_ts):
        raise ValueError("period boundaries must be sorted")

    dated = {
        model_id: info.created_at
        for model_id, info in graph.nodes.items()
        if info.created_at is not None
    }
    rows = _scored_at_window(mdi_table, main_window_days)
    mdi_by_focal = {r.focal_id: r.mdi for r in rows}

    monthly: list[MonthlyRow] = []
    if dated:
        new_by_month = Counter(_month_of(ts) for ts in dated.values())
        eligible_by_month: dict[str, list[float]] = {}
        for focal_id, value in mdi_by_focal.items():
            month = _month_of(dated[focal_id])
            eligible_by_month.setdefault(month, []).append(value)
        months = _month_range(min(new_by_month), max(new_by_month))
        for month in months:
            scored = eligible_by_month.get(month, [])
            monthly.append(
                MonthlyRow(
                    month=month,
                    new_models=new_by_month.get(month, 0),
                    eligible=len(scored),
                    positive_fraction=(
                        sum(1 for v in scored if v > 0) / len(scored) if scored else None
                    ),
                )
            )

    period_edges = [None, *boundary_ts, None]
    periods: list[PeriodRow] = []
    for i in range(len(boundary_ts) + 1):
        start_ts = period_edges[i]
        end_ts = period_edges[i + 1]
        start = boundaries[i - 1] if i > 0 else None
        end = boundaries[i] if i < len(boundaries) else None
        values = [
            value
            for focal_id, value in sorted(mdi_by_focal.items())
            if (start_ts is None or dated[focal_id] >= start_ts)
            and (end_ts is None or dated[focal_id] < end_ts)
        ]
        label = f"{start or 'start'}..{end or 'end'}"
        periods.append(
            PeriodRow(
                label=label,
                start=start,
                end=end,
                summary=summarize_mdi(label, values, bins=bins),
                values=tuple(values),
            )
        )

    windows = sorted({r.window_days for r in mdi_table if r.eligible})
    sensitivity = tuple(
        summarize_mdi(
            f"window_{w}",
            [r.mdi for r in _scored_at_window(mdi_table, w)],
            bins=bins,
        )
        for w in windows
    )

    return TemporalReport(
        monthly=tuple(monthly),
        periods=tuple(periods),
        window_sensitivity=sensitivity,
    )
