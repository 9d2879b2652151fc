"""End-to-end analysis over a built graph: structure, disruption scores,
correlational and temporal analyses, exported as CSV tables plus a single
JSON report bundle that downstream figure tooling consumes.

All outputs are sorted and formatted deterministically: re-running the
same analysis on the same inputs produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytics, disruption, structure
from .lineage import LineageGraph, census

BUNDLE_NAME = "report.json"


@dataclass
class AnalysisConfig:
    windows: tuple[int, ...] = disruption.DEFAULT_WINDOWS
    epsilon: float = disruption.DEFAULT_EPSILON
    main_window: int = disruption.DEFAULT_WINDOW_DAYS
    period_boundaries: tuple[str, ...] = analytics.DEFAULT_PERIOD_BOUNDARIES
    lowess_frac: float = 0.3
    robust_iters: int = 2
    bins: int = analytics.DEFAULT_HISTOGRAM_BINS
    workers: int = 1
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.main_window not in self.windows:
            self.windows = tuple(sorted({*self.windows, self.main_window}))

    def to_json(self) -> dict:
        return {
            "windows": list(self.windows),
            "epsilon": self.epsilon,
            "main_window": self.main_window,
            "period_boundaries": list(self.period_boundaries),
            "lowess_frac": self.lowess_frac,
            "robust_iters": self.robust_iters,
            "bins": self.bins,
            "workers": self.workers,
            "inputs": self.inputs,
        }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _group_json(summary: analytics.MdiSummary, values: Sequence[float]) -> dict:
    out = summary.to_json()
    ordered = sorted(values)
    out["values"] = ordered
    out["quartiles"] = (
        [float(q) for q in np.percentile(ordered, [25, 50, 75])] if ordered else None
    )
    return out


def run_analysis(
    graph: LineageGraph, config: AnalysisConfig, out_dir
) -> dict:
    """Run every analysis stage, write per-table CSV/JSON files under
    ``out_dir``, and return the assembled report bundle."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # -- structure --------------------------------------------------------
    census_report = census(graph)
    distributions = {}
    for scope in structure.DEGREE_SCOPES:
        dist = structure.in_degrees(graph, scope)
        distributions[scope] = dist
        _write_csv(
            out / f"degrees_{scope}.csv",
            ["degree", "count"],
            sorted(dist.histogram.items()),
        )

    power_law: Optional[structure.PowerLawFit] = None
    power_law_error: Optional[str] = None
    try:
        power_law = structure.fit_power_law(distributions[structure.OVERALL])
    except (structure.InsufficientTailError, ValueError) as exc:
        power_law_error = str(exc)
    with open(out / "power_law.json", "w", encoding="utf-8") as fh:
        json.dump(
            power_law.to_json() if power_law else {"error": power_law_error},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")

    wcc = structure.weakly_connected_components(graph)
    _write_csv(
        out / "wcc.csv",
        ["component_rank", "size"],
        enumerate(wcc.component_sizes, start=1),
    )

    # -- disruption scores --------------------------------------------------
    results = disruption.mdi_sweep(
        graph, windows=config.windows, epsilon=config.epsilon, workers=config.workers
    )
    disruption.write_mdi_csv(results, out / "mdi.csv")

    main_rows = [
        r for r in results if r.eligible and r.window_days == config.main_window
    ]
    mdi_values = [r.mdi for r in main_rows]
    retained_zero = sum(
        1 for r in main_rows if r.x_count + r.y_count + r.z_count == 0
    )
    overall_summary = analytics.summarize_mdi("overall", mdi_values, bins=config.bins)

    # -- in-degree association ---------------------------------------------
    trend: Optional[analytics.TrendFit] = None
    trend_note: Optional[str] = None
    if len(main_rows) >= 5:
        trend = analytics.fit_trend(
            [graph.in_degree(r.focal_id) for r in main_rows],
            [r.mdi for r in main_rows],
            frac=config.lowess_frac,
            robust_iters=config.robust_iters,
        )
        _write_csv(
            out / "trend.csv",
            ["in_degree", "mdi", "smoothed"],
            trend.points,
        )
    else:
        trend_note = "fewer than 5 scored models; trend not fitted"
        _write_csv(out / "trend.csv", ["in_degree", "mdi", "smoothed"], [])

    # -- groups -------------------------------------------------------------
    scale_groups, relation_groups = analytics.group_summaries(
        results, graph, window_days=config.main_window, bins=config.bins
    )
    _write_csv(
        out / "scale_groups.csv",
        ["bucket", "n", "mean", "median", "positive_fraction"],
        [
            (b, s.n, s.mean, s.median, s.positive_fraction)
            for b, s in scale_groups.items()
        ],
    )
    _write_csv(
        out / "relation_groups.csv",
        ["relation", "n", "mean", "median", "positive_fraction"],
        [
            (rel, s.n, s.mean, s.median, s.positive_fraction)
            for rel, s in relation_groups.items()
        ],
    )

    # -- temporal -----------------------------------------------------------
    temporal = analytics.temporal_report(
        results,
        graph,
        period_boundaries=config.period_boundaries,
        main_window_days=config.main_window,
        bins=config.bins,
    )
    _write_csv(
        out / "monthly.csv",
        ["month", "new_models", "eligible", "positive_fraction"],
        [
            (r.month, r.new_models, r.eligible, r.positive_fraction)
            for r in temporal.monthly
        ],
    )
    _write_csv(
        out / "periods.csv",
        ["label", "start", "end", "n", "mean", "median", "positive_fraction"],
        [
            (
                p.label,
                p.start,
                p.end,
                p.summary.n,
                p.summary.mean,
                p.summary.median,
                p.summary.positive_fraction,
            )
            for p in temporal.periods
        ],
    )
    _write_csv(
        out / "window_sensitivity.csv",
        ["window_days", "n", "mean", "median", "positive_fraction"],
        [
            (w, s.n, s.mean, s.median, s.positive_fraction)
            for w, s in zip(sorted({r.window_days for r in results}), temporal.window_sensitivity)
        ],
    )

    # -- bundle ---------------------------------------------------------------
    mdi_by_focal = {r.focal_id: r.mdi for r in main_rows}
    bundle = {
        "config": config.to_json(),
        "census": census_report.to_json(),
        "degree_distributions": {
            scope: [[int(d), int(c)] for d, c in sorted(dist.histogram.items())]
            for scope, dist in distributions.items()
        },
        "power_law": power_law.to_json() if power_law else None,
        "power_law_error": power_law_error,
        "wcc": wcc.to_json(),
        "mdi": {
            "window_days": config.main_window,
            "summary": overall_summary.to_json(),
            "eligible_count": len(main_rows),
            "retained_zero_count": retained_zero,
            "nonzero_denominator_count": len(main_rows) - retained_zero,
        },
        "trend": trend.to_json() if trend else None,
        "trend_note": trend_note,
        "scale_groups": {
            bucket: _group_json(
                summary,
                [
                    v
                    for focal, v in mdi_by_focal.items()
                    if analytics.extract_param_scale(focal).bucket == bucket
                ],
            )
            for bucket, summary in scale_groups.items()
        },
        "relation_groups": {
            relation: _group_json(
                summary,
                [
                    v
                    for focal, v in mdi_by_focal.items()
                    if relation in {rel for _, rel in graph.out_edges(focal)}
                ],
            )
            for relation, summary in relation_groups.items()
        },
        "temporal": temporal.to_json(),
    }
    with open(out / BUNDLE_NAME, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return bundle
