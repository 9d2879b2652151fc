"""The nine figure renderers.

Strictly presentation: every number (histograms, smoothed curves,
quartiles, crossings) arrives precomputed in the bundle; the renderers
only transform axes. Output is pixel-stable for a given bundle: style is
pinned and the only randomness (raincloud jitter) is seeded from a
constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bundle import FIGURE_KINDS, load_bundle, table, validate

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "legend.frameon": False,
}

_JITTER_SEED = 2026

_SCALE_ORDER = ("small", "medium", "large", "unknown")
_RELATION_ORDER = ("finetune", "adapter", "quantized", "merge")
_SERIES_COLORS = {
    "overall": "#333333",
    "finetune": "#1f77b4",
    "adapter": "#2ca02c",
    "quantized": "#ff7f0e",
    "merge": "#9467bd",
}


@dataclass
class FigureSpec:
    kind: str
    bundle_path: str
    out_path: str
    width: float = 8.0
    height: float = 5.0
    dpi: int = 100


def _empty_frame(ax, title: str) -> None:
    ax.text(
        0.5,
        0.5,
        "no data",
        transform=ax.transAxes,
        ha="center",
        va="center",
        fontsize=14,
        color="0.45",
    )
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title(title)


def _histogram_silhouette(summary: dict):
    """(bin centers, counts) from a summary's fixed-bin histogram."""
    hist = summary.get("histogram") or {}
    edges = np.asarray(hist.get("bin_edges", []), dtype=float)
    counts = np.asarray(hist.get("counts", []), dtype=float)
    if len(edges) != len(counts) + 1 or counts.sum() <= 0:
        return None
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, counts


def draw_degree_distribution(bundle: dict, ax) -> None:
    distributions = table(bundle, "degree_distributions", {})
    drew = False
    for scope, rows in distributions.items():
        points = [(d, c) for d, c in rows if d >= 1 and c > 0]
        if not points:
            continue
        degrees, counts = zip(*sorted(points))
        ax.loglog(
            degrees,
            counts,
            marker="o",
            markersize=3,
            linewidth=1,
            label=scope,
            color=_SERIES_COLORS.get(scope),
            alpha=0.85,
        )
        drew = True
    if not drew:
        _empty_frame(ax, "In-degree distributions")
        return
    ax.set_xlabel("in-degree")
    ax.set_ylabel("models")
    ax.set_title("In-degree distributions")
    ax.legend()


def draw_wcc_sizes(bundle: dict, ax) -> None:
    sizes = table(bundle, "wcc.component_sizes", [])
    if not sizes:
        _empty_frame(ax, "Component sizes")
        return
    sizes = np.asarray(sizes, dtype=float)
    share = np.cumsum(sizes) / sizes.sum()
    ranks = np.arange(1, len(sizes) + 1)
    ax.semilogx(ranks, share, drawstyle="steps-post", color="#1f77b4")
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("component rank")
    ax.set_ylabel("cumulative share of nodes")
    ax.set_title("Weakly connected component sizes")


def draw_mdi_histogram(bundle: dict, ax) -> None:
    summary = table(bundle, "mdi.summary", {})
    silhouette = _histogram_silhouette(summary)
    if silhouette is None:
        _empty_frame(ax, "Disruption score distribution")
        return
    centers, counts = silhouette
    width = centers[1] - centers[0] if len(centers) > 1 else 0.05
    ax.bar(centers, counts, width=width * 0.95, color="#1f77b4", alpha=0.85)
    mean = summary.get("mean")
    if mean is not None:
        ax.axvline(mean, color="#d62728", linewidth=1.2, label=f"mean {mean:.2f}")
        ax.legend()
    ax.set_xlim(-1.05, 1.05)
    ax.set_xlabel("disruption score")
    ax.set_ylabel("models")
    ax.set_title(f"Disruption score distribution (n={summary.get('n', 0)})")


def draw_scatter_lowess(bundle: dict, ax) -> None:
    trend = table(bundle, "trend", {})
    points = trend.get("points") or []
    if not points:
        _empty_frame(ax, "Disruption vs in-degree")
        return
    arr = np.asarray(points, dtype=float)
    ax.scatter(arr[:, 0], arr[:, 1], s=9, alpha=0.35, color="#1f77b4", edgecolors="none")
    ax.plot(arr[:, 0], arr[:, 2], color="#d62728", linewidth=1.8, label="LOWESS")
    ax.axhline(0.0, color="0.3", linewidth=0.9, linestyle="--")
    crossing = trend.get("zero_crossing")
    if crossing is not None:
        ax.axvline(crossing, color="#2ca02c", linewidth=1.2, linestyle=":")
        ax.annotate(
            f"crosses 0 at {crossing:.0f}",
            xy=(crossing, 0.0),
            xytext=(5, 12),
            textcoords="offset points",
            fontsize=8,
            color="#2ca02c",
        )
    rho = trend.get("spearman_rho")
    title = "Disruption vs in-degree"
    if rho is not None:
        title += f" (Spearman rho = {rho:.3f})"
    ax.set_ylim(-1.1, 1.1)
    ax.set_xlabel("in-degree")
    ax.set_ylabel("disruption score")
    ax.set_title(title)
    ax.legend(loc="lower right")


def _half_violin(ax, x, summary, color, side=1.0, max_halfwidth=0.38):
    silhouette = _histogram_silhouette(summary)
    if silhouette is None:
        return False
    centers, counts = silhouette
    halfwidths = counts / counts.max() * max_halfwidth
    ax.fill_betweenx(
        centers, x, x + side * halfwidths, color=color, alpha=0.55, linewidth=0
    )
    return True


def draw_scale_violin(bundle: dict, ax) -> None:
    groups = table(bundle, "scale_groups", {})
    order = [b for b in _SCALE_ORDER if b in groups] + [
        b for b in sorted(groups) if b not in _SCALE_ORDER
    ]
    drew = False
    labels = []
    for i, bucket in enumerate(order):
        summary = groups[bucket]
        labels.append(f"{bucket}\n(n={summary.get('n', 0)})")
        color = plt.get_cmap("viridis")(0.15 + 0.25 * i)
        if _half_violin(ax, i, summary, color, side=1.0):
            _half_violin(ax, i, summary, color, side=-1.0)
            drew = True
        quartiles = summary.get("quartiles")
        if quartiles:
            ax.hlines(quartiles[1], i - 0.42, i + 0.42, color="black", linewidth=1.6)
    if not drew:
        _empty_frame(ax, "Disruption by parameter scale")
        return
    ax.set_xticks(range(len(order)), labels)
    ax.set_ylim(-1.1, 1.1)
    ax.set_ylabel("disruption score")
    ax.set_title("Disruption by parameter scale (bar = median)")


def draw_strategy_raincloud(bundle: dict, ax) -> None:
    groups = table(bundle, "relation_groups", {})
    order = [r for r in _RELATION_ORDER if r in groups] + [
        r for r in sorted(groups) if r not in _RELATION_ORDER
    ]
    rng = np.random.default_rng(_JITTER_SEED)
    drew = False
    labels = []
    for i, relation in enumerate(order):
        summary = groups[relation]
        labels.append(f"{relation}\n(n={summary.get('n', 0)})")
        color = _SERIES_COLORS.get(relation, "#1f77b4")
        if _half_violin(ax, i, summary, color, side=-1.0, max_halfwidth=0.30):
            drew = True
        values = np.asarray(summary.get("values") or [], dtype=float)
        if len(values):
            jitter = rng.uniform(0.06, 0.30, size=len(values))
            ax.scatter(
                i + jitter, values, s=6, color=color, alpha=0.45, edgecolors="none"
            )
            drew = True
        quartiles = summary.get("quartiles")
        if quartiles:
            q1, q2, q3 = quartiles
            ax.add_patch(
                plt.Rectangle(
                    (i - 0.045, q1), 0.09, max(q3 - q1, 1e-3),
                    facecolor="white", edgecolor="black", linewidth=0.9, zorder=3,
                )
            )
            ax.hlines(q2, i - 0.045, i + 0.045, color="black", linewidth=1.6, zorder=4)
    if not drew:
        _empty_frame(ax, "Disruption by derivation strategy")
        return
    ax.set_xticks(range(len(order)), labels)
    ax.set_ylim(-1.1, 1.1)
    ax.set_ylabel("disruption score")
    ax.set_title("Disruption by derivation strategy")


def draw_monthly_trend(bundle: dict, ax) -> None:
    rows = table(bundle, "temporal.monthly", [])
    if not rows:
        _empty_frame(ax, "Monthly releases and positive share")
        return
    months = [r["month"] for r in rows]
    counts = [r["new_models"] for r in rows]
    xs = np.arange(len(months))
    ax.bar(xs, counts, color="#1f77b4", alpha=0.7, label="new models")
    ax.set_ylabel("new models")
    ax.set_xlabel("month")

    twin = ax.twinx()
    twin.grid(False)
    twin.spines["right"].set_visible(True)
    fx = [i for i, r in enumerate(rows) if r["positive_fraction"] is not None]
    fy = [rows[i]["positive_fraction"] for i in fx]
    if fx:
        twin.plot(fx, fy, color="#d62728", marker="o", markersize=3,
                  linewidth=1.3, label="share positive")
    twin.set_ylim(0, 1.05)
    twin.set_ylabel("share of positive scores")

    step = max(1, len(months) // 10)
    ax.set_xticks(xs[::step], months[::step], rotation=45, ha="right", fontsize=8)
    ax.set_title("Monthly releases and positive-score share")
    handles_a, labels_a = ax.get_legend_handles_labels()
    handles_b, labels_b = twin.get_legend_handles_labels()
    ax.legend(handles_a + handles_b, labels_a + labels_b, loc="upper left")


def _ridge(ax, entries, title, cmap_name):
    """Vertically offset histogram silhouettes, earliest row on top."""
    drew = False
    cmap = plt.get_cmap(cmap_name)
    n = len(entries)
    yticks, ylabels = [], []
    for i, (label, summary) in enumerate(entries):
        offset = (n - 1 - i) * 1.0
        yticks.append(offset)
        ylabels.append(f"{label} (n={summary.get('n', 0)})")
        silhouette = _histogram_silhouette(summary)
        ax.axhline(offset, color="0.8", linewidth=0.6, zorder=1)
        if silhouette is None:
            continue
        centers, counts = silhouette
        heights = counts / counts.max() * 0.9
        color = cmap(0.25 + 0.6 * i / max(n - 1, 1))
        ax.fill_between(centers, offset, offset + heights, color=color,
                        alpha=0.8, zorder=2, linewidth=0)
        drew = True
    if not drew:
        _empty_frame(ax, title)
        return
    ax.set_yticks(yticks, ylabels, fontsize=8)
    ax.set_xlim(-1.05, 1.05)
    ax.set_xlabel("disruption score")
    ax.set_title(title)


def draw_period_ridge(bundle: dict, ax) -> None:
    periods = table(bundle, "temporal.periods", [])
    entries = [(p.get("label", f"period {i}"), p.get("summary", {}))
               for i, p in enumerate(periods)]
    _ridge(ax, entries, "Disruption by release period", "plasma")


def draw_window_density(bundle: dict, ax) -> None:
    windows = table(bundle, "temporal.window_sensitivity", [])
    entries = [(s.get("label", f"window {i}"), s) for i, s in enumerate(windows)]
    _ridge(ax, entries, "Disruption under different observation windows", "viridis")


_RENDERERS = {
    "degree-distribution": draw_degree_distribution,
    "wcc-sizes": draw_wcc_sizes,
    "mdi-histogram": draw_mdi_histogram,
    "scatter-lowess": draw_scatter_lowess,
    "scale-violin": draw_scale_violin,
    "strategy-raincloud": draw_strategy_raincloud,
    "monthly-trend": draw_monthly_trend,
    "period-ridge": draw_period_ridge,
    "window-density": draw_window_density,
}

assert set(_RENDERERS) == set(FIGURE_KINDS)


def draw(kind: str, bundle: dict, fig) -> None:
    """Draw one figure kind onto an existing matplotlib figure."""
    ax = fig.add_subplot(111)
    _RENDERERS[kind](bundle, ax)


def render(spec: FigureSpec) -> Path:
    """Validate the bundle against the figure kind, draw, and save."""
    bundle = load_bundle(spec.bundle_path)
    validate(bundle, spec.kind)
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=(spec.width, spec.height))
        try:
            draw(spec.kind, bundle, fig)
            fig.tight_layout()
            out = Path(spec.out_path)
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, dpi=spec.dpi)
        finally:
            plt.close(fig)
    return Path(spec.out_path)
