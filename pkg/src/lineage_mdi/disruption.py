"""Disruption scoring of lineage-graph nodes over time windows.

For an eligible focal model, downstream models released within the window
are split into three disjoint groups: those building only on the focal
model, those building on both the focal model and its parent set, and
those building only on the parent set. The index
``(x - z) / (x + y + z + epsilon)`` ranges over [-1, 1]: positive means
downstream development shifted to the focal model, negative means it
stayed with the predecessors.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .lineage import LineageGraph

SECONDS_PER_DAY = 86_400
DEFAULT_WINDOW_DAYS = 90
DEFAULT_EPSILON = 1e-9
DEFAULT_WINDOWS = (30, 60, 90, 120, 150, 180)

REASON_BASE = "base_model"
REASON_TERMINAL = "terminal_model"
REASON_NO_TIMESTAMP = "parent_timestamp_unknown"


@dataclass(frozen=True)
class ParentSet:
    """A focal model together with all of its direct parents (plural only
    for merged or multi-parent models)."""

    focal_id: str
    parents: frozenset

    def __post_init__(self):
        if not self.parents:
            raise ValueError(f"{self.focal_id}: parent set may not be empty")
        if self.focal_id in self.parents:
            raise ValueError(f"{self.focal_id}: focal model cannot be its own parent")


@dataclass(frozen=True)
class MdiResult:
    focal_id: str
    window_days: int
    x_count: int  # subsequent models deriving from the focal model only
    y_count: int  # ... from both the focal model and its parent set
    z_count: int  # ... from the parent set only
    mdi: Optional[float]
    eligible: bool
    ineligibility_reason: Optional[str] = None


def parent_set(graph: LineageGraph, focal_id: str) -> ParentSet:
    return ParentSet(focal_id=focal_id, parents=frozenset(graph.parents(focal_id)))


def ineligibility_reason(graph: LineageGraph, model_id: str) -> Optional[str]:
    """Why a node cannot be scored, or None if it is eligible.

    A focal model needs at least one parent (base models have none), at
    least one derivative anywhere in the dataset (terminal models have
    none), and a known creation time (stub parents lack one).
    """
    if graph.out_degree(model_id) == 0:
        return REASON_BASE
    if graph.in_degree(model_id) == 0:
        return REASON_TERMINAL
    if graph.created_at(model_id) is None:
        return REASON_NO_TIMESTAMP
    return None


def eligible_focal_models(graph: LineageGraph) -> set:
    return {m for m in graph.nodes if ineligibility_reason(graph, m) is None}


def classify_subsequent(
    graph: LineageGraph, focal: ParentSet, window_days: int
) -> tuple[set, set, set]:
    """Partition in-window subsequent models into (X, Y, Z) sets.

    The candidate universe holds every model created strictly after the
    focal model and no later than ``window_days`` days after it that has a
    direct edge to the focal model and/or to at least one parent. The
    focal model itself and models with unknown creation time are excluded.
    Classification keys on the focal model's timestamp only; parent
    timestamps are irrelevant.
    """
    if window_days <= 0:
        raise ValueError("window_days must be positive")
    focal_created = graph.created_at(focal.focal_id)
    if focal_created is None:
        raise ValueError(f"{focal.focal_id}: unknown creation time")
    lo = focal_created
    hi = focal_created + window_days * SECONDS_PER_DAY

    def in_window(model_id: str) -> bool:
        if model_id == focal.focal_id:
            return False
        ts = graph.created_at(model_id)
        return ts is not None and lo < ts <= hi

    from_focal = {c for c in graph.children(focal.focal_id) if in_window(c)}
    from_parents = set()
    for parent in focal.parents:
        from_parents.update(c for c in graph.children(parent) if in_window(c))

    return (
        from_focal - from_parents,
        from_focal & from_parents,
        from_parents - from_focal,
    )


def compute_mdi(x: int, y: int, z: int, epsilon: float = DEFAULT_EPSILON) -> float:
    """``(x - z) / (x + y + z + epsilon)``; the epsilon guard maps the
    empty window to exactly 0."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if min(x, y, z) < 0:
        raise ValueError("counts must be non-negative")
    return (x - z) / (x + y + z + epsilon)


def _score(
    graph: LineageGraph, focal_id: str, window_days: int, epsilon: float
) -> MdiResult:
    focal = parent_set(graph, focal_id)
    x_set, y_set, z_set = classify_subsequent(graph, focal, window_days)
    x, y, z = len(x_set), len(y_set), len(z_set)
    return MdiResult(
        focal_id=focal_id,
        window_days=window_days,
        x_count=x,
        y_count=y,
        z_count=z,
        mdi=compute_mdi(x, y, z, epsilon),
        eligible=True,
    )


def mdi_sweep(
    graph: LineageGraph,
    windows: Sequence[int] = (DEFAULT_WINDOW_DAYS,),
    epsilon: float = DEFAULT_EPSILON,
    include_ineligible: bool = False,
    workers: int = 1,
) -> list[MdiResult]:
    """Score every eligible focal model at every window.

    Output is sorted by (focal_id, window_days) regardless of worker
    count. With ``include_ineligible`` the table also carries zero rows
    for excluded nodes with their exclusion reason.
    """
    if not windows:
        raise ValueError("windows must be non-empty")
    if any(w <= 0 for w in windows):
        raise ValueError("windows must be positive")
    window_list = sorted(set(int(w) for w in windows))
    focals = sorted(eligible_focal_models(graph))

    def score_block(block: list) -> list[MdiResult]:
        return [
            _score(graph, focal_id, w, epsilon)
            for focal_id in block
            for w in window_list
        ]

    if workers > 1 and len(focals) > 1:
        chunk = max(1, len(focals) // workers)
        blocks = [focals[i : i + chunk] for i in range(0, len(focals), chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [r for block in pool.map(score_block, blocks) for r in block]
    else:
        results = score_block(focals)

    if include_ineligible:
        for model_id in sorted(graph.nodes):
            reason = ineligibility_reason(graph, model_id)
            if reason is None:
                continue
            results.extend(
                MdiResult(model_id, w, 0, 0, 0, None, False, reason)
                for w in window_list
            )
    results.sort(key=lambda r: (r.focal_id, r.window_days))
    return results


def mdi_oracle(
    graph: LineageGraph,
    focal_id: str,
    window_days: int,
    epsilon: float = DEFAULT_EPSILON,
) -> MdiResult:
    """Brute-force recomputation used to verify the indexed path.

    Scans the full edge list and the full node table with no adjacency
    structure; must agree exactly with :func:`mdi_sweep`.
    """
    reason = ineligibility_reason(graph, focal_id)
    if reason is not None:
        return MdiResult(focal_id, window_days, 0, 0, 0, None, False, reason)

    edges = list(graph.edges())
    parents = {parent for child, parent, _ in edges if child == focal_id}

    from_focal = set()
    from_parents = set()
    for child, parent, _ in edges:
        if parent == focal_id:
            from_focal.add(child)
        if parent in parents:
            from_parents.add(child)

    focal_created = graph.created_at(focal_id)
    lo = focal_created
    hi = focal_created + window_days * SECONDS_PER_DAY
    in_window = set()
    for model_id, info in graph.nodes.items():
        if model_id == focal_id or info.created_at is None:
            continue
        if lo < info.created_at <= hi:
            in_window.add(model_id)

    from_focal &= in_window
    from_parents &= in_window
    x = len(from_focal - from_parents)
    y = len(from_focal & from_parents)
    z = len(from_parents - from_focal)
    return MdiResult(
        focal_id=focal_id,
        window_days=window_days,
        x_count=x,
        y_count=y,
        z_count=z,
        mdi=compute_mdi(x, y, z, epsilon),
        eligible=True,
    )


def write_mdi_csv(results: Iterable[MdiResult], path) -> None:
    """Write the sweep table: focal_id, window_days, x, y, z, mdi,
    eligible, reason. Row order follows the input (already sorted by the
    sweep), so bytes are stable."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["focal_id", "window_days", "x", "y", "z", "mdi", "eligible", "reason"]
        )
        for r in results:
            writer.writerow(
                [
                    r.focal_id,
                    r.window_days,
                    r.x_count,
                    r.y_count,
                    r.z_count,
                    "" if r.mdi is None else repr(r.mdi),
                    str(r.eligible).lower(),
                    r.ineligibility_reason or "",
                ]
            )
