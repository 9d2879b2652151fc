"""Seeded synthetic lineage snapshots for testing and benchmarking.

The generator grows a lineage forest in creation-time order: each new
model is a root with small probability, otherwise it declares one parent
(two for merges) chosen uniformly or by preferential attachment over
current in-degrees. Preferential attachment yields the heavy-tailed
in-degree concentration seen in real hubs.
"""

from __future__ import annotations

import random

import numpy as np

from .ingest import PLATFORM_FLOOR, IngestStats, ModelRecord, Snapshot
from .lineage import ADAPTER, FINETUNE, MERGE, QUANTIZED

RELATION_WEIGHTS = ((FINETUNE, 0.45), (ADAPTER, 0.25), (QUANTIZED, 0.20), (MERGE, 0.10))
SIZE_TOKENS = ("", "", "350M", "0.5B", "1B", "3B", "7B", "14B", "70B")


def generate_snapshot(
    n_nodes: int,
    seed: int,
    attachment: str = "preferential",
    base_fraction: float = 0.05,
    mean_gap_hours: float = 6.0,
    start_ts: int = PLATFORM_FLOOR,
) -> Snapshot:
    """Generate a deterministic snapshot of ``n_nodes`` synthetic records.

    Every derived record declares its parents through typed lineage tags,
    so the snapshot exercises the same extraction path as real dumps.
    """
    if attachment not in ("preferential", "uniform"):
        raise ValueError(f"unknown attachment {attachment!r}")
    if n_nodes < 0:
        raise ValueError("n_nodes must be non-negative")
    rng = random.Random(seed)

    ids: list[str] = []
    index_of: dict[str, int] = {}
    in_degree: list[int] = []
    records: dict[str, ModelRecord] = {}
    relations = [rel for rel, _ in RELATION_WEIGHTS]
    weights = [w for _, w in RELATION_WEIGHTS]
    ts = start_ts

    for i in range(n_nodes):
        ts += max(60, int(rng.expovariate(1.0 / (mean_gap_hours * 3600.0))))
        size = rng.choice(SIZE_TOKENS)
        suffix = f"-{size}" if size else ""
        model_id = f"org{i % 23:02d}/model-{i:05d}{suffix}"

        tags: list[str] = []
        if ids and rng.random() > base_fraction:
            relation = rng.choices(relations, weights=weights, k=1)[0]
            n_parents = 2 if relation == MERGE and len(ids) >= 2 else 1
            parents = _pick_parents(rng, ids, in_degree, attachment, n_parents)
            for parent in parents:
                tags.append(f"base_model:{relation}:{parent}")
                in_degree[index_of[parent]] += 1

        records[model_id] = ModelRecord(
            model_id=model_id,
            created_at=ts,
            tags=tuple(tags),
            raw_field_count=3,
        )
        index_of[model_id] = len(ids)
        ids.append(model_id)
        in_degree.append(0)

    return Snapshot(
        records=records, retrieved_at=ts, source="offline_dump", stats=IngestStats()
    )


def _pick_parents(
    rng: random.Random,
    ids: list[str],
    in_degree: list[int],
    attachment: str,
    count: int,
) -> list[str]:
    if attachment == "uniform":
        return rng.sample(ids, min(count, len(ids)))
    weights = [d + 1 for d in in_degree]
    chosen: list[str] = []
    while len(chosen) < min(count, len(ids)):
        pick = rng.choices(ids, weights=weights, k=1)[0]
        if pick not in chosen:
            chosen.append(pick)
    return chosen


def sample_discrete_power_law(
    n: int, alpha: float, x_min: int, seed: int, x_max: int = 1_000_000
) -> np.ndarray:
    """Draw ``n`` integers from p(x) ~ x^-alpha on [x_min, x_max].

    Inverse-CDF sampling over the tabulated support; the truncation mass
    beyond ``x_max`` is negligible for alpha > 1.5.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if x_min < 1:
        raise ValueError("x_min must be at least 1")
    support = np.arange(x_min, x_max + 1, dtype=np.float64)
    pmf = support**-alpha
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    return (np.searchsorted(cdf, u, side="left") + x_min).astype(np.int64)
