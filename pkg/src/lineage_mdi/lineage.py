"""Typed parent-link extraction and lineage DAG assembly.

Links are pulled from each record by a phased scan: lineage tags first,
then fallback metadata fields, stopping at the first phase that yields
anything. Cleaning removes empty parents, self-loops, untyped links and
duplicate (child, parent) pairs, then breaks any directed cycles so the
finished graph is always a DAG. Every drop is counted by reason in a
:class:`CleaningReport` that reconciles exactly against the final edge
count.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .ingest import ModelRecord, Snapshot, format_timestamp, parse_timestamp
from .scales import extract_param_scale

logger = logging.getLogger(__name__)

FINETUNE = "finetune"
ADAPTER = "adapter"
QUANTIZED = "quantized"
MERGE = "merge"
UNSPECIFIED = "unspecified"

RELATION_TYPES = (FINETUNE, ADAPTER, QUANTIZED, MERGE)

# relation type of an outgoing edge -> role it confers on the child node
ROLE_FOR_RELATION = {
    FINETUNE: "finetuned",
    ADAPTER: "adapter",
    QUANTIZED: "quantized",
    MERGE: "merged",
}
BASE_ROLE = "base"

SOURCE_TAG = "tag"
SOURCE_PEFT = "peft_config"
SOURCE_CARD_BASE = "card_base_model"
SOURCE_CARD_DATA = "card_data_base_model"

_TAG_PREFIX = "base_model:"


@dataclass(frozen=True)
class ParentLink:
    """A candidate child -> parent derivation edge with its provenance."""

    child_id: str
    parent_id: str
    relation: str
    source: str


def _parse_lineage_tag(tag: str) -> Optional[tuple[str, str]]:
    """Parse one ``base_model:*`` tag into (relation, parent_id).

    Accepted shapes: ``base_model:<relation>:<parent>`` for the four known
    relation types, and the bare ``base_model:<parent>`` which yields an
    unspecified relation. Returns None for any other shape (malformed).
    A well-shaped tag with an empty parent value is NOT malformed; it
    produces an empty-parent link that cleaning removes and counts.
    """
    rest = tag[len(_TAG_PREFIX):]
    head, sep, tail = rest.partition(":")
    if head in RELATION_TYPES:
        return (head, tail) if sep else None
    if sep:  # unknown relation keyword or extra-colon shape
        return None
    return (UNSPECIFIED, rest)


def extract_links(
    record: ModelRecord, counters: Optional[Counter] = None
) -> list[ParentLink]:
    """Extract parent links from one record via the phased source scan.

    Phase 1 parses lineage tags; when it yields at least one link the
    fallback fields are not consulted. Otherwise the PEFT base-model config
    field (phase 2, relation adapter), the card base-model field (phase 3)
    and the nested card-data base-model field (phase 4) are tried in order,
    stopping at the first phase that yields links. Card-sourced links carry
    no relation type. Pure per record: same record, same links.

    Malformed ``base_model:*`` tags are ignored; when ``counters`` is given
    they are tallied under ``malformed_tags``.
    """
    child = record.model_id

    links = []
    for tag in record.tags:
        if not tag.startswith(_TAG_PREFIX):
            continue
        parsed = _parse_lineage_tag(tag)
        if parsed is None:
            if counters is not None:
                counters["malformed_tags"] += 1
            continue
        relation, parent = parsed
        links.append(ParentLink(child, parent, relation, SOURCE_TAG))
    if links:
        return links

    if record.peft_base is not None:
        return [ParentLink(child, record.peft_base, ADAPTER, SOURCE_PEFT)]

    if record.card_base_model:
        return [
            ParentLink(child, parent, UNSPECIFIED, SOURCE_CARD_BASE)
            for parent in record.card_base_model
        ]

    if record.card_data_base_model:
        return [
            ParentLink(child, parent, UNSPECIFIED, SOURCE_CARD_DATA)
            for parent in record.card_data_base_model
        ]

    return []


@dataclass(frozen=True)
class NodeInfo:
    created_at: Optional[int]
    param_scale: Optional[int]
    roles: frozenset
    is_stub: bool = False


class LineageGraph:
    """Immutable cleaned lineage DAG.

    Edges point child -> parent. In-degree of a node is therefore the
    number of models deriving from it; out-degree is its number of parents.
    Construct via :func:`build_graph` or :func:`load_graph`; instances are
    treated as frozen after construction.
    """

    def __init__(
        self,
        nodes: dict[str, NodeInfo],
        out_edges: dict[str, tuple[tuple[str, str], ...]],
        in_edges: dict[str, tuple[tuple[str, str], ...]],
    ):
        self._nodes = nodes
        self._out = out_edges
        self._in = in_edges
        self._n_edges = sum(len(v) for v in out_edges.values())

    # -- node access ------------------------------------------------------

    @property
    def nodes(self) -> dict[str, NodeInfo]:
        return self._nodes

    def __contains__(self, model_id: str) -> bool:
        return model_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, model_id: str) -> NodeInfo:
        return self._nodes[model_id]

    def created_at(self, model_id: str) -> Optional[int]:
        return self._nodes[model_id].created_at

    # -- edge access ------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def edges(self):
        """Iterate (child_id, parent_id, relation) triples."""
        for child, adj in self._out.items():
            for parent, relation in adj:
                yield child, parent, relation

    def out_edges(self, model_id: str) -> tuple[tuple[str, str], ...]:
        return self._out.get(model_id, ())

    def in_edges(self, model_id: str) -> tuple[tuple[str, str], ...]:
        return self._in.get(model_id, ())

    def parents(self, model_id: str) -> tuple[str, ...]:
        return tuple(p for p, _ in self._out.get(model_id, ()))

    def children(self, model_id: str) -> tuple[str, ...]:
        return tuple(c for c, _ in self._in.get(model_id, ()))

    def out_degree(self, model_id: str) -> int:
        return len(self._out.get(model_id, ()))

    def in_degree(self, model_id: str, relation: Optional[str] = None) -> int:
        if relation is None:
            return len(self._in.get(model_id, ()))
        return sum(1 for _, rel in self._in.get(model_id, ()) if rel == relation)


@dataclass
class CleaningReport:
    """Per-reason drop accounting for one build.

    Invariant: ``final_edges == raw_links - empty_parent - self_loop -
    unspecified - duplicate_pair - cycle_break``.
    """

    raw_links: int = 0
    malformed_tags: int = 0
    empty_parent: int = 0
    self_loop: int = 0
    unspecified: int = 0
    duplicate_pair: int = 0
    cycle_break: int = 0
    relation_conflicts: int = 0
    unspecified_by_source: Counter = field(default_factory=Counter)
    nodes_with_only_unspecified_links: int = 0
    stub_parents: int = 0
    cycles_broken: int = 0
    final_nodes: int = 0
    final_edges: int = 0

    def dropped_total(self) -> int:
        return (
            self.empty_parent
            + self.self_loop
            + self.unspecified
            + self.duplicate_pair
            + self.cycle_break
        )

    def to_json(self) -> dict:
        return {
            "raw_links": self.raw_links,
            "malformed_tags": self.malformed_tags,
            "drops": {
                "empty_parent": self.empty_parent,
                "self_loop": self.self_loop,
                "unspecified": self.unspecified,
                "duplicate_pair": self.duplicate_pair,
                "cycle_break": self.cycle_break,
            },
            "relation_conflicts": self.relation_conflicts,
            "unspecified_by_source": dict(sorted(self.unspecified_by_source.items())),
            "nodes_with_only_unspecified_links": self.nodes_with_only_unspecified_links,
            "stub_parents": self.stub_parents,
            "cycles_broken": self.cycles_broken,
            "final_nodes": self.final_nodes,
            "final_edges": self.final_edges,
        }


_SOURCE_PRIORITY = {
    SOURCE_TAG: 0,
    SOURCE_PEFT: 1,
    SOURCE_CARD_BASE: 2,
    SOURCE_CARD_DATA: 3,
}


def _find_cycle(adj: dict[str, dict[str, str]], core: set) -> list[str]:
    """Return one directed cycle (as a node list) inside the cyclic core."""
    start = min(core)
    path = [start]
    index = {start: 0}
    node = start
    while True:
        node = min(p for p in adj[node] if p in core)
        if node in index:
            return path[index[node]:]
        index[node] = len(path)
        path.append(node)


def _break_cycles(
    adj: dict[str, dict[str, str]],
    created: dict[str, Optional[int]],
    report: CleaningReport,
) -> None:
    """Remove one edge per directed cycle until the graph is acyclic.

    The removed edge is the in-cycle edge whose child is oldest (ties by
    child then parent id), which keeps "later derives from earlier" edges.
    """
    while True:
        out_count = {child: len(parents) for child, parents in adj.items()}
        ready = [n for n, c in out_count.items() if c == 0]
        incoming: dict[str, list[str]] = {}
        for child, parents in adj.items():
            for parent in parents:
                incoming.setdefault(parent, []).append(child)
        seen = 0
        while ready:
            node = ready.pop()
            seen += 1
            for child in incoming.get(node, ()):
                out_count[child] -= 1
                if out_count[child] == 0:
                    ready.append(child)
        core = {n for n, c in out_count.items() if c > 0}
        if not core:
            return

        cycle = _find_cycle(adj, core)
        pairs = [
            (cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))
        ]

        def age_key(pair):
            ts = created.get(pair[0])
            return (ts is None, ts if ts is not None else 0, pair[0], pair[1])

        child, parent = min(pairs, key=age_key)
        del adj[child][parent]
        report.cycle_break += 1
        report.cycles_broken += 1
        logger.warning("broke cycle of length %d at edge %s -> %s", len(cycle), child, parent)


def build_graph(
    snapshot: Snapshot | Iterable[ModelRecord],
) -> tuple[LineageGraph, CleaningReport]:
    """Assemble the cleaned lineage DAG from a snapshot.

    Cleaning order: empty parent ids, self-loops, unspecified relations,
    duplicate (child, parent) pairs (first link from the highest-priority
    source wins), then cycle breaks. Parents referenced but absent from the
    snapshot are materialized as stub nodes with unknown creation time.
    """
    records = list(snapshot.records.values()) if isinstance(snapshot, Snapshot) else list(snapshot)
    report = CleaningReport()
    if not records:
        logger.warning("building graph from an empty snapshot")
        return LineageGraph({}, {}, {}), report

    counters: Counter = Counter()
    links: list[ParentLink] = []
    for record in records:
        links.extend(extract_links(record, counters))
    report.raw_links = len(links)
    report.malformed_tags = counters["malformed_tags"]

    unspecified_children = set()
    cleaned: list[ParentLink] = []
    for link in links:
        parent = link.parent_id.strip()
        if not parent:
            report.empty_parent += 1
        elif parent == link.child_id:
            report.self_loop += 1
        elif link.relation == UNSPECIFIED:
            report.unspecified += 1
            report.unspecified_by_source[link.source] += 1
            unspecified_children.add(link.child_id)
        else:
            cleaned.append(ParentLink(link.child_id, parent, link.relation, link.source))

    # Deduplicate ordered (child, parent) pairs; the surviving relation is
    # the first link from the highest-priority source.
    best: dict[tuple[str, str], ParentLink] = {}
    for link in cleaned:
        key = (link.child_id, link.parent_id)
        kept = best.get(key)
        if kept is None:
            best[key] = link
            continue
        report.duplicate_pair += 1
        if _SOURCE_PRIORITY[link.source] < _SOURCE_PRIORITY[kept.source]:
            best[key], link = link, kept
        if link.relation != best[key].relation:
            report.relation_conflicts += 1

    created: dict[str, Optional[int]] = {r.model_id: r.created_at for r in records}
    adj: dict[str, dict[str, str]] = {r.model_id: {} for r in records}
    for (child, parent), link in best.items():
        adj.setdefault(child, {})[parent] = link.relation
        if parent not in created:
            created[parent] = None
            adj.setdefault(parent, {})
            report.stub_parents += 1

    _break_cycles(adj, created, report)

    nodes: dict[str, NodeInfo] = {}
    in_edges: dict[str, list[tuple[str, str]]] = {n: [] for n in adj}
    out_edges: dict[str, tuple[tuple[str, str], ...]] = {}
    for child in sorted(adj):
        out = tuple(sorted(adj[child].items()))
        out_edges[child] = out
        for parent, relation in out:
            in_edges[parent].append((child, relation))

    known_ids = {r.model_id for r in records}
    for model_id in sorted(adj):
        out = out_edges[model_id]
        roles = (
            frozenset(ROLE_FOR_RELATION[rel] for _, rel in out)
            if out
            else frozenset([BASE_ROLE])
        )
        nodes[model_id] = NodeInfo(
            created_at=created[model_id],
            param_scale=extract_param_scale(model_id).raw,
            roles=roles,
            is_stub=model_id not in known_ids,
        )

    report.nodes_with_only_unspecified_links = sum(
        1 for child in unspecified_children if not out_edges.get(child)
    )
    report.final_nodes = len(nodes)
    report.final_edges = sum(len(v) for v in out_edges.values())
    assert report.final_edges == report.raw_links - report.dropped_total()

    graph = LineageGraph(
        nodes,
        out_edges,
        {n: tuple(sorted(v)) for n, v in in_edges.items()},
    )
    return graph, report


def node_roles(graph: LineageGraph, model_id: str) -> frozenset:
    """Roles of one node: base iff it has no parents, else one derived role
    per distinct outgoing relation type."""
    return graph.node(model_id).roles


@dataclass(frozen=True)
class CensusReport:
    node_count: int
    edge_count: int
    mean_degree: float
    role_counts: dict[str, int]

    def to_json(self) -> dict:
        return {
            "nodes": self.node_count,
            "edges": self.edge_count,
            "mean_degree": self.mean_degree,
            "roles": dict(sorted(self.role_counts.items())),
        }


def census(graph: LineageGraph) -> CensusReport:
    """Node/edge totals and per-role counts (multi-role nodes count once
    per role). Mean degree is 2|E|/|V|."""
    role_counts: Counter = Counter()
    for info in graph.nodes.values():
        role_counts.update(info.roles)
    n = len(graph)
    return CensusReport(
        node_count=n,
        edge_count=graph.n_edges,
        mean_degree=(2.0 * graph.n_edges / n) if n else 0.0,
        role_counts=dict(role_counts),
    )


# -- file interchange -------------------------------------------------------


def write_graph(graph: LineageGraph, edges_path, nodes_path) -> None:
    """Write the edge list and node metadata tables, lexicographically
    sorted so output bytes are stable across runs."""
    edge_lines = sorted(
        f"{child}\t{parent}\t{relation}\n" for child, parent, relation in graph.edges()
    )
    with open(edges_path, "w", encoding="utf-8") as fh:
        fh.writelines(edge_lines)

    with open(nodes_path, "w", encoding="utf-8") as fh:
        for model_id in sorted(graph.nodes):
            info = graph.node(model_id)
            created = format_timestamp(info.created_at) if info.created_at is not None else ""
            scale = str(info.param_scale) if info.param_scale is not None else ""
            roles = ",".join(sorted(info.roles))
            fh.write(f"{model_id}\t{created}\t{scale}\t{roles}\n")


def load_graph(edges_path, nodes_path) -> LineageGraph:
    """Rebuild a LineageGraph from files written by :func:`write_graph`."""
    adj: dict[str, dict[str, str]] = {}
    with open(edges_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            child, parent, relation = line.split("\t")
            if relation not in RELATION_TYPES:
                raise ValueError(f"unknown relation {relation!r} in edge file")
            adj.setdefault(child, {})[parent] = relation

    nodes: dict[str, NodeInfo] = {}
    out_edges: dict[str, tuple[tuple[str, str], ...]] = {}
    in_edges: dict[str, list[tuple[str, str]]] = {}
    with open(nodes_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            model_id, created, scale, roles = line.split("\t")
            nodes[model_id] = NodeInfo(
                created_at=parse_timestamp(created) if created else None,
                param_scale=int(scale) if scale else None,
                roles=frozenset(roles.split(",")) if roles else frozenset(),
                is_stub=not created,
            )
            out_edges[model_id] = tuple(sorted(adj.get(model_id, {}).items()))
            in_edges[model_id] = []
    for child, parents in adj.items():
        for parent, relation in parents.items():
            in_edges[parent].append((child, relation))
    return LineageGraph(
        nodes, out_edges, {n: tuple(sorted(v)) for n, v in in_edges.items()}
    )


def write_cleaning_report(report: CleaningReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
