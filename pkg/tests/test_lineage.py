from collections import Counter

import pytest

from lineage_mdi.ingest import ModelRecord, parse_timestamp, read_dump
from lineage_mdi.lineage import (
    build_graph,
    census,
    extract_links,
    load_graph,
    node_roles,
    write_graph,
)
from lineage_mdi.synth import generate_snapshot

from conftest import FIXTURES
from helpers import has_topological_order


def rec(model_id, created="2023-06-01T00:00:00Z", tags=(), **kwargs):
    return ModelRecord(
        model_id=model_id,
        created_at=parse_timestamp(created),
        tags=tuple(tags),
        **kwargs,
    )


class TestExtractLinks:
    def test_typed_tag(self):
        links = extract_links(rec("a/b", tags=["base_model:finetune:Qwen/Qwen2.5-7B"]))
        assert len(links) == 1
        assert links[0].parent_id == "Qwen/Qwen2.5-7B"
        assert links[0].relation == "finetune"
        assert links[0].source == "tag"

    def test_peft_fallback_is_adapter(self):
        links = extract_links(rec("a/b", peft_base="org/base"))
        assert links == [links[0]]
        assert (links[0].relation, links[0].source) == ("adapter", "peft_config")

    def test_tag_phase_shadows_card(self):
        links = extract_links(
            rec("a/b", tags=["base_model:finetune:A"], card_base_model=("B",))
        )
        assert [l.parent_id for l in links] == ["A"]

    def test_no_information(self):
        assert extract_links(rec("a/b")) == []

    def test_bare_tag_unspecified(self):
        links = extract_links(rec("a/b", tags=["base_model:C"]))
        assert (links[0].relation, links[0].parent_id) == ("unspecified", "C")

    def test_card_data_last_phase(self):
        links = extract_links(rec("a/b", card_data_base_model=("D",)))
        assert (links[0].relation, links[0].source) == (
            "unspecified",
            "card_data_base_model",
        )

    def test_card_base_shadows_card_data(self):
        links = extract_links(
            rec("a/b", card_base_model=("E",), card_data_base_model=("F",))
        )
        assert [l.parent_id for l in links] == ["E"]
        assert links[0].source == "card_base_model"

    def test_malformed_tags_counted(self):
        counters = Counter()
        links = extract_links(
            rec("a/b", tags=["base_model:weird:shape:extra", "base_model:finetune"]),
            counters,
        )
        assert links == []
        assert counters["malformed_tags"] == 2

    def test_pure_function(self):
        record = rec("a/b", tags=["base_model:adapter:X"])
        assert extract_links(record) == extract_links(record)


class TestBuildGraph:
    def test_worked_lineage(self, qwen_graph):
        edges = set(qwen_graph.edges())
        assert edges == {
            ("Qwen/Qwen2.5-7B-Instruct", "Qwen/Qwen2.5-7B", "finetune"),
            ("bartowski/Qwen2.5-7B-Instruct-GGUF", "Qwen/Qwen2.5-7B-Instruct", "quantized"),
            ("nvidia/Eagle2.5-8B", "Qwen/Qwen2.5-7B-Instruct", "merge"),
            ("nvidia/Eagle2.5-8B", "google/siglip2-so400m-patch16-512", "merge"),
        }
        assert qwen_graph.out_degree("nvidia/Eagle2.5-8B") >= 2
        stub = qwen_graph.node("google/siglip2-so400m-patch16-512")
        assert stub.is_stub and stub.created_at is None

    def test_two_cycle_broken_keeping_later_edge(self):
        records = [
            rec("cyc/a", "2023-01-01T00:00:00Z", ["base_model:finetune:cyc/b"]),
            rec("cyc/b", "2023-02-01T00:00:00Z", ["base_model:finetune:cyc/a"]),
        ]
        graph, report = build_graph(records)
        assert report.cycle_break == 1
        assert set(graph.edges()) == {("cyc/b", "cyc/a", "finetune")}
        assert has_topological_order(graph)

    def test_tagless_snapshot_all_base(self):
        graph, _ = build_graph([rec("a/x"), rec("a/y")])
        assert graph.n_edges == 0
        assert all(info.roles == {"base"} for info in graph.nodes.values())

    def test_empty_snapshot_warns(self, caplog):
        with caplog.at_level("WARNING"):
            graph, report = build_graph([])
        assert len(graph) == 0 and report.raw_links == 0
        assert any("empty" in r.message for r in caplog.records)

    def test_adversarial_reconciliation(self):
        snapshot = read_dump(FIXTURES / "adversarial.jsonl")
        graph, report = build_graph(snapshot)
        assert report.raw_links == 11
        assert report.malformed_tags == 3
        assert report.empty_parent == 3
        assert report.self_loop == 1
        assert report.unspecified == 2
        assert report.duplicate_pair == 1
        assert report.relation_conflicts == 1
        assert report.cycle_break == 1
        assert report.stub_parents == 1
        assert report.nodes_with_only_unspecified_links == 2
        assert report.final_edges == report.raw_links - report.dropped_total()
        assert report.final_edges == graph.n_edges == 3
        assert has_topological_order(graph)

    def test_duplicate_pair_keeps_first_tag_relation(self):
        records = [
            rec("d/child", tags=["base_model:finetune:d/p", "base_model:quantized:d/p"])
        ]
        graph, report = build_graph(records)
        assert set(graph.edges()) == {("d/child", "d/p", "finetune")}
        assert report.duplicate_pair == 1 and report.relation_conflicts == 1

    def test_unspecified_only_child_becomes_base(self):
        graph, report = build_graph([rec("u/child", tags=["base_model:u/parent"])])
        assert node_roles(graph, "u/child") == {"base"}
        assert report.nodes_with_only_unspecified_links == 1
        assert "u/parent" not in graph

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_random_snapshots_acyclic_and_reconciled(self, seed):
        snapshot = generate_snapshot(300, seed=seed)
        graph, report = build_graph(snapshot)
        assert has_topological_order(graph)
        assert report.final_edges == report.raw_links - report.dropped_total()
        for model_id, info in graph.nodes.items():
            if graph.out_degree(model_id) > 0:
                assert info.roles and "base" not in info.roles
            else:
                assert info.roles == {"base"}


class TestRoles:
    def test_base(self, qwen_graph):
        assert node_roles(qwen_graph, "Qwen/Qwen2.5-7B") == {"base"}

    def test_finetuned(self, qwen_graph):
        assert node_roles(qwen_graph, "Qwen/Qwen2.5-7B-Instruct") == {"finetuned"}

    def test_merged(self, qwen_graph):
        assert node_roles(qwen_graph, "nvidia/Eagle2.5-8B") == {"merged"}

    def test_unknown_id(self, qwen_graph):
        with pytest.raises(KeyError):
            node_roles(qwen_graph, "nobody/nothing")


class TestCensus:
    def test_worked_lineage_hand_count(self, qwen_graph):
        result = census(qwen_graph)
        assert result.node_count == 5
        assert result.edge_count == 4
        assert result.mean_degree == pytest.approx(8 / 5)
        assert result.role_counts == {
            "base": 2,  # root model + the stub parent
            "finetuned": 1,
            "quantized": 1,
            "merged": 1,
        }

    def test_empty(self):
        graph, _ = build_graph([])
        result = census(graph)
        assert result.node_count == result.edge_count == 0
        assert result.mean_degree == 0.0

    def test_chain_of_three(self):
        records = [
            rec("c/a", "2023-01-01T00:00:00Z"),
            rec("c/b", "2023-02-01T00:00:00Z", ["base_model:finetune:c/a"]),
            rec("c/c", "2023-03-01T00:00:00Z", ["base_model:finetune:c/b"]),
        ]
        graph, _ = build_graph(records)
        result = census(graph)
        assert result.role_counts == {"base": 1, "finetuned": 2}
        assert result.mean_degree == pytest.approx(4 / 3)


def test_export_load_round_trip(tmp_path, worked_graph):
    edges_path = tmp_path / "edges.tsv"
    nodes_path = tmp_path / "nodes.tsv"
    write_graph(worked_graph, edges_path, nodes_path)
    loaded = load_graph(edges_path, nodes_path)

    assert set(loaded.nodes) == set(worked_graph.nodes)
    assert set(loaded.edges()) == set(worked_graph.edges())
    for model_id in worked_graph.nodes:
        a, b = worked_graph.node(model_id), loaded.node(model_id)
        assert (a.created_at, a.param_scale, a.roles) == (b.created_at, b.param_scale, b.roles)

    # stable bytes on rewrite
    edges2 = tmp_path / "edges2.tsv"
    nodes2 = tmp_path / "nodes2.tsv"
    write_graph(loaded, edges2, nodes2)
    assert edges_path.read_bytes() == edges2.read_bytes()
    assert nodes_path.read_bytes() == nodes2.read_bytes()
