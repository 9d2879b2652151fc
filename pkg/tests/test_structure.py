import pytest

from lineage_mdi.ingest import ModelRecord, parse_timestamp
from lineage_mdi.lineage import build_graph
from lineage_mdi.structure import (
    DEGREE_SCOPES,
    InsufficientTailError,
    component_partition,
    fit_power_law,
    in_degrees,
    weakly_connected_components,
)
from lineage_mdi.synth import generate_snapshot, sample_discrete_power_law

from helpers import bfs_component_partition


def rec(model_id, created="2023-06-01T00:00:00Z", tags=()):
    return ModelRecord(
        model_id=model_id, created_at=parse_timestamp(created), tags=tuple(tags)
    )


def star_graph(n_children=7):
    records = [rec("star/hub")]
    records += [
        rec(f"star/leaf-{i}", tags=[f"base_model:finetune:star/hub"])
        for i in range(n_children)
    ]
    graph, _ = build_graph(records)
    return graph


class TestInDegrees:
    def test_star(self):
        graph = star_graph(7)
        dist = in_degrees(graph)
        assert dist.histogram == {7: 1, 0: 7}

    def test_scoped_hand_count(self, qwen_graph):
        quantized = in_degrees(qwen_graph, "quantized")
        # only the instruct model has a quantized derivative
        assert quantized.histogram[1] == 1
        assert quantized.histogram[0] == 4
        merge = in_degrees(qwen_graph, "merge")
        assert merge.histogram[1] == 2

    def test_empty_graph(self):
        graph, _ = build_graph([])
        assert in_degrees(graph).histogram == {}

    def test_sum_identities(self, random_graph_factory):
        graph = random_graph_factory(n_nodes=400, seed=11)
        overall = in_degrees(graph)
        assert overall.n_nodes == len(graph)
        assert sum(d * c for d, c in overall.histogram.items()) == graph.n_edges

        scoped_edge_sum = 0
        for scope in DEGREE_SCOPES[1:]:
            dist = in_degrees(graph, scope)
            assert dist.n_nodes == len(graph)
            scoped_edge_sum += sum(d * c for d, c in dist.histogram.items())
        assert scoped_edge_sum == graph.n_edges

    def test_unknown_scope(self, qwen_graph):
        with pytest.raises(ValueError):
            in_degrees(qwen_graph, "sideways")


class TestPowerLawFit:
    def test_recovery(self):
        samples = sample_discrete_power_law(5000, alpha=2.5, x_min=3, seed=101)
        fit = fit_power_law(samples)
        assert 2.35 <= fit.alpha <= 2.65
        assert 2 <= fit.x_min <= 4
        assert fit.ks_distance < 0.05

    def test_degenerate_single_value_rejected(self):
        with pytest.raises((InsufficientTailError, ValueError)):
            fit_power_law([5] * 100)

    def test_insufficient_observations(self):
        with pytest.raises(InsufficientTailError):
            fit_power_law([1, 2, 3])

    def test_zero_degrees_excluded(self):
        samples = list(sample_discrete_power_law(2000, alpha=2.2, x_min=1, seed=5))
        with_zeros = samples + [0] * 500
        assert fit_power_law(with_zeros).n_tail == fit_power_law(samples).n_tail

    def test_self_consistency_within_two_se(self):
        samples = sample_discrete_power_law(10000, alpha=2.5, x_min=3, seed=42)
        first = fit_power_law(samples)
        regenerated = sample_discrete_power_law(
            first.n_tail, alpha=first.alpha, x_min=first.x_min, seed=99
        )
        second = fit_power_law(regenerated)
        assert abs(second.alpha - first.alpha) <= 2 * first.standard_error()

    def test_explicit_range_respected(self):
        samples = sample_discrete_power_law(5000, alpha=2.5, x_min=3, seed=101)
        fit = fit_power_law(samples, x_min_range=(5, 20))
        assert 5 <= fit.x_min <= 20


class TestWcc:
    def test_chain_plus_isolated(self):
        records = [
            rec("w/a"),
            rec("w/b", tags=["base_model:finetune:w/a"]),
            rec("w/c", tags=["base_model:finetune:w/b"]),
            rec("w/island"),
        ]
        graph, _ = build_graph(records)
        summary = weakly_connected_components(graph)
        assert summary.component_count == 2
        assert summary.component_sizes == (3, 1)

    def test_worked_lineage_connected(self, qwen_graph):
        assert weakly_connected_components(qwen_graph).component_count == 1

    def test_two_stars(self):
        records = [rec("s1/hub"), rec("s2/hub")]
        records += [
            rec(f"s1/leaf-{i}", tags=["base_model:adapter:s1/hub"]) for i in range(3)
        ]
        records += [
            rec(f"s2/leaf-{i}", tags=["base_model:adapter:s2/hub"]) for i in range(5)
        ]
        graph, _ = build_graph(records)
        summary = weakly_connected_components(graph)
        assert summary.component_sizes == (6, 4)
        assert summary.largest_share == pytest.approx(0.6)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_bfs_oracle(self, seed, random_graph_factory):
        graph = random_graph_factory(n_nodes=250, seed=seed, attachment="uniform")
        assert component_partition(graph) == bfs_component_partition(graph)

    def test_empty(self):
        graph, _ = build_graph([])
        summary = weakly_connected_components(graph)
        assert summary.component_count == 0
        assert summary.largest_share == 0.0


def test_synth_preferential_concentration():
    snapshot = generate_snapshot(1000, seed=13, attachment="preferential")
    graph, _ = build_graph(snapshot)
    degrees = sorted((graph.in_degree(m) for m in graph.nodes), reverse=True)
    top = degrees[: max(1, len(degrees) // 100)]
    assert sum(top) > 0.2 * graph.n_edges
