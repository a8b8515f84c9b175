"""Hypergraph construction, validation, energies, and the clique expansion."""

import numpy as np
import pytest

from hsparse import (
    DuplicateVertexError,
    Hyperedge,
    Hypergraph,
    NonpositiveWeightError,
    SingletonEdgeError,
    VertexOutOfRangeError,
    clique_expansion,
    edge_energy,
    edge_energy_matrix,
    energy_batch,
    random_hypergraph,
    total_energy,
    validate,
)
from hsparse.hypergraph import component_labels


def _hg(n, edges):
    return Hypergraph(n=n, edges=tuple(Hyperedge(tuple(sorted(v)), w) for v, w in edges))


class TestValidate:
    def test_valid(self):
        hg = validate({"n": 3, "edges": [{"v": [0, 1, 2], "w": 1.0}]})
        assert hg.n == 3
        assert hg.edges[0].vertices == (0, 1, 2)
        assert hg.rank == 3

    def test_tuple_entries(self):
        hg = validate({"n": 3, "edges": [({0, 1}, 2.5)]})
        assert hg.edges[0].weight == 2.5

    def test_singleton_rejected(self):
        with pytest.raises(SingletonEdgeError):
            validate({"n": 3, "edges": [({0}, 1.0)]})

    @pytest.mark.parametrize("w", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_weight_rejected(self, w):
        with pytest.raises(NonpositiveWeightError):
            validate({"n": 3, "edges": [({0, 1}, w)]})

    def test_vertex_out_of_range(self):
        with pytest.raises(VertexOutOfRangeError):
            validate({"n": 3, "edges": [({0, 3}, 1.0)]})
        with pytest.raises(VertexOutOfRangeError):
            validate({"n": 3, "edges": [({-1, 1}, 1.0)]})

    def test_duplicate_vertex(self):
        with pytest.raises(DuplicateVertexError):
            validate({"n": 3, "edges": [([0, 1, 1], 1.0)]})

    def test_duplicate_edges_kept_distinct(self):
        hg = validate({"n": 3, "edges": [({0, 1}, 1.0), ({0, 1}, 2.0)]})
        assert hg.num_edges == 2


class TestEnergy:
    def test_single_pair(self):
        assert edge_energy(Hyperedge((0, 1), 1.0), [0.0, 1.0, 5.0]) == 1.0

    def test_max_over_pairs(self):
        # pairs give gaps 1, 3, 2 -> max squared gap 9
        assert edge_energy(Hyperedge((0, 1, 2), 1.0), [0.0, 1.0, 3.0]) == 9.0

    def test_constant_kernel(self):
        assert edge_energy(Hyperedge((0, 1, 2), 1.0), [4.0, 4.0, 4.0]) == 0.0

    def test_path_total(self):
        hg = _hg(3, [((0, 1), 1.0), ((1, 2), 1.0)])
        assert total_energy(hg, [0.0, 1.0, 2.0]) == 2.0
        assert total_energy(hg, [5.0, 6.0, 7.0]) == 2.0

    def test_weighted_edge(self):
        hg = _hg(3, [((0, 1, 2), 2.0)])
        assert total_energy(hg, [0.0, 1.0, 3.0]) == 18.0

    def test_dimension_mismatch(self):
        hg = _hg(3, [((0, 1), 1.0)])
        with pytest.raises(ValueError):
            total_energy(hg, [0.0, 1.0])

    def test_translation_invariance(self):
        rng = np.random.default_rng(0)
        for seed in range(5):
            hg = random_hypergraph(12, 20, 5, (0.5, 2.0), seed=seed)
            x = rng.standard_normal(12)
            base = total_energy(hg, x)
            for alpha in (-3.0, 0.25, 100.0):
                assert total_energy(hg, x + alpha) == pytest.approx(base, rel=1e-12)

    def test_weight_scaling(self):
        hg = random_hypergraph(10, 15, 4, (0.5, 2.0), seed=3)
        scaled = Hypergraph(
            hg.n, tuple(Hyperedge(e.vertices, 3.0 * e.weight) for e in hg.edges)
        )
        x = np.random.default_rng(1).standard_normal(10)
        assert total_energy(scaled, x) == pytest.approx(3.0 * total_energy(hg, x), rel=1e-13)

    def test_nonnegative_and_zero_iff_componentwise_constant(self):
        hg = _hg(5, [((0, 1), 1.0), ((1, 2), 2.0), ((3, 4), 1.0)])
        labels = component_labels(5, hg.expansion.pairs)
        rng = np.random.default_rng(7)
        x = rng.standard_normal(5)
        assert total_energy(hg, x) > 0
        # constant per component -> exactly zero
        x_const = labels.astype(float) * 7.5
        assert total_energy(hg, x_const) == 0.0


class TestCliqueExpansion:
    def test_triangle(self):
        exp = clique_expansion(_hg(3, [((0, 1, 2), 1.0)]))
        assert exp.pairs.tolist() == [[0, 1], [0, 2], [1, 2]]

    def test_path(self):
        exp = clique_expansion(_hg(3, [((0, 1), 1.0), ((1, 2), 1.0)]))
        assert exp.pairs.tolist() == [[0, 1], [1, 2]]

    def test_dedup_with_backlinks(self):
        exp = clique_expansion(_hg(3, [((0, 1, 2), 1.0), ((0, 1), 1.0)]))
        assert len(exp) == 3
        assert exp.edges_of_pair[exp.position(0, 1)].tolist() == [0, 1]
        assert exp.edges_of_pair[exp.position(0, 2)].tolist() == [0]

    def test_size_bound_and_membership(self):
        for seed in range(5):
            hg = random_hypergraph(14, 25, 6, (1.0, 1.0), seed=seed)
            exp = hg.expansion
            bound = sum(e.cardinality * (e.cardinality - 1) // 2 for e in hg.edges)
            assert len(exp) <= bound
            for p, (i, j) in enumerate(exp.pairs.tolist()):
                owners = exp.edges_of_pair[p]
                assert len(owners) >= 1
                for t in owners.tolist():
                    assert {i, j} <= set(hg.edges[t].vertices)


class TestRandomHypergraph:
    def test_deterministic(self):
        a = random_hypergraph(8, 10, 4, (1.0, 1.0), seed=7)
        b = random_hypergraph(8, 10, 4, (1.0, 1.0), seed=7)
        assert a == b

    def test_cardinalities_in_range(self):
        hg = random_hypergraph(8, 10, 4, (1.0, 1.0), seed=7)
        assert all(2 <= e.cardinality <= 4 for e in hg.edges)

    def test_connected_expansion(self):
        # independent union-find oracle
        hg = random_hypergraph(64, 200, 16, (0.5, 2.0), seed=1)
        parent = list(range(64))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in hg.edges:
            base = e.vertices[0]
            for v in e.vertices[1:]:
                parent[find(v)] = find(base)
        assert len({find(v) for v in range(64)}) == 1

    def test_weights_in_range(self):
        hg = random_hypergraph(20, 40, 5, (0.5, 2.0), seed=5)
        assert all(0.5 <= e.weight <= 2.0 for e in hg.edges)

    def test_infeasible_parameters(self):
        with pytest.raises(ValueError):
            random_hypergraph(4, 10, 5, (1.0, 1.0), seed=0)
        with pytest.raises(ValueError):
            random_hypergraph(4, 0, 3, (1.0, 1.0), seed=0)
        with pytest.raises(ValueError):
            random_hypergraph(4, 3, 3, (0.0, 1.0), seed=0)


class TestBatchedEnergies:
    def test_matches_total_energy(self):
        hg = random_hypergraph(10, 18, 5, (0.5, 2.0), seed=11)
        X = np.random.default_rng(2).standard_normal((7, 10))
        batch = energy_batch(hg, X)
        for b in range(7):
            assert batch[b] == pytest.approx(total_energy(hg, X[b]), rel=1e-12)

    def test_weight_matrix_form(self):
        hg = random_hypergraph(9, 12, 4, (0.5, 2.0), seed=4)
        X = np.random.default_rng(3).standard_normal((5, 9))
        W = np.random.default_rng(4).uniform(0.1, 1.0, size=(hg.num_edges, 3))
        out = energy_batch(hg, X, weights=W)
        E = edge_energy_matrix(hg, X)
        assert np.allclose(out, E @ W, rtol=1e-12)
        assert np.allclose(E @ hg.weights, energy_batch(hg, X), rtol=1e-12)


def test_shared_arrays_are_read_only():
    hg = random_hypergraph(8, 12, 4, (0.5, 2.0), seed=6)
    with pytest.raises(ValueError):
        hg.weights[0] = 9.0
    with pytest.raises(ValueError):
        hg.expansion.pairs[0, 0] = 5
