"""Rank estimation, structural independence, ROD, and theorem suites."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrsplit.diagnostics import (
    dirichlet_energy,
    exact_rank_small,
    in_degree_matrix,
    numeric_rank,
    rod,
    rows_nonzero,
    structurally_independent,
    verify_dar_independent_pairs,
    verify_ergodic_rank_one,
    verify_independence_theorem,
    verify_rank_theorem,
    verify_zero_convergence,
    run_full_suite,
)
from mrsplit.graph import Graph, graph_from_pairs
from mrsplit.split import RAW, ROW_MEAN, operator_for_graph


def rel_ops(n, edges_per_relation):
    return [
        operator_for_graph(graph_from_pairs(n, edges), RAW)
        for edges in edges_per_relation
    ]


def star_ops(counts):
    """Relation pair where node i receives counts[i][k] unit edges in
    relation k from private source nodes (mirrors the figure instances)."""
    nxt = len(counts)
    rels = [[], []]
    for node, per_rel in enumerate(counts):
        for k, c in enumerate(per_rel):
            for _ in range(c):
                rels[k].append((nxt, node))
                nxt += 1
    return rel_ops(nxt, rels)


class TestInDegreeMatrix:
    def test_weighted_rows(self):
        # node 0: four unit arcs in rel-1 and weights {3, -1} in rel-2 -> (4, 2)
        ops = rel_ops(
            7,
            [
                [(1, 0), (2, 0), (3, 0), (4, 0)],
                [(5, 0, 3.0), (6, 0, -1.0)],
            ],
        )
        E = in_degree_matrix(ops)
        assert tuple(E.row(0)) == (4.0, 2.0)

    def test_unit_count_rows(self):
        ops = star_ops([(3, 2)])
        assert tuple(in_degree_matrix(ops).row(0)) == (3.0, 2.0)

    def test_row_mean_rows_sum_to_one(self):
        g = graph_from_pairs(3, [(0, 2), (1, 2)])
        E = in_degree_matrix([operator_for_graph(g, ROW_MEAN)])
        assert E.row(2)[0] == pytest.approx(1.0)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            in_degree_matrix(rel_ops(2, [[(0, 1)]]) + rel_ops(3, [[(0, 1)]]))


class TestStructuralIndependence:
    def test_dependent_pair(self):
        assert not structurally_independent((4.0, 2.0), (2.0, 1.0))

    def test_independent_pair(self):
        assert structurally_independent((3.0, 2.0), (2.0, 1.0))

    def test_zero_vector_always_dependent(self):
        assert not structurally_independent((0.0, 0.0), (5.0, 7.0))

    def test_symmetric(self):
        a, b = (3.0, 2.0), (2.0, 1.0)
        assert structurally_independent(a, b) == structurally_independent(b, a)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            structurally_independent((1.0, 2.0), (1.0,))


class TestNumericRank:
    def test_identity(self):
        assert numeric_rank(np.eye(3)) == 3

    def test_outer_product(self):
        assert numeric_rank(np.outer([1.0, 2.0, 3.0], [4.0, 5.0])) == 1

    def test_rank_two_example(self):
        assert numeric_rank(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 5.0]])) == 2

    def test_zero_matrix(self):
        assert numeric_rank(np.zeros((4, 4))) == 0

    def test_empty_matrix(self):
        assert numeric_rank(np.zeros((0, 3))) == 0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            numeric_rank(np.array([[np.nan]]))


class TestExactRankSmall:
    def test_zero(self):
        assert exact_rank_small([[0, 0], [0, 0]]) == 0

    def test_identity(self):
        assert exact_rank_small(np.eye(5)) == 5

    def test_fraction_exactness(self):
        assert exact_rank_small([[1, 2], [2, 4], [3, 5]]) == 2

    def test_dims_capped(self):
        with pytest.raises(ValueError):
            exact_rank_small(np.zeros((33, 2)))

    @settings(max_examples=50)
    @given(
        st.integers(1, 6),
        st.integers(1, 6),
        st.integers(0, 2**31 - 1),
    )
    def test_agrees_with_numeric_rank(self, nr, nc, seed):
        M = np.random.default_rng(seed).integers(-4, 5, size=(nr, nc))
        assert exact_rank_small(M) == numeric_rank(M.astype(float))


class TestRod:
    def test_rank_one_matrix(self):
        X = np.outer([1.0, -2.0, 0.5], [3.0, 1.0])
        assert rod(X) <= 1e-10

    def test_identity_two(self):
        assert rod(np.eye(2)) == pytest.approx(1.0, abs=1e-10)

    def test_scale_invariance(self):
        X = np.random.default_rng(0).uniform(-1, 1, (5, 3))
        assert rod(3.7 * X) == pytest.approx(rod(X), abs=1e-12)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            rod(np.zeros((2, 2)))

    @settings(max_examples=30)
    @given(st.integers(0, 2**31 - 1))
    def test_zero_iff_rank_one(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1, 1, (4, 3))
        if numeric_rank(X) == 1:
            assert rod(X) < 1e-8
        elif rod(X) < 1e-8:
            assert numeric_rank(X) == 1


class TestDirichletEnergy:
    def test_constant_rows(self):
        g = graph_from_pairs(3, [(0, 1), (1, 2)])
        assert dirichlet_energy(np.ones((3, 2)), g) == 0.0

    def test_path_hand_value(self):
        g = graph_from_pairs(
            3, [(0, 1), (1, 0), (1, 2), (2, 1)], undirected=True
        )
        assert dirichlet_energy(np.array([[0.0], [1.0], [0.0]]), g) == 4.0

    def test_edgeless(self):
        assert dirichlet_energy(np.ones((4, 2)), Graph(n=4, edges=())) == 0.0

    def test_row_count_validated(self):
        with pytest.raises(ValueError):
            dirichlet_energy(np.ones((2, 2)), Graph(n=3, edges=()))


class TestRowsNonzero:
    def test_all_nonzero(self):
        assert rows_nonzero(np.ones((3, 2)))

    def test_detects_zero_row(self):
        X = np.ones((3, 2))
        X[1] = 0.0
        assert not rows_nonzero(X)


class TestVerifyRankTheorem:
    def test_ergodic_triangle_rank_one_bound(self):
        tri = [(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)]
        ops = [
            operator_for_graph(graph_from_pairs(3, tri), ROW_MEAN),
            operator_for_graph(graph_from_pairs(3, [(a, b) for b, a in tri]), ROW_MEAN),
        ]
        assert numeric_rank(in_degree_matrix(ops).matrix) == 1
        report = verify_rank_theorem(ops, trials=50, seed=0)
        assert report.passed

    def test_independent_star_pair_rank_two(self):
        ops = star_ops([(3, 2), (2, 1)])
        assert numeric_rank(in_degree_matrix(ops).matrix) == 2
        report = verify_rank_theorem(ops, trials=50, seed=0)
        assert report.passed
        assert report.min_margin >= 0

    def test_report_shape(self):
        ops = star_ops([(1, 1)])
        d = verify_rank_theorem(ops, trials=5, seed=3).to_dict()
        assert d["theorem"] == "rank_lower_bound"
        assert d["trials"] == 5 and d["seed"] == 3


class TestVerifyIndependenceTheorem:
    def test_independent_pair_always_rank_two(self):
        report = verify_independence_theorem(
            star_ops([(3, 2), (2, 1)]), pair=(0, 1), trials=100, seed=0
        )
        assert report.passed and report.failures == 0

    def test_dependent_pair_not_asserted(self):
        report = verify_independence_theorem(
            star_ops([(4, 2), (2, 1)]), pair=(0, 1), trials=20, seed=0
        )
        assert report.passed
        assert any("dependent" in note for note in report.notes)

    def test_single_mean_relation_all_pairs_dependent(self):
        tri = [(0, 1), (1, 2), (2, 0)]
        ops = [operator_for_graph(graph_from_pairs(3, tri), ROW_MEAN)]
        E = in_degree_matrix(ops)
        for i in range(3):
            for j in range(i + 1, 3):
                assert not structurally_independent(E.row(i), E.row(j))

    def test_pair_out_of_range(self):
        with pytest.raises(IndexError):
            verify_independence_theorem(star_ops([(1, 1)]), pair=(0, 99), trials=1)


class TestSuites:
    def test_zero_convergence_small_budget(self):
        assert verify_zero_convergence(trials=10, seed=0).passed

    def test_ergodic_instances(self):
        assert verify_ergodic_rank_one(instances=8).passed

    def test_dar_independent_pairs(self):
        assert verify_dar_independent_pairs(trials=10, seed=0).passed

    def test_full_suite_structure(self):
        reports = run_full_suite(seed=0, trials=10)
        assert len(reports) == 6
        names = {r.theorem for r in reports}
        assert "rank_lower_bound_random_splits" in names
        assert all(r.passed for r in reports)
