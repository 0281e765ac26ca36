import numpy as np
import pytest

from multicut.core import (
    CompleteInstance,
    Instance,
    check_cycle_inequalities,
    complete,
    contract,
    is_multicut,
    lift_labeling,
    multicut_to_partition,
    normalize,
    objective,
    pair_count,
    pair_index,
    pairs_of,
    partition_labeling,
    partition_to_multicut,
)
from multicut.errors import (
    InfeasibleLabelingError,
    InvalidPartitionError,
    SizeGuardError,
)

from conftest import (
    WORKED_CUT_SET,
    WORKED_OPTIMUM,
    iter_partitions,
    random_sparse_instance,
)


def cut_set(inst, x):
    return {tuple(e) for e, b in zip(inst.edges.tolist(), x) if b}


class TestInstanceValidation:
    def test_rejects_reversed_edges(self):
        with pytest.raises(ValueError):
            Instance(3, [(1, 0)], [1.0])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            Instance(3, [(0, 1), (0, 1)], [1.0, 2.0])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Instance(3, [(0, 3)], [1.0])

    def test_rejects_non_finite_costs(self):
        with pytest.raises(ValueError):
            Instance(3, [(0, 1)], [np.inf])

    def test_arrays_are_read_only(self):
        inst = Instance(3, [(0, 1)], [1.0])
        with pytest.raises(ValueError):
            inst.costs[0] = 2.0


class TestIsMulticut:
    def test_worked_example_optimal_cut(self, worked_example):
        x = [1 if tuple(e) in WORKED_CUT_SET else 0 for e in worked_example.edges.tolist()]
        assert is_multicut(worked_example, x)

    def test_all_zeros_always_feasible(self, worked_example):
        assert is_multicut(worked_example, np.zeros(worked_example.m, dtype=int))

    def test_single_cut_edge_in_triangle_infeasible(self):
        k3 = Instance(3, [(0, 1), (0, 2), (1, 2)], [1.0, 1.0, 1.0])
        assert not is_multicut(k3, [1, 0, 0])

    def test_length_mismatch_rejected(self, worked_example):
        with pytest.raises(ValueError):
            is_multicut(worked_example, [0, 1])


class TestCycleInequalityOracle:
    def test_triangle_all_cut(self):
        k3 = Instance(3, [(0, 1), (0, 2), (1, 2)], [1.0, 1.0, 1.0])
        assert check_cycle_inequalities(k3, [1, 1, 1])

    def test_chordless_four_cycle_one_cut(self):
        c4 = Instance(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [1.0] * 4)
        assert not check_cycle_inequalities(c4, [1, 0, 0, 0])

    def test_size_guard(self):
        n = 13
        inst = Instance(n, pairs_of(n), np.ones(pair_count(n)))
        with pytest.raises(SizeGuardError):
            check_cycle_inequalities(inst, np.zeros(inst.m, dtype=int))

    def test_agrees_with_component_criterion_on_random_pairs(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            inst = random_sparse_instance(rng, n_lo=2, n_hi=8)
            x = rng.integers(0, 2, size=inst.m)
            assert is_multicut(inst, x) == check_cycle_inequalities(inst, x)


class TestPartitionMulticutBijection:
    def test_worked_example_clusters(self, worked_example):
        x = partition_to_multicut(worked_example, [0, 1, 1, 1, 2, 2, 2])
        assert cut_set(worked_example, x) == WORKED_CUT_SET

    def test_single_cluster_all_zeros(self, worked_example):
        x = partition_to_multicut(worked_example, np.zeros(7, dtype=int))
        assert not x.any()

    def test_singletons_on_complete_graph_all_ones(self):
        inst = Instance(5, pairs_of(5), np.ones(10))
        assert partition_to_multicut(inst, np.arange(5)).all()

    def test_disconnected_cluster_rejected(self):
        path = Instance(3, [(0, 1), (1, 2)], [1.0, 1.0])
        with pytest.raises(InvalidPartitionError):
            partition_to_multicut(path, [0, 1, 0])  # nodes 0, 2 not adjacent

    def test_non_contiguous_ids_rejected(self, worked_example):
        with pytest.raises(InvalidPartitionError):
            partition_to_multicut(worked_example, [0, 2, 2, 2, 3, 3, 3])

    def test_worked_example_inverse(self, worked_example):
        x = np.array(
            [1 if tuple(e) in WORKED_CUT_SET else 0 for e in worked_example.edges.tolist()]
        )
        p = multicut_to_partition(worked_example, x)
        assert p.max() == 2  # three clusters
        assert np.array_equal(partition_to_multicut(worked_example, p), x)

    def test_all_zeros_single_cluster_on_connected_graph(self, worked_example):
        p = multicut_to_partition(worked_example, np.zeros(worked_example.m, dtype=int))
        assert p.max() == 0

    def test_infeasible_labeling_rejected(self):
        k3 = Instance(3, [(0, 1), (0, 2), (1, 2)], [1.0, 1.0, 1.0])
        with pytest.raises(InfeasibleLabelingError):
            multicut_to_partition(k3, [1, 0, 0])

    def test_round_trip_on_random_feasible_labelings(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            inst = random_sparse_instance(rng, n_lo=2, n_hi=10)
            # feasible labeling from a random node coloring, refined to components
            colors = rng.integers(0, 3, size=inst.n)
            x = (colors[inst.edges[:, 0]] != colors[inst.edges[:, 1]]).astype(int)
            p = multicut_to_partition(inst, x)
            assert np.array_equal(partition_to_multicut(inst, p), x)

    def test_bijection_exhaustive_small(self):
        # distinct valid clusterings map to distinct multicuts, and mapping
        # back recovers the clusters, for every partition with n <= 6
        rng = np.random.default_rng(3)
        for n in (3, 5, 6):
            inst = random_sparse_instance(rng, n_lo=n, n_hi=n, keep=0.7)
            seen = set()
            for part in iter_partitions(inst.n):
                label = np.empty(inst.n, dtype=int)
                for cid, cluster in enumerate(part):
                    label[cluster] = cid
                try:
                    x = partition_to_multicut(inst, label)
                except InvalidPartitionError:
                    continue
                key = x.tobytes()
                assert key not in seen, "two clusterings mapped to one multicut"
                seen.add(key)
                recovered = multicut_to_partition(inst, x)
                same = label[:, None] == label[None, :]
                back = recovered[:, None] == recovered[None, :]
                assert np.array_equal(same, back)


class TestCompletion:
    def test_worked_example_pair_counts(self, worked_example):
        ci = complete(worked_example)
        assert ci.m == 21
        assert int((ci.costs == 0.0).sum()) == 11

    def test_original_costs_preserved(self, worked_example):
        ci = complete(worked_example)
        for (i, j), c in zip(worked_example.edges, worked_example.costs):
            assert ci.cost(int(i), int(j)) == c

    def test_already_complete_unchanged(self):
        inst = Instance(4, pairs_of(4), np.arange(6, dtype=float) - 3)
        assert np.array_equal(complete(inst).costs, inst.costs)

    def test_completion_preserves_optimum(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            inst = random_sparse_instance(rng, n_lo=2, n_hi=8)
            from multicut.exact import brute_force

            original = brute_force(inst)
            completed = brute_force(complete(inst).to_instance())
            assert np.isclose(original.value, completed.value)


class TestNormalize:
    def test_worked_example_factor(self, worked_example):
        ci = complete(worked_example)
        cn = normalize(ci)
        assert cn.normalized
        assert np.allclose(cn.costs, ci.costs * 0.84)  # 21 pairs / 25 abs cost

    def test_two_edge_example(self):
        cn = normalize(CompleteInstance(2, [2.0]))
        assert np.allclose(cn.costs, [1.0])
        cn = normalize(CompleteInstance(2, [-2.0]))
        assert np.allclose(cn.costs, [-1.0])

    def test_idempotent_when_already_normalized(self):
        ci = CompleteInstance(3, [1.5, -0.5, 1.0])  # |costs| sum to 3 = pair count
        assert np.allclose(normalize(ci).costs, ci.costs)

    def test_all_zero_returned_unchanged_but_flagged(self):
        cn = normalize(CompleteInstance(3, [0.0, 0.0, 0.0]))
        assert cn.normalized
        assert not cn.costs.any()

    def test_abs_sum_invariant(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(2, 12))
            ci = CompleteInstance(n, rng.normal(size=pair_count(n)))
            cn = normalize(ci)
            assert abs(np.abs(cn.costs).sum() - cn.m) <= 1e-9 * cn.m

    def test_scaling_preserves_optimal_set(self):
        from multicut.exact import all_partitions

        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(3, 8))
            costs = rng.integers(-5, 6, size=pair_count(n)).astype(float)
            parts = all_partitions(n)
            pairs = pairs_of(n)
            cuts = parts[:, pairs[:, 0]] != parts[:, pairs[:, 1]]
            base = cuts @ costs
            scaled = cuts @ (costs * 0.84)
            assert np.array_equal(
                np.flatnonzero(base == base.min()), np.flatnonzero(scaled == scaled.min())
            )


class TestContract:
    def test_k3_merges_parallel_costs(self):
        ci = CompleteInstance(3, [5.0, -2.0, 3.0])
        out, record = contract(ci, 0, 1)
        assert out.n == 2
        assert np.allclose(out.costs, [1.0])  # -2 + 3
        assert record.kept == 0 and record.removed == 1

    def test_k2_contracts_to_point(self):
        out, _ = contract(CompleteInstance(2, [4.0]), 0, 1)
        assert out.n == 1 and out.m == 0

    def test_self_contraction_rejected(self):
        with pytest.raises(ValueError):
            contract(CompleteInstance(3, [1.0, 1.0, 1.0]), 1, 1)

    def test_removed_node_not_in_pair_map(self):
        rng = np.random.default_rng(0)
        ci = CompleteInstance(6, rng.normal(size=15))
        _, record = contract(ci, 2, 4)
        assert record.node_map[4] == record.node_map[2]
        assert record.map_pair(2, 4) is None

    def test_lift_preserves_objective_up_to_contracted_cost(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(3, 9))
            ci = CompleteInstance(n, rng.normal(size=pair_count(n)))
            i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
            out, record = contract(ci, int(i), int(j))
            # lift every labeling induced by a partition of the contracted graph
            for _ in range(5):
                p = rng.integers(0, 3, size=out.n)
                _, p = np.unique(p, return_inverse=True)
                x_small = partition_labeling(out.n, p)
                x_big = lift_labeling(record, x_small)
                assert is_multicut(ci, x_big)
                assert np.isclose(objective(ci, x_big), objective(out, x_small))
                # the contracted pair itself is joined in the lift
                lo, hi = sorted((int(i), int(j)))
                assert x_big[int(pair_index(n, lo, hi))] == 0


class TestObjective:
    def test_worked_example_optimum_value(self, worked_example):
        x = [1 if tuple(e) in WORKED_CUT_SET else 0 for e in worked_example.edges.tolist()]
        assert objective(worked_example, x) == WORKED_OPTIMUM

    def test_all_zeros_is_zero(self, worked_example):
        assert objective(worked_example, np.zeros(worked_example.m, dtype=int)) == 0.0

    def test_all_ones_is_total(self, worked_example):
        total = float(worked_example.costs.sum())
        assert objective(worked_example, np.ones(worked_example.m, dtype=int)) == total

    def test_mismatch_rejected(self, worked_example):
        with pytest.raises(ValueError):
            objective(worked_example, [1, 0])
