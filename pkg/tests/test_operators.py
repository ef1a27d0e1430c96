"""Crossover and mutation operator behavior."""

import numpy as np
import pytest

from sepx import (
    AttributedGraph,
    GraphInputError,
    OperatorConfig,
    SepEditPath,
    always_valid,
    dag_io_validity,
    from_aa_matrix,
    ged_distance,
    ged_exact,
    matrix_distances,
    mutate,
    permute,
    random_valid_graph,
    sep_bernoulli_crossover,
    sep_crossover,
    standard_crossover,
    substream,
    to_aa_matrix,
    vary_with_retry,
)
from sepx.operators import _rewrite_entries

from helpers import random_pair

# Equal-order pair with verified distance 6 under the identity alignment
# (1 attribute substitution plus 5 edge edits); used by the inheritance test.
D6_G1 = AttributedGraph((2, 1, 2, 2), [(0, 1), (2, 1), (2, 3), (3, 2)])
D6_G2 = AttributedGraph((2, 1, 1, 2), [(0, 2), (0, 3), (1, 3), (2, 1), (2, 3)])


def relabeled_copy(g, rng):
    perm = tuple(int(v) for v in rng.permutation(g.order))
    return from_aa_matrix(permute(to_aa_matrix(g), perm))


class TestSepCrossover:
    def test_half_split_bounds_equal_order(self):
        # With no vertex slots created or destroyed along the path, the
        # offspring lands within ceil(d*/2) of parent 1 and floor(d*/2) of
        # parent 2.
        rng = substream(11, "half-split")
        for _ in range(40):
            g1, g2 = random_pair(rng, max_order=5, equal_order=True)
            d = ged_exact(g1, g2).distance
            child = sep_crossover(g1, g2, rng)
            assert ged_distance(child, g1).total <= (d + 1) // 2
            assert ged_distance(child, g2).total <= d // 2

    def test_zero_distance_returns_parent_one(self):
        rng = substream(12, "zero-distance")
        g1, _ = random_pair(rng, max_order=4, equal_order=True)
        g2 = relabeled_copy(g1, rng)
        assert ged_exact(g1, g2).distance == 0
        for _ in range(3):
            assert sep_crossover(g1, g2, rng) == g1
            assert sep_bernoulli_crossover(g1, g2, rng) == g1

    def test_common_substructure_preserved(self):
        # Entries on which the aligned parents agree are never touched.
        rng = substream(13, "common-substructure")
        for _ in range(25):
            g1, g2 = random_pair(rng, max_order=5, equal_order=True)
            res = ged_exact(g1, g2)
            a1 = to_aa_matrix(g1)
            a2 = permute(to_aa_matrix(g2), res.alignment)
            agree = a1 == a2
            for op in (sep_crossover, sep_bernoulli_crossover):
                child = op(g1, g2, rng)
                assert child.order == g1.order
                assert np.array_equal(to_aa_matrix(child)[agree], a1[agree])

    def test_edit_path_reuse(self):
        rng = substream(14, "path-reuse")
        g1, g2 = random_pair(rng, max_order=5, equal_order=True)
        path = SepEditPath(g1, g2)
        d = path.result.distance
        for _ in range(10):
            child = path.sample(rng)
            assert ged_distance(child, g1).total <= (d + 1) // 2
            assert ged_distance(child, g2).total <= d // 2

    def test_seeded_determinism(self):
        rng = substream(15, "op-pair")
        g1, g2 = random_pair(rng, max_order=5, equal_order=True)
        for op in (sep_crossover, sep_bernoulli_crossover, standard_crossover):
            a = op(g1, g2, substream(15, "draw"))
            b = op(g1, g2, substream(15, "draw"))
            assert a == b


class TestBernoulliInheritance:
    def test_mean_distance_is_half_dstar(self):
        # Each of the d* disagreeing entries is inherited from parent 2 with
        # probability 1/2, so the entrywise distance of the offspring to
        # parent 1 is Binomial(d*, 1/2) with mean 3 here.
        assert ged_exact(D6_G1, D6_G2).distance == 6
        rng = substream(16, "bernoulli-mean")
        a1 = to_aa_matrix(D6_G1)
        trials = 10_000
        total = 0
        for _ in range(trials):
            child = sep_bernoulli_crossover(D6_G1, D6_G2, rng)
            total += matrix_distances(to_aa_matrix(child), a1).total
        mean = total / trials
        # 5 sigma of Binomial(6, 1/2) / sqrt(trials)
        assert abs(mean - 3.0) < 5 * np.sqrt(6 * 0.25) / np.sqrt(trials)


class TestStandardCrossover:
    def test_expected_distance_to_target(self):
        # Under a uniformly random relabeling, each off-diagonal entry of
        # parent 2 is an independent-looking Bernoulli with rate
        # edges / (n (n - 1)), giving a closed-form expectation for the
        # offspring's edge distance to any fixed target matrix.
        rng = substream(17, "stdx-expectation")
        n, n_edges = 7, 9
        slots = [(i, j) for i in range(n) for j in range(n) if i != j]

        def pick_edges():
            idx = rng.choice(len(slots), size=n_edges, replace=False)
            return [slots[k] for k in idx]

        attrs = (1,) * n
        g1 = AttributedGraph(attrs, pick_edges())
        g2 = AttributedGraph(attrs, pick_edges())
        opt = AttributedGraph(attrs, pick_edges())
        a1, aopt = to_aa_matrix(g1), to_aa_matrix(opt)
        d1 = matrix_distances(a1, aopt).edge
        pairs = n * (n - 1)
        nopt1, n21 = opt.edge_count, g2.edge_count
        nopt0, n20 = pairs - nopt1, pairs - n21
        expected = 0.5 * d1 + (nopt1 * n20 + nopt0 * n21) / (2 * pairs)

        trials = 4000
        samples = np.empty(trials)
        for t in range(trials):
            child = standard_crossover(g1, g2, rng)
            samples[t] = matrix_distances(to_aa_matrix(child), aopt).edge
        se = samples.std(ddof=1) / np.sqrt(trials)
        assert abs(samples.mean() - expected) < 4.5 * se

    def test_offspring_order(self):
        rng = substream(18, "stdx-order")
        g1, g2 = random_pair(rng, max_order=5, equal_order=True)
        child = standard_crossover(g1, g2, rng)
        assert child.order <= max(g1.order, g2.order)


class TestMutate:
    def test_full_rewrite_is_deterministic(self):
        # p_m = 1 touches every entry; with a singleton alphabet each live
        # diagonal can only fall to null and the padding slot can only rise
        # to 1, so the result is forced.
        g = AttributedGraph((1, 1))
        config = OperatorConfig(alphabet=(1,), p_m=1.0)
        child = mutate(g, substream(19, "rewrite"), config)
        assert child == AttributedGraph((1,))

    def test_mean_one_offdiagonal_alteration(self):
        # The default rate is 1 / (m (m - 1)) at the padded order m, so the
        # expected number of altered off-diagonal entries per call is 1.
        rng = substream(20, "mutation-rate")
        g, _ = random_pair(rng, max_order=5, equal_order=True)
        base = to_aa_matrix(g)
        padded = np.zeros((g.order + 1, g.order + 1), dtype=base.dtype)
        padded[: g.order, : g.order] = base
        m_order = g.order + 1
        p_m = 1.0 / (m_order * (m_order - 1))
        off = ~np.eye(m_order, dtype=bool)
        trials = 20_000
        total = 0
        for _ in range(trials):
            work = padded.copy()
            _rewrite_entries(work, rng, (1, 2, 3), p_m)
            total += int(np.sum((work != padded) & off))
        mean = total / trials
        sd = np.sqrt(m_order * (m_order - 1) * p_m * (1 - p_m))
        assert abs(mean - 1.0) < 5 * sd / np.sqrt(trials)

    def test_order_can_grow_and_shrink(self):
        rng = substream(21, "mutation-orders")
        g = AttributedGraph((1, 2), [(0, 1)])
        config = OperatorConfig(p_m=0.3)
        orders = {mutate(g, rng, config).order for _ in range(400)}
        assert 3 in orders  # headroom slot realized
        assert orders & {0, 1, 2}  # deletions or untouched order

    def test_empty_graph(self):
        child = mutate(AttributedGraph(()), substream(22, "empty"))
        assert child.order == 1
        assert child.attrs[0] in (1, 2, 3)

    def test_zero_rate_is_identity(self):
        rng = substream(23, "zero-rate")
        g, _ = random_pair(rng, max_order=4)
        assert mutate(g, rng, OperatorConfig(p_m=0.0)) == g

    def test_seeded_determinism(self):
        g = AttributedGraph((1, 2, 3), [(0, 1), (1, 2)])
        config = OperatorConfig(p_m=0.2)
        a = [mutate(g, substream(24, "det"), config) for _ in range(3)]
        b = [mutate(g, substream(24, "det"), config) for _ in range(3)]
        assert a == b

    def test_config_validation(self):
        with pytest.raises(GraphInputError, match="alphabet"):
            OperatorConfig(alphabet=())
        with pytest.raises(GraphInputError, match="alphabet"):
            OperatorConfig(alphabet=(0, 1))
        with pytest.raises(GraphInputError, match="p_m"):
            OperatorConfig(p_m=1.5)
        with pytest.raises(GraphInputError, match="max_retries"):
            OperatorConfig(max_retries=0)


class TestVaryWithRetry:
    def test_exhausts_retries_on_invalid(self):
        rng = substream(25, "retry-invalid")
        g1, g2 = random_pair(rng, max_order=4, equal_order=True)
        calls = 0

        def op(a, b, r):
            nonlocal calls
            calls += 1
            return sep_crossover(a, b, r)

        assert vary_with_retry(op, [g1, g2], lambda g: False, rng, max_retries=7) is None
        assert calls == 7

    def test_rejects_clones(self):
        rng = substream(26, "retry-clone")
        g, _ = random_pair(rng, max_order=4)
        clone_op = lambda parent, r: parent
        assert vary_with_retry(clone_op, [g], always_valid, rng, max_retries=5) is None

    def test_returns_novel_valid_child(self):
        rng = substream(27, "retry-ok")
        g = AttributedGraph((1, 2, 3), [(0, 1), (1, 2)])
        child = vary_with_retry(mutate, [g], always_valid, rng)
        assert child is not None
        assert ged_distance(child, g).total > 0

    def test_crossover_child_differs_from_both(self):
        rng = substream(28, "retry-pair")
        for _ in range(5):
            g1, g2 = random_pair(rng, max_order=5, equal_order=True)
            child = vary_with_retry(sep_crossover, [g1, g2], always_valid, rng)
            if child is None:
                continue  # parents too close, nothing strictly between them
            assert ged_distance(child, g1).total > 0
            assert ged_distance(child, g2).total > 0


DAG_VALID = dag_io_validity(source_attr=1, sink_attr=2)


class TestDagIoValidity:
    def test_linear_chain(self):
        assert DAG_VALID(AttributedGraph((1, 3, 2), [(0, 1), (1, 2)]))
        assert DAG_VALID(AttributedGraph((1, 2), [(0, 1)]))

    def test_rejects_cycle(self):
        g = AttributedGraph((1, 3, 2), [(0, 1), (1, 2), (2, 0)])
        assert not DAG_VALID(g)

    def test_rejects_wrong_terminal_counts(self):
        assert not DAG_VALID(AttributedGraph((1, 1, 2), [(0, 2), (1, 2)]))
        assert not DAG_VALID(AttributedGraph((1, 3, 3), [(0, 1), (1, 2)]))
        assert not DAG_VALID(AttributedGraph((1,)))

    def test_rejects_off_path_vertices(self):
        # vertex 1 unreachable from the source
        assert not DAG_VALID(AttributedGraph((1, 3, 2), [(0, 2)]))
        # vertex 1 reachable but never reaches the sink
        assert not DAG_VALID(AttributedGraph((1, 3, 2), [(0, 1), (0, 2)]))

    def test_caps(self):
        g = AttributedGraph((1, 3, 2), [(0, 1), (1, 2), (0, 2)])
        assert DAG_VALID(g)
        assert not dag_io_validity(1, 2, edge_cap=2)(g)
        assert not dag_io_validity(1, 2, max_order=2)(g)

    def test_equal_terminal_attrs_rejected(self):
        with pytest.raises(GraphInputError, match="must differ"):
            dag_io_validity(source_attr=2, sink_attr=2)


class TestRandomValidGraph:
    def test_samples_satisfy_predicate(self):
        valid = dag_io_validity(1, 2)
        rng = substream(29, "valid-sampler")
        for _ in range(10):
            g = random_valid_graph(4, valid, rng)
            assert valid(g)
            assert g.order == 4

    def test_seeded_determinism(self):
        valid = dag_io_validity(1, 2)
        a = random_valid_graph(5, valid, substream(30, "det"))
        b = random_valid_graph(5, valid, substream(30, "det"))
        assert a == b

    def test_unsatisfiable_raises(self):
        valid = dag_io_validity(1, 2)
        rng = substream(31, "unsat")
        with pytest.raises(RuntimeError, match="no valid graph"):
            random_valid_graph(3, valid, rng, alphabet=(3,), max_proposals=50)
