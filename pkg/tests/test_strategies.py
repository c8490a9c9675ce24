"""
Tests for strategies module
"""

from collections import Counter

import numpy as np
import pytest

from src.errors import ContractError
from src.generators import generate_pn, generate_random
from src.parser import parse_program
from src.program import Literal, brute_force_aseo, eval_cost, eval_objective, is_answer_set
from src.solver import EnumerationSummary, Nogood, Reason, SearchConfig, Trail, enumerate_models
from src.strategies import (
    ALL,
    Mode,
    ThresholdPruner,
    TopKWindow,
    build_constraint_eq,
    build_constraint_gt,
    naive_enumerate,
    run_strategy,
    smart_enumerate,
    weight_enumerate,
)
from tests.conftest import TOP_FIVE_MODELS, top_five_source

EXAMPLE1_COSTS = [(1, 4, 1), (1, 4, 7), (1, 7, 4)]


def costs(ranked):
    return [r.cost for r in ranked]


def gt_trace(summary):
    """The strictly-greater bound of every optimize call after the first"""
    return [
        next((level, value) for kind, level, value in bounds if kind == "gt")
        for bounds in summary.trace
        if bounds
    ]


def survivors(program, rule):
    found = set()
    enumerate_models(program.extend([rule]), SearchConfig(oracle_verify=True), found.add)
    return found


def random_programs(count=100):
    rng = np.random.default_rng(2024)
    for seed in range(count):
        atoms = int(rng.integers(1, 11))
        rules = int(rng.integers(0, 2 * atoms + 1))
        levels = int(rng.integers(1, 3))
        yield seed, parse_program(generate_random(atoms, rules, levels, seed=seed))


class TestConstraintBuilders:
    """Test cases for build_constraint_gt and build_constraint_eq"""

    def test_gt_keeps_strictly_worse(self, three_way):
        """Test the strictly-worse constraint"""
        rule = build_constraint_gt(three_way.objectives[2], 4)
        survivors = brute_force_aseo(three_way.extend([rule]))
        assert costs(survivors) == [(1, 4, 7)]

    def test_eq_keeps_equal(self, three_way):
        """Test the equal-value constraint"""
        rule = build_constraint_eq(three_way.objectives[1], 4)
        survivors = brute_force_aseo(three_way.extend([rule]))
        assert costs(survivors) == [(1, 4, 1), (1, 4, 7)]

    def test_negative_bound_rejected(self, three_way):
        """Test constraint bounds must be non-negative"""
        with pytest.raises(ContractError):
            build_constraint_gt(three_way.objectives[0], -1)
        with pytest.raises(ContractError):
            build_constraint_eq(three_way.objectives[0], -1)

    def test_survivors_on_random_programs(self):
        """Test constraint survivors on random programs"""
        rng = np.random.default_rng(7)
        for _, program in random_programs():
            ranked = brute_force_aseo(program)
            for _ in range(2):
                level = int(rng.integers(1, program.levels + 1))
                objective = program.objectives[level - 1]
                bound = int(rng.integers(0, objective.total_weight() + 1))
                answer_sets = {r.model for r in ranked}

                above = survivors(program, build_constraint_gt(objective, bound))
                assert above == {m for m in answer_sets if eval_objective(objective, m) > bound}

                equal = survivors(program, build_constraint_eq(objective, bound))
                assert equal == {m for m in answer_sets if eval_objective(objective, m) == bound}


class TestThreeWayProgram:
    """Test cases for the three-model, three-level program"""

    @pytest.mark.parametrize("mode", ["naive", "weight", "smart"])
    def test_order(self, three_way, mode):
        """Test every strategy ranks the sample program"""
        k = 3 if mode == "smart" else ALL
        ranked = run_strategy(Mode(mode), three_way, k)
        assert costs(ranked) == EXAMPLE1_COSTS
        assert [r.index for r in ranked] == [0, 1, 2]
        assert all(is_answer_set(three_way, r.model) for r in ranked)

    def test_weight_constraint_evolution(self, three_way):
        """Test the bounds weight enumeration passes to optimize"""
        summary = weight_enumerate(three_way)
        assert summary.emitted == 3
        assert gt_trace(summary) == [(3, 1), (3, 7), (2, 4), (3, 4), (2, 7), (1, 1)]
        assert summary.trace[0] == ()
        assert summary.trace[2] == (("eq", 1, 1), ("eq", 2, 4), ("gt", 3, 7))
        assert summary.trace[3] == (("eq", 1, 1), ("gt", 2, 4))

    def test_weight_streams_in_order(self, three_way):
        """Test weight enumeration streams models in cost order"""
        seen = []
        weight_enumerate(three_way, sink=seen.append)
        assert costs(seen) == EXAMPLE1_COSTS

    def test_weight_stops_at_k(self, three_way):
        """Test weight enumeration stops after k models"""
        seen = []
        summary = weight_enumerate(three_way, k=2, sink=seen.append)
        assert costs(seen) == EXAMPLE1_COSTS[:2]
        assert summary.emitted == 2

    def test_smart_k1(self, three_way):
        """Test smart enumeration with k=1"""
        assert costs(smart_enumerate(three_way, 1)) == [(1, 4, 1)]


class TestTopFiveWindow:
    """Test cases for threshold pruning on the five-model program"""

    def setup_method(self):
        self.program = parse_program(top_five_source())

    def literal(self, name):
        return Literal(self.program.atom_id(name))

    def test_oracle_costs(self):
        """Test the costs of the five-model program"""
        ranked = brute_force_aseo(self.program)
        assert sorted(r.cost[0] for r in ranked) == [8, 8, 9, 13, 13]

    def test_partial_cost_and_nogood(self):
        """Test partial costs and the pruning nogood"""
        window = TopKWindow(2)
        window.insert(self.program.model_from_names(["l1", "l2", "l3"]), (8,))
        window.insert(self.program.model_from_names(["l2", "l3", "l5"]), (9,))
        assert window.threshold == (9,)

        pruner = ThresholdPruner(self.program, window)
        trail = Trail(self.program.size)
        trail.new_level()
        trail.push(self.literal("l1"), Reason.DECISION)
        trail.new_level()
        trail.push(self.literal("l5"), Reason.DECISION)

        assert pruner.partial_cost(trail) == (11,)
        assert pruner(trail) == Nogood.of(self.literal("l1"), self.literal("l5"))
        assert pruner.pruned == 1

    def test_no_pruning_below_threshold(self):
        """Test no pruning below the threshold"""
        window = TopKWindow(2)
        window.insert(frozenset(), (8,))
        window.insert(frozenset(), (9,))
        pruner = ThresholdPruner(self.program, window)
        trail = Trail(self.program.size)
        trail.push(self.literal("l2"), Reason.DECISION)
        assert pruner(trail) is None

    def test_no_pruning_until_window_full(self):
        """Test no pruning before the window is full"""
        window = TopKWindow(2)
        window.insert(frozenset(), (8,))
        pruner = ThresholdPruner(self.program, window)
        trail = Trail(self.program.size)
        trail.push(self.literal("l1"), Reason.DECISION)
        trail.push(self.literal("l5"), Reason.DECISION)
        assert pruner(trail) is None

    def test_smart_top2(self):
        """Test smart enumeration of the two best models"""
        ranked = smart_enumerate(self.program, 2)
        assert costs(ranked) == [(8,), (8,)]
        chosen = [{n for n in self.program.atom_names(r.model) if n.startswith("l")} for r in ranked]
        assert TOP_FIVE_MODELS[1] not in chosen
        assert TOP_FIVE_MODELS[4] not in chosen


class TestTopKWindow:
    """Test cases for TopKWindow"""

    def test_ties_keep_discovery_order(self):
        """Test equal costs keep discovery order"""
        window = TopKWindow(3)
        window.insert(frozenset([1]), (2,))
        window.insert(frozenset([2]), (1,))
        window.insert(frozenset([3]), (2,))
        assert [sorted(r.model) for r in window.ranked()] == [[2], [1], [3]]

    def test_eviction(self):
        """Test the window evicts past k"""
        window = TopKWindow(2)
        assert window.insert(frozenset([1]), (5,))
        assert window.insert(frozenset([2]), (3,))
        assert window.insert(frozenset([3]), (4,))
        assert not window.insert(frozenset([4]), (9,))
        assert [r.cost for r in window.ranked()] == [(3,), (4,)]
        assert [r.index for r in window.ranked()] == [0, 1]


class TestContracts:
    """Test cases for argument checking"""

    def test_smart_needs_finite_k(self, three_way):
        """Test smart enumeration needs a finite k"""
        with pytest.raises(ContractError, match="finite"):
            smart_enumerate(three_way, ALL)

    @pytest.mark.parametrize("k", [0, -1, 2.5])
    def test_invalid_k(self, three_way, k):
        """Test k must be a positive integer"""
        with pytest.raises(ContractError):
            naive_enumerate(three_way, k)

    def test_unsat_flag(self):
        """Test the flag for a program without answer sets"""
        summary = weight_enumerate(parse_program("a :- not a. #minimize{1@1 : a}."))
        assert summary.emitted == 0
        assert summary.unsat_at_first_optimize

    def test_weight_without_objectives(self):
        """Test weight enumeration without objectives"""
        program = parse_program("a :- not b. b :- not a.")
        seen = []
        summary = weight_enumerate(program, sink=seen.append)
        assert summary.emitted == 2
        assert all(r.cost == () for r in seen)

    def test_summary_merges(self, three_way):
        """Test strategy counters merge into a summary"""
        summary = EnumerationSummary()
        run_strategy(Mode.NAIVE, three_way, ALL, summary=summary)
        assert summary.models == 3


class TestDeterminism:
    """Test cases for repeatable emission order"""

    @pytest.mark.parametrize(
        "config",
        [SearchConfig(), SearchConfig(branching="shuffled", seed=3)],
        ids=["fixed", "shuffled"],
    )
    def test_weight_emission_order(self, config):
        """Test repeated weight runs emit the same sequence"""
        program = parse_program(generate_pn(3))
        runs = []
        for _ in range(2):
            seen = []
            summary = weight_enumerate(program, sink=seen.append, config=config)
            runs.append((seen, summary.solver.to_dict(), summary.trace))
        assert runs[0][0]
        assert runs[0] == runs[1]


class TestPnFamily:
    """Test cases for the P_n worst-case family"""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_structure_against_oracle(self, n):
        """Test P_n answer sets and costs against the oracle"""
        program = parse_program(generate_pn(n))
        ranked = brute_force_aseo(program)
        assert len(ranked) == 2 ** (2 * n - 1)
        per_value = Counter(r.cost[0] for r in ranked)
        assert per_value == {value: 2 ** (n - 1) for value in range(2 ** n)}

    def test_structure_n4_verified(self):
        """Test P_4 answer sets with oracle verification"""
        program = parse_program(generate_pn(4))
        found = []
        enumerate_models(program, SearchConfig(oracle_verify=True), found.append)
        assert len(found) == 2 ** 7
        per_value = Counter(eval_cost(program, model)[0] for model in found)
        assert per_value == {value: 8 for value in range(16)}

    def test_count_n5(self):
        """Test the answer set count of P_5"""
        program = parse_program(generate_pn(5))
        summary = enumerate_models(program)
        assert summary.models == 2 ** 9

    @pytest.mark.parametrize("n", [2, 3])
    def test_weight_order_non_decreasing(self, n):
        """Test weight enumeration on P_n is non-decreasing"""
        program = parse_program(generate_pn(n))
        seen = []
        weight_enumerate(program, sink=seen.append)
        values = [r.cost[0] for r in seen]
        assert len(values) == 2 ** (2 * n - 1)
        assert values == sorted(values)


class TestOracleSweep:
    """Cross-strategy agreement with the brute-force oracle"""

    def test_all_strategies_match_oracle(self):
        """Test every strategy against the oracle"""
        for seed, program in random_programs():
            expected = brute_force_aseo(program)
            expected_costs = Counter(r.cost for r in expected)
            expected_models = {r.model for r in expected}

            naive = naive_enumerate(program)
            weight = run_strategy(Mode.WEIGHT, program)
            assert Counter(costs(naive)) == expected_costs, seed
            assert Counter(costs(weight)) == expected_costs, seed
            assert {r.model for r in naive} == expected_models, seed
            assert {r.model for r in weight} == expected_models, seed
            assert costs(weight) == sorted(costs(weight)), seed

            if expected:
                smart = smart_enumerate(program, len(expected))
                assert Counter(costs(smart)) == expected_costs, seed
                assert {r.model for r in smart} == expected_models, seed

            for k in (1, 3):
                top = sorted(expected_costs.elements())[:k]
                assert costs(run_strategy(Mode.WEIGHT, program, k)) == top, seed
                assert costs(smart_enumerate(program, k)) == top, seed
