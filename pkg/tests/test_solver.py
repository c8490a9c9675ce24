"""
Tests for solver module
"""

import pytest

from src.errors import ContractError, SearchTimeout
from src.generators import generate_pn, generate_random
from src.parser import parse_program
from src.program import Literal, brute_force_aseo, eval_cost
from src.solver import (
    Control,
    EnumerationSummary,
    Nogood,
    Reason,
    SearchConfig,
    Solver,
    Trail,
    enumerate_models,
    optimize,
    solve_one,
)


def collect(program, config=None, on_partial=None):
    found = []
    summary = enumerate_models(program, config, found.append, on_partial)
    return found, summary


class TestTrail:
    """Test cases for Trail"""

    def test_push_and_backtrack(self):
        """Test pushing literals and backtracking levels"""
        trail = Trail(3)
        trail.push(Literal(0), Reason.PROPAGATED)
        trail.new_level()
        trail.push(Literal(1, False), Reason.DECISION)
        trail.push(Literal(2), Reason.PROPAGATED)
        assert trail.level == 1
        assert trail.is_total()
        assert trail.true_atoms() == frozenset([0, 2])

        removed = trail.backtrack(0)
        assert removed == [Literal(2), Literal(1, False)]
        assert trail.literals() == frozenset([Literal(0)])
        assert trail.value(Literal(1)) is None

    def test_value_of_complement(self):
        """Test literal values on the trail"""
        trail = Trail(1)
        trail.push(Literal(0, False), Reason.DECISION)
        assert trail.value(Literal(0, False)) is True
        assert trail.value(Literal(0)) is False

    def test_double_assignment_rejected(self):
        """Test an atom can only be assigned once"""
        trail = Trail(1)
        trail.push(Literal(0), Reason.DECISION)
        with pytest.raises(ContractError):
            trail.push(Literal(0, False), Reason.DECISION)


class TestEnumerate:
    """Test cases for plain enumeration"""

    def test_choice(self):
        """Test enumerating an even loop"""
        program = parse_program("a :- not b. b :- not a.")
        found, summary = collect(program)
        assert sorted(program.atom_names(m) for m in found) == [["a"], ["b"]]
        assert summary.models == 2
        assert summary.exhausted

    def test_no_duplicates(self):
        """Test every answer set is found once"""
        program = parse_program(generate_random(8, 14, 1, seed=3))
        found, _ = collect(program)
        assert len(found) == len(set(found))

    def test_inconsistent(self, instances_dir):
        """Test a program without answer sets"""
        program = parse_program((instances_dir / "inconsistent.lp").read_text())
        found, summary = collect(program)
        assert found == []
        assert summary.exhausted

    def test_empty_program_has_one_model(self):
        """Test the empty program has the empty answer set"""
        found, _ = collect(parse_program(""))
        assert found == [frozenset()]

    def test_positive_loop_is_not_self_supporting(self):
        """Test positive loops are rejected by the stability check"""
        program = parse_program("a :- b. b :- a. c :- not a.")
        found, _ = collect(program)
        assert [program.atom_names(m) for m in found] == [["c"]]

    def test_sum_constraint(self):
        """Test enumeration under a sum constraint"""
        program = parse_program(
            "a :- not na. na :- not a. b :- not nb. nb :- not b. :- #sum{1:a; 1:b} != 1."
        )
        found, _ = collect(program)
        visible = sorted(sorted(n for n in program.atom_names(m) if n in ("a", "b")) for m in found)
        assert visible == [["a"], ["b"]]

    def test_stop_ends_search(self):
        """Test STOP from the model hook ends the search"""
        program = parse_program("a :- not b. b :- not a.")
        found = []

        def first(model):
            found.append(model)
            return Control.STOP

        summary = enumerate_models(program, None, first)
        assert len(found) == 1
        assert not summary.exhausted

    def test_continue_keeps_searching(self):
        """Test CONTINUE from the model hook keeps searching"""
        program = parse_program("a :- not b. b :- not a.")
        found = []

        def every(model):
            found.append(model)
            return Control.CONTINUE

        summary = enumerate_models(program, None, every)
        assert len(found) == 2
        assert summary.exhausted

    def test_solver_is_single_use(self):
        """Test a solver runs one search"""
        solver = Solver(parse_program("a."))
        solver.enumerate()
        with pytest.raises(ContractError, match="single search"):
            solver.enumerate()

    def test_shuffled_branching_finds_same_models(self):
        """Test shuffled branching finds the same answer sets"""
        program = parse_program(generate_random(9, 16, 1, seed=11))
        fixed, _ = collect(program)
        shuffled, _ = collect(program, SearchConfig(branching="shuffled", seed=5))
        assert set(fixed) == set(shuffled)

    @pytest.mark.parametrize(
        "config",
        [SearchConfig(), SearchConfig(branching="shuffled", seed=5)],
        ids=["fixed", "shuffled"],
    )
    def test_repeated_runs_are_identical(self, config):
        """Test repeated runs give the same order and counters"""
        program = parse_program(generate_pn(3))
        first, first_summary = collect(program, config)
        second, second_summary = collect(program, config)
        assert first
        assert first == second
        assert first_summary.to_dict() == second_summary.to_dict()

    def test_unknown_branching(self):
        """Test unknown branching names are rejected"""
        with pytest.raises(ValueError, match="branching"):
            SearchConfig(branching="random")

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_oracle(self, seed):
        """Test enumeration against the oracle"""
        program = parse_program(generate_random(8, 12, 1, seed=seed))
        found, _ = collect(program, SearchConfig(oracle_verify=True))
        expected = {r.model for r in brute_force_aseo(program)}
        assert set(found) == expected


class TestPartialHook:
    """Test cases for the partial-assignment hook"""

    def test_nogood_prunes_subtree(self):
        """Test a nogood from the partial hook prunes its subtree"""
        program = parse_program("a :- not b. b :- not a. c :- not d. d :- not c.")
        a = Literal(program.atom_id("a"))
        c = Literal(program.atom_id("c"))

        def forbid_a_and_c(trail):
            if trail.value(a) and trail.value(c):
                return Nogood.of(a, c)
            return None

        found, summary = collect(program, on_partial=forbid_a_and_c)
        names = sorted(program.atom_names(m) for m in found)
        assert names == [["a", "d"], ["b", "c"], ["b", "d"]]
        assert summary.nogoods >= 1

    def test_nogood_survives_backtracking(self):
        """Test added nogoods stay after backtracking"""
        program = parse_program("a :- not b. b :- not a. c :- not d. d :- not c.")
        c = Literal(program.atom_id("c"))
        added = []

        def forbid_c_once(trail):
            if not added and trail.value(c):
                added.append(True)
                return Nogood.of(c)
            return None

        found, _ = collect(program, on_partial=forbid_c_once)
        assert all("c" not in program.atom_names(m) for m in found)
        assert len(found) == 2


class TestDeadline:
    """Test cases for the search deadline"""

    def test_passed_deadline_raises(self, mocker):
        """Test a passed deadline raises SearchTimeout"""
        mocker.patch("src.solver.time.monotonic", return_value=100.0)
        config = SearchConfig(deadline=50.0)
        with pytest.raises(SearchTimeout):
            enumerate_models(parse_program("a :- not b. b :- not a."), config)

    def test_with_timeout(self, mocker):
        """Test building a deadline from a timeout"""
        mocker.patch("src.solver.time.monotonic", return_value=10.0)
        config = SearchConfig.with_timeout(5, branching="shuffled", seed=1)
        assert config.deadline == 15.0
        assert config.branching == "shuffled"
        assert SearchConfig.with_timeout(None).deadline is None


class TestOptimize:
    """Test cases for solve_one and optimize"""

    def test_solve_one(self):
        """Test finding one answer set"""
        program = parse_program("a :- not b. b :- not a.")
        assert solve_one(program) is not None
        assert solve_one(parse_program("a :- not a.")) is None

    def test_optimize_three_way(self, three_way):
        """Test optimizing the sample program"""
        model, cost = optimize(three_way)
        assert cost == (1, 4, 1)
        assert three_way.atom_names(model) == ["s1", "u"]

    def test_optimize_unsat(self):
        """Test optimizing a program without answer sets"""
        assert optimize(parse_program("a :- not a. #minimize{1@1 : a}.")) is None

    def test_summary_accumulates(self, three_way):
        """Test optimize accumulates solver counters"""
        summary = EnumerationSummary()
        optimize(three_way, summary=summary)
        assert summary.models >= 1
        assert summary.decisions >= 1

    @pytest.mark.parametrize("seed", range(15))
    def test_optimize_matches_oracle(self, seed):
        """Test optimization against the oracle"""
        program = parse_program(generate_random(8, 12, 2, seed=seed))
        expected = brute_force_aseo(program)
        result = optimize(program)
        if not expected:
            assert result is None
        else:
            model, cost = result
            assert cost == expected[0].cost
            assert eval_cost(program, model) == cost
