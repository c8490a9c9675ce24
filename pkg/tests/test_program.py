"""
Tests for program module
"""

import itertools

import numpy as np
import pytest

from src.errors import ContractError, CostOverflowError, OracleLimitError
from src.parser import parse_program
from src.program import (
    INT64_MAX,
    Atom,
    Literal,
    ObjectiveFunction,
    Program,
    Relation,
    Rule,
    SumCondition,
    brute_force_aseo,
    checked_add,
    compare_lex,
    default_oracle_limit,
    eval_cost,
    eval_objective,
    is_answer_set,
    is_minimal_model,
    least_model,
    normalize_objectives,
    rank,
    reduct,
)


def signed_value(objective, model):
    """Minimization value of an objective before normalization"""
    total = sum(weight for weight, literal in objective.terms if literal.holds(model))
    return -total if objective.maximize else total


def names(program, model):
    return set(program.atom_names(model))


class TestRelation:
    """Test cases for Relation"""

    def test_holds(self):
        """Test relations on complete sums"""
        assert Relation.LE.holds(3, 3)
        assert not Relation.LT.holds(3, 3)
        assert Relation.GE.holds(4, 3)
        assert Relation.GT.holds(4, 3)
        assert Relation.EQ.holds(3, 3)
        assert Relation.NE.holds(2, 3)

    def test_decide_monotone(self):
        """Test deciding inequalities from sum bounds"""
        assert Relation.LE.decide(0, 3, 5) is True
        assert Relation.LE.decide(6, 9, 5) is False
        assert Relation.LE.decide(2, 9, 5) is None
        assert Relation.GT.decide(6, 9, 5) is True

    def test_decide_equality(self):
        """Test deciding equalities from sum bounds"""
        assert Relation.EQ.decide(2, 2, 2) is True
        assert Relation.EQ.decide(3, 5, 2) is False
        assert Relation.EQ.decide(1, 5, 2) is None
        assert Relation.NE.decide(3, 5, 2) is True
        assert Relation.NE.decide(2, 2, 2) is False
        assert Relation.NE.decide(1, 5, 2) is None


class TestCheckedArithmetic:
    """Test cases for 64-bit cost arithmetic"""

    def test_add_in_range(self):
        """Test checked addition within 64 bits"""
        assert checked_add(INT64_MAX - 1, 1) == INT64_MAX

    def test_add_overflow(self):
        """Test checked addition past 64 bits"""
        with pytest.raises(CostOverflowError, match="overflow"):
            checked_add(INT64_MAX, 1)

    def test_objective_overflow(self):
        """Test objective totals past 64 bits"""
        objective = ObjectiveFunction(1, ((INT64_MAX, Literal(0)), (1, Literal(1))))
        with pytest.raises(CostOverflowError):
            eval_objective(objective, {0, 1})


class TestProgram:
    """Test cases for Program construction"""

    def test_rejects_gapped_ids(self):
        """Test atom ids must be contiguous"""
        with pytest.raises(ContractError, match="contiguous"):
            Program((Atom(0, "a"), Atom(2, "b")))

    def test_rejects_unknown_atom_in_rule(self):
        """Test rules may only mention known atoms"""
        with pytest.raises(ContractError, match="unknown atom"):
            Program((Atom(0, "a"),), (Rule(0, frozenset([1])),))

    def test_rejects_unordered_levels(self):
        """Test objective levels must be 1..p in order"""
        with pytest.raises(ContractError, match="levels"):
            Program((Atom(0, "a"),), (), (ObjectiveFunction(2),))

    def test_extend_keeps_original(self):
        """Test extending a program leaves it unchanged"""
        program = parse_program("a :- not b. b :- not a.")
        extended = program.extend([Rule(None, frozenset([0]))])
        assert len(program.rules) == 2
        assert len(extended.rules) == 3
        assert extended.atoms == program.atoms

    def test_model_from_names(self):
        """Test building a model from atom names"""
        program = parse_program("a. b :- a.")
        model = program.model_from_names(["b", "a"])
        assert program.atom_names(model) == ["a", "b"]


class TestSemantics:
    """Test cases for reduct, least models and answer sets"""

    def test_least_model(self):
        """Test the least model of a positive program"""
        program = parse_program("a. b :- a. c :- b, d.")
        assert names(program, least_model(program)) == {"a", "b"}

    def test_least_model_rejects_negation(self):
        """Test least models need positive programs"""
        program = parse_program("a :- not b.")
        with pytest.raises(ContractError):
            least_model(program)

    def test_reduct_drops_blocked_rules(self):
        """Test the reduct drops rules blocked by the candidate"""
        program = parse_program("a :- not b. b :- not a. :- a, b.")
        positive = reduct(program, program.model_from_names(["a"]))
        assert len(positive.rules) == 1
        assert positive.rules[0].head == program.atom_id("a")
        assert not positive.rules[0].neg_body

    def test_answer_sets_of_choice(self):
        """Test the answer sets of an even loop"""
        program = parse_program("a :- not b. b :- not a.")
        assert is_answer_set(program, program.model_from_names(["a"]))
        assert is_answer_set(program, program.model_from_names(["b"]))
        assert not is_answer_set(program, program.model_from_names(["a", "b"]))
        assert not is_answer_set(program, frozenset())

    def test_unsupported_atoms_are_rejected(self):
        """Test unsupported atoms are not answer sets"""
        program = parse_program("a :- b. b :- a.")
        assert is_answer_set(program, frozenset())
        assert not is_answer_set(program, program.model_from_names(["a", "b"]))

    def test_constraint_kills_model(self):
        """Test constraints remove answer sets"""
        program = parse_program("a :- not b. b :- not a. :- a.")
        assert not is_answer_set(program, program.model_from_names(["a"]))

    def test_sum_body_in_reduct(self):
        """Test sum conditions in the reduct"""
        program = parse_program("x :- not y. y :- not x. z :- #sum{2:x; 1:y} >= 2.")
        assert is_answer_set(program, program.model_from_names(["x", "z"]))
        assert is_answer_set(program, program.model_from_names(["y"]))
        assert not is_answer_set(program, program.model_from_names(["y", "z"]))

    def test_definition_agrees_with_least_model_check(self):
        """Test both answer-set checks agree"""
        program = parse_program("a :- not b. b :- not a. c :- a. c :- b, d. d :- c, not a.")
        for models in range(2 ** program.size):
            candidate = frozenset(i for i in range(program.size) if models >> i & 1)
            assert is_answer_set(program, candidate) == is_minimal_model(program, candidate)


class TestCosts:
    """Test cases for cost evaluation and comparison"""

    def test_eval_cost_three_way(self, three_way):
        """Test cost vectors of the sample program"""
        assert eval_cost(three_way, three_way.model_from_names(["u", "s1"])) == (1, 4, 1)
        assert eval_cost(three_way, three_way.model_from_names(["u", "s2"])) == (1, 4, 7)
        assert eval_cost(three_way, three_way.model_from_names(["u", "s3"])) == (1, 7, 4)

    def test_compare_lex(self):
        """Test lexicographic comparison"""
        assert compare_lex((1, 4, 1), (1, 4, 7)) == -1
        assert compare_lex((1, 7, 4), (1, 4, 7)) == 1
        assert compare_lex((), ()) == 0

    def test_compare_lex_length_mismatch(self):
        """Test comparing vectors of different length"""
        with pytest.raises(ContractError, match="length"):
            compare_lex((1,), (1, 2))

    def test_normalize_negative_weight(self):
        """Test negative weights become complemented literals"""
        program = Program(
            (Atom(0, "a"),),
            (),
            (ObjectiveFunction(1, ((-3, Literal(0)),)),),
        )
        normalized = normalize_objectives(program)
        objective = normalized.objectives[0]
        assert objective.terms == ((3, Literal(0, False)),)
        assert objective.offset == -3
        # original value == normalized value + offset
        assert eval_objective(objective, {0}) + objective.offset == -3
        assert eval_objective(objective, set()) + objective.offset == 0

    def test_normalize_maximize(self):
        """Test maximization becomes minimization"""
        program = Program(
            (Atom(0, "a"),),
            (),
            (ObjectiveFunction(1, ((2, Literal(0)),), maximize=True),),
        )
        objective = normalize_objectives(program).objectives[0]
        assert objective.terms == ((2, Literal(0, False)),)
        assert not objective.maximize

    def test_normalize_is_identity_when_clean(self, three_way):
        """Test normalized programs are returned unchanged"""
        assert normalize_objectives(three_way) is three_way

    @pytest.mark.parametrize("seed", range(20))
    def test_normalize_preserves_pairwise_order(self, seed):
        """Test normalization keeps the order of every pair of answer sets"""
        rng = np.random.default_rng(seed)
        base = parse_program(" ".join(f"x{i} :- not y{i}. y{i} :- not x{i}." for i in range(4)))
        objectives = []
        for level, maximize in ((1, True), (2, False)):
            atoms = rng.choice(base.size, size=3, replace=False)
            weights = [-int(rng.integers(1, 6))] + [int(w) for w in rng.integers(-5, 6, size=2)]
            terms = tuple(
                (weight, Literal(int(atom), bool(rng.random() < 0.7))) for weight, atom in zip(weights, atoms)
            )
            objectives.append(ObjectiveFunction(level, terms, maximize=maximize))
        signed = base.with_objectives(objectives)
        normalized = normalize_objectives(signed)
        assert all(weight >= 0 for o in normalized.objectives for weight, _ in o.terms)

        models = [r.model for r in brute_force_aseo(normalized)]
        assert len(models) == 16
        original = {model: tuple(signed_value(o, model) for o in signed.objectives) for model in models}
        for model in models:
            shifted = tuple(v + o.offset for v, o in zip(eval_cost(normalized, model), normalized.objectives))
            assert shifted == original[model]
        for a, b in itertools.combinations(models, 2):
            expected = compare_lex(original[a], original[b])
            assert compare_lex(eval_cost(normalized, a), eval_cost(normalized, b)) == expected

    def test_rank_breaks_ties_canonically(self):
        """Test equal costs are ordered by atom ids"""
        program = parse_program("a :- not b. b :- not a.")
        ranked = rank(program, [frozenset([1]), frozenset([0])])
        assert [sorted(r.model) for r in ranked] == [[0], [1]]
        assert [r.index for r in ranked] == [0, 1]


class TestOracle:
    """Test cases for brute_force_aseo"""

    def test_three_way(self, three_way):
        """Test the oracle on the sample program"""
        ranked = brute_force_aseo(three_way)
        assert [r.cost for r in ranked] == [(1, 4, 1), (1, 4, 7), (1, 7, 4)]

    def test_empty_program(self):
        """Test the oracle on the empty program"""
        ranked = brute_force_aseo(parse_program(""))
        assert len(ranked) == 1
        assert ranked[0].model == frozenset()
        assert ranked[0].cost == ()

    def test_limit(self):
        """Test the oracle signature limit"""
        program = parse_program("a. b. c.")
        with pytest.raises(OracleLimitError):
            brute_force_aseo(program, limit=2)

    def test_limit_from_environment(self, monkeypatch):
        """Test the oracle limit from ASEO_ORACLE_LIMIT"""
        monkeypatch.setenv("ASEO_ORACLE_LIMIT", "5")
        assert default_oracle_limit() == 5
        monkeypatch.delenv("ASEO_ORACLE_LIMIT")
        assert default_oracle_limit() == 22

    def test_sum_condition_value(self):
        """Test sum condition normalization and evaluation"""
        condition = SumCondition.normalized([(2, Literal(0)), (-1, Literal(1))], Relation.GE, 1)
        # -1:b becomes 1:not b with bound shifted by +1
        assert condition.bound == 2
        assert condition.holds({0})
        assert condition.holds({0, 1})
        assert not condition.holds(set())
