"""
Aseo Program Module

Data model and reference semantics for ground normal logic programs with
prioritized pseudo-Boolean objectives: reduct, least model, answer-set check,
objective evaluation, lexicographic cost order and a brute-force oracle.
"""

import os
import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import ContractError, CostOverflowError, OracleLimitError

logger = logging.getLogger(__name__)

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)
DEFAULT_ORACLE_LIMIT = 22

AnswerSet = FrozenSet[int]
CostVector = Tuple[int, ...]


def checked_add(a: int, b: int) -> int:
    """Add two integers, failing instead of leaving the signed 64-bit range"""
    total = a + b
    if total > INT64_MAX or total < INT64_MIN:
        raise CostOverflowError(f"64-bit overflow in {a} + {b}")
    return total


def default_oracle_limit() -> int:
    """
    Get the brute-force oracle cap

    Returns:
        ASEO_ORACLE_LIMIT from the environment, or 22
    """
    value = os.getenv("ASEO_ORACLE_LIMIT")
    if value is None:
        return DEFAULT_ORACLE_LIMIT
    try:
        return int(value)
    except ValueError:
        logger.warning(f"Ignoring non-integer ASEO_ORACLE_LIMIT={value!r}")
        return DEFAULT_ORACLE_LIMIT


@dataclass(frozen=True)
class Atom:
    """An interned atom: dense id plus opaque name"""
    id: int
    name: str


@dataclass(frozen=True, order=True)
class Literal:
    """An atom `a` (positive) or its default negation `not a`"""
    atom: int
    positive: bool = True

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def holds(self, model: AbstractSet[int]) -> bool:
        """Satisfaction of the literal by a total assignment given as its true atoms"""
        return (self.atom in model) == self.positive


class Relation(Enum):
    """Comparison used by sum conditions"""
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"
    EQ = "="
    NE = "!="

    def holds(self, value: int, bound: int) -> bool:
        if self is Relation.LE:
            return value <= bound
        if self is Relation.LT:
            return value < bound
        if self is Relation.GE:
            return value >= bound
        if self is Relation.GT:
            return value > bound
        if self is Relation.EQ:
            return value == bound
        return value != bound

    def decide(self, lo: int, hi: int, bound: int) -> Optional[bool]:
        """
        Decide the relation for a sum known to lie in [lo, hi]

        Args:
            lo: Weight of terms already satisfied
            hi: lo plus the weight of terms still open
            bound: Right-hand side

        Returns:
            True/False when every value in the interval agrees, else None
        """
        if self is Relation.EQ:
            if bound < lo or bound > hi:
                return False
            return True if lo == hi else None
        if self is Relation.NE:
            if bound < lo or bound > hi:
                return True
            return False if lo == hi else None
        # the remaining relations are monotone in the sum
        at_lo = self.holds(lo, bound)
        if at_lo == self.holds(hi, bound):
            return at_lo
        return None


WeightedLiteral = Tuple[int, Literal]


def _normalize_terms(terms: Iterable[WeightedLiteral]) -> Tuple[Tuple[WeightedLiteral, ...], int]:
    """Rewrite (w, l) with w < 0 as (-w, not l); returns the new terms and the shift they introduce"""
    normalized = []
    shift = 0
    for weight, literal in terms:
        if weight < 0:
            normalized.append((-weight, literal.complement()))
            shift = checked_add(shift, weight)
        else:
            normalized.append((weight, literal))
    return tuple(normalized), shift


@dataclass(frozen=True)
class SumCondition:
    """#sum{w1:l1; ...} rel bound, as a rule body element"""
    terms: Tuple[WeightedLiteral, ...]
    relation: Relation
    bound: int

    @classmethod
    def normalized(cls, terms: Iterable[WeightedLiteral], relation: Relation, bound: int) -> "SumCondition":
        """Build a condition with non-negative weights, moving negative ones into the bound"""
        terms, shift = _normalize_terms(terms)
        # sum(original) = sum(normalized) + shift
        return cls(terms, relation, checked_add(bound, -shift))

    def value(self, model: AbstractSet[int]) -> int:
        total = 0
        for weight, literal in self.terms:
            if literal.holds(model):
                total = checked_add(total, weight)
        return total

    def holds(self, model: AbstractSet[int]) -> bool:
        return self.relation.holds(self.value(model), self.bound)

    def total_weight(self) -> int:
        total = 0
        for weight, _ in self.terms:
            total = checked_add(total, weight)
        return total


@dataclass(frozen=True)
class Rule:
    """
    A normal rule `head :- pos, not neg, sum.`

    A missing head makes the rule a constraint.
    """
    head: Optional[int]
    pos_body: FrozenSet[int] = frozenset()
    neg_body: FrozenSet[int] = frozenset()
    sum_body: Optional[SumCondition] = None

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    def body_holds(self, model: AbstractSet[int]) -> bool:
        if not self.pos_body <= model:
            return False
        if not self.neg_body.isdisjoint(model):
            return False
        return self.sum_body is None or self.sum_body.holds(model)

    def atoms(self) -> FrozenSet[int]:
        mentioned = set(self.pos_body) | set(self.neg_body)
        if self.head is not None:
            mentioned.add(self.head)
        if self.sum_body is not None:
            mentioned.update(literal.atom for _, literal in self.sum_body.terms)
        return frozenset(mentioned)


@dataclass(frozen=True)
class ObjectiveFunction:
    """Pseudo-Boolean expression at one priority level (1 = most important)"""
    level: int
    terms: Tuple[WeightedLiteral, ...] = ()
    offset: int = 0
    maximize: bool = False

    def total_weight(self) -> int:
        total = 0
        for weight, _ in self.terms:
            total = checked_add(total, weight)
        return total


@dataclass(frozen=True)
class RankedModel:
    """An answer set with its cost vector and its position in a ranking"""
    model: AnswerSet
    cost: CostVector
    index: int


@dataclass(frozen=True)
class Program:
    """
    A ground normal program over an interned signature

    Attributes:
        atoms: Signature table, atoms[i].id == i
        rules: Rules and constraints
        objectives: Objective functions sorted by level 1..p
    """
    atoms: Tuple[Atom, ...] = ()
    rules: Tuple[Rule, ...] = ()
    objectives: Tuple[ObjectiveFunction, ...] = ()
    _index: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        for position, atom in enumerate(self.atoms):
            if atom.id != position:
                raise ContractError(f"Atom ids must be contiguous, got {atom.id} at {position}")
            if atom.name in self._index:
                raise ContractError(f"Duplicate atom name: {atom.name}")
            self._index[atom.name] = atom.id

        size = len(self.atoms)
        for rule in self.rules:
            for atom_id in rule.atoms():
                if not 0 <= atom_id < size:
                    raise ContractError(f"Rule mentions unknown atom id {atom_id}")
        for position, objective in enumerate(self.objectives, start=1):
            if objective.level != position:
                raise ContractError(f"Objective levels must be 1..p in order, got {objective.level}")
            for _, literal in objective.terms:
                if not 0 <= literal.atom < size:
                    raise ContractError(f"Objective mentions unknown atom id {literal.atom}")

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def levels(self) -> int:
        return len(self.objectives)

    def atom_id(self, name: str) -> int:
        return self._index[name]

    def atom_names(self, model: Iterable[int]) -> List[str]:
        """Sorted atom names of a model"""
        return sorted(self.atoms[a].name for a in model)

    def model_from_names(self, names: Iterable[str]) -> AnswerSet:
        return frozenset(self._index[name] for name in names)

    def extend(self, rules: Iterable[Rule]) -> "Program":
        """A copy of the program with extra rules appended"""
        return Program(self.atoms, self.rules + tuple(rules), self.objectives)

    def with_objectives(self, objectives: Sequence[ObjectiveFunction]) -> "Program":
        return Program(self.atoms, self.rules, tuple(objectives))


def reduct(program: Program, candidate: AbstractSet[int]) -> Program:
    """
    Gelfond-Lifschitz reduct of the program with respect to a candidate set

    Constraints are dropped; rules blocked by the candidate are dropped; sum
    conditions are evaluated under the candidate and removed.

    Args:
        program: Input program
        candidate: Set of atom ids

    Returns:
        Positive program over the same signature
    """
    kept = []
    for rule in program.rules:
        if rule.is_constraint:
            continue
        if not rule.neg_body.isdisjoint(candidate):
            continue
        if rule.sum_body is not None and not rule.sum_body.holds(candidate):
            continue
        kept.append(Rule(rule.head, rule.pos_body))
    return Program(program.atoms, tuple(kept))


def least_model(positive_program: Program) -> FrozenSet[int]:
    """
    Least model of a positive program by forward chaining from the empty set

    Args:
        positive_program: Program without negative bodies, sums or constraints

    Returns:
        The unique subset-minimal closed set of atoms
    """
    waiting: Dict[int, List[int]] = {}
    missing = []
    derived = set()
    agenda = []

    for index, rule in enumerate(positive_program.rules):
        if rule.is_constraint or rule.neg_body or rule.sum_body is not None:
            raise ContractError("least_model expects a positive program")
        missing.append(len(rule.pos_body))
        for atom in rule.pos_body:
            waiting.setdefault(atom, []).append(index)
        if not rule.pos_body:
            agenda.append(rule.head)

    while agenda:
        atom = agenda.pop()
        if atom in derived:
            continue
        derived.add(atom)
        for index in waiting.get(atom, ()):
            missing[index] -= 1
            if missing[index] == 0:
                agenda.append(positive_program.rules[index].head)

    return frozenset(derived)


def violates_constraints(program: Program, candidate: AbstractSet[int]) -> bool:
    return any(rule.is_constraint and rule.body_holds(candidate) for rule in program.rules)


def is_answer_set(program: Program, candidate: AbstractSet[int]) -> bool:
    """
    Check whether a set of atoms is an answer set

    Args:
        program: Input program
        candidate: Set of atom ids

    Returns:
        True iff no constraint fires and the candidate is the least model of its reduct
    """
    candidate = frozenset(candidate)
    if violates_constraints(program, candidate):
        return False
    return least_model(reduct(program, candidate)) == candidate


def is_minimal_model(program: Program, candidate: AbstractSet[int]) -> bool:
    """
    Answer-set check by definition: the candidate satisfies the constraints, is
    closed under its reduct, and no proper subset is. Exponential; for testing.
    """
    candidate = frozenset(candidate)
    if violates_constraints(program, candidate):
        return False
    positive = reduct(program, candidate)

    def closed(atoms: FrozenSet[int]) -> bool:
        return all(rule.head in atoms for rule in positive.rules if rule.pos_body <= atoms)

    if not closed(candidate):
        return False
    members = sorted(candidate)
    for size in range(len(members)):
        for subset in itertools.combinations(members, size):
            if closed(frozenset(subset)):
                return False
    return True


def eval_objective(objective: ObjectiveFunction, model: AbstractSet[int]) -> int:
    """Sum of the weights of the literals the model satisfies"""
    total = 0
    for weight, literal in objective.terms:
        if literal.holds(model):
            total = checked_add(total, weight)
    return total


def eval_cost(program: Program, model: AbstractSet[int]) -> CostVector:
    """Cost vector <f_1(A), ..., f_p(A)>"""
    return tuple(eval_objective(objective, model) for objective in program.objectives)


def compare_lex(a: Sequence[int], b: Sequence[int]) -> int:
    """
    Lexicographic comparison, level 1 most significant

    Returns:
        -1, 0 or 1
    """
    if len(a) != len(b):
        raise ContractError(f"Cost vectors differ in length: {len(a)} vs {len(b)}")
    for left, right in zip(a, b):
        if left != right:
            return -1 if left < right else 1
    return 0


def normalize_objectives(program: Program) -> Program:
    """
    Rewrite objectives into non-negative minimization form

    Maximized levels are negated; every term (w, l) with w < 0 becomes
    (-w, not l) and w is added to the level's offset, so that
    original minimization value == normalized value + offset.

    Args:
        program: Program whose objectives may carry negative weights or maximize flags

    Returns:
        Program with the same rules and normalized objectives
    """
    normalized = []
    for objective in program.objectives:
        terms = objective.terms
        offset = objective.offset
        if objective.maximize:
            terms = tuple((-weight, literal) for weight, literal in terms)
            offset = -offset
        terms, shift = _normalize_terms(terms)
        normalized.append(ObjectiveFunction(objective.level, terms, checked_add(offset, shift)))
    if tuple(normalized) == program.objectives:
        return program
    return program.with_objectives(normalized)


def canonical_key(model: AbstractSet[int]) -> Tuple[int, ...]:
    """Deterministic order on answer sets: sorted atom-id sequences"""
    return tuple(sorted(model))


def rank(program: Program, models: Iterable[AnswerSet]) -> List[RankedModel]:
    """Sort models by cost, then canonical order, and number them"""
    scored = [(eval_cost(program, model), canonical_key(model), model) for model in models]
    scored.sort(key=lambda item: (item[0], item[1]))
    return [RankedModel(model, cost, index) for index, (cost, _, model) in enumerate(scored)]


def brute_force_aseo(program: Program, limit: Optional[int] = None) -> List[RankedModel]:
    """
    Reference oracle: test every subset of the signature

    Args:
        program: Input program
        limit: Largest signature accepted (ASEO_ORACLE_LIMIT or 22 if None)

    Returns:
        All answer sets ranked by cost, ties broken canonically
    """
    limit = default_oracle_limit() if limit is None else limit
    if program.size > limit:
        raise OracleLimitError(program.size, limit)

    atoms = range(program.size)
    found = []
    for size in range(program.size + 1):
        for subset in itertools.combinations(atoms, size):
            candidate = frozenset(subset)
            if is_answer_set(program, candidate):
                found.append(candidate)
    logger.debug(f"Oracle found {len(found)} answer sets over {program.size} atoms")
    return rank(program, found)


def renumber(models: Sequence[RankedModel]) -> List[RankedModel]:
    """Assign emission positions 0..n-1"""
    return [replace(model, index=index) for index, model in enumerate(models)]
