"""
Aseo Solver Module

Native search engine for ground normal programs. It plays three roles:
plain enumeration of answer sets, finding one answer set, and lexicographic
optimization. Propagation covers rule bodies, constraints, sum bounds,
nogoods and support; stability is confirmed on total assignments with a
reduct check. Backtracking is chronological and nothing is learned.
"""

import time
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Deque, Dict, FrozenSet, Iterator, List, Optional, Tuple

import numpy as np

from .errors import ContractError, SearchTimeout, VerificationError
from .program import (
    AnswerSet,
    CostVector,
    Literal,
    ObjectiveFunction,
    Program,
    Relation,
    Rule,
    SumCondition,
    checked_add,
    default_oracle_limit,
    eval_cost,
    eval_objective,
    is_answer_set,
)

logger = logging.getLogger(__name__)


class Reason(Enum):
    """Why a literal is on the trail"""
    DECISION = "decision"
    PROPAGATED = "propagated"


class Control(Enum):
    """Answer of a model hook"""
    CONTINUE = "continue"
    STOP = "stop"


@dataclass(frozen=True)
class TrailEntry:
    literal: Literal
    level: int
    reason: Reason


@dataclass(frozen=True)
class Nogood:
    """Literals that no answer set may contain together"""
    literals: FrozenSet[Literal]

    @classmethod
    def of(cls, *literals: Literal) -> "Nogood":
        return cls(frozenset(literals))


class Trail:
    """
    Partial assignment grown by decisions and propagation

    Literals are appended at the current decision level and removed only by
    backtracking whole levels.
    """

    def __init__(self, size: int):
        """
        Initialize an empty trail

        Args:
            size: Number of atoms in the signature
        """
        self.entries: List[TrailEntry] = []
        self.values: List[Optional[bool]] = [None] * size
        self._level_starts: List[int] = []

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Literal]:
        return (entry.literal for entry in self.entries)

    @property
    def level(self) -> int:
        return len(self._level_starts)

    def value(self, literal: Literal) -> Optional[bool]:
        """True/False if the literal is decided, None if its atom is open"""
        current = self.values[literal.atom]
        if current is None:
            return None
        return current == literal.positive

    def push(self, literal: Literal, reason: Reason):
        if self.values[literal.atom] is not None:
            raise ContractError(f"Atom {literal.atom} is already assigned")
        self.values[literal.atom] = literal.positive
        self.entries.append(TrailEntry(literal, self.level, reason))

    def new_level(self):
        self._level_starts.append(len(self.entries))

    def backtrack(self, level: int) -> List[Literal]:
        """
        Remove every literal above a decision level

        Args:
            level: Level to return to

        Returns:
            Removed literals, most recent first
        """
        if level >= self.level:
            return []
        start = self._level_starts[level]
        removed = [entry.literal for entry in reversed(self.entries[start:])]
        del self.entries[start:]
        del self._level_starts[level:]
        for literal in removed:
            self.values[literal.atom] = None
        return removed

    def literals(self) -> FrozenSet[Literal]:
        return frozenset(entry.literal for entry in self.entries)

    def is_total(self) -> bool:
        return len(self.entries) == len(self.values)

    def true_atoms(self) -> AnswerSet:
        return frozenset(atom for atom, value in enumerate(self.values) if value)


class SearchConfig:
    """Configuration for the search engine"""

    def __init__(
        self,
        branching: str = "fixed",
        seed: Optional[int] = None,
        oracle_verify: Optional[bool] = None,
        oracle_limit: Optional[int] = None,
        deadline: Optional[float] = None
    ):
        """
        Initialize search configuration

        Args:
            branching: "fixed" (atom-index order) or "shuffled" (seeded permutation)
            seed: Seed for the shuffled order
            oracle_verify: Re-check every model with the reference semantics
                (None: only when the signature fits the oracle limit)
            oracle_limit: Signature size for automatic verification (None: ASEO_ORACLE_LIMIT or 22)
            deadline: time.monotonic() value after which search raises SearchTimeout
        """
        if branching not in ("fixed", "shuffled"):
            raise ValueError(f"Unsupported branching: {branching}")
        self.branching = branching
        self.seed = seed
        self.oracle_verify = oracle_verify
        self.oracle_limit = oracle_limit
        self.deadline = deadline

    @classmethod
    def with_timeout(cls, seconds: Optional[float], **kwargs) -> "SearchConfig":
        """Build a config whose deadline lies the given number of seconds ahead"""
        deadline = None if seconds is None else time.monotonic() + seconds
        return cls(deadline=deadline, **kwargs)


@dataclass
class EnumerationSummary:
    """Counters reported by a search"""
    models: int = 0
    decisions: int = 0
    conflicts: int = 0
    nogoods: int = 0
    unstable: int = 0
    exhausted: bool = False

    def merge(self, other: "EnumerationSummary"):
        self.models += other.models
        self.decisions += other.decisions
        self.conflicts += other.conflicts
        self.nogoods += other.nogoods
        self.unstable += other.unstable

    def to_dict(self) -> Dict:
        return {
            "models": self.models,
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "nogoods": self.nogoods,
            "unstable": self.unstable,
        }


PartialHook = Callable[[Trail], Optional[Nogood]]
ModelHook = Callable[[AnswerSet], Optional[Control]]


class Solver:
    """Enumerates the answer sets of one program; one search per instance"""

    def __init__(self, program: Program, config: Optional[SearchConfig] = None):
        """
        Initialize the solver

        Args:
            program: Program to search
            config: Search configuration
        """
        self.program = program
        self.config = config or SearchConfig()
        self.trail = Trail(program.size)
        self.summary = EnumerationSummary()

        size = program.size
        self._rules = program.rules
        self._heads: List[List[int]] = [[] for _ in range(size)]
        self._occurs: List[List[int]] = [[] for _ in range(size)]
        self._positive_in: List[List[int]] = [[] for _ in range(size)]
        self._sum_terms: List[List[Tuple[int, int, bool]]] = [[] for _ in range(size)]
        self._sum_sat = [0] * len(self._rules)
        self._sum_open = [0] * len(self._rules)

        for index, rule in enumerate(self._rules):
            mentioned = set(rule.pos_body) | set(rule.neg_body)
            if rule.head is not None:
                self._heads[rule.head].append(index)
                for atom in rule.pos_body:
                    self._positive_in[atom].append(index)
            if rule.sum_body is not None:
                for weight, literal in rule.sum_body.terms:
                    self._sum_terms[literal.atom].append((index, weight, literal.positive))
                    self._sum_open[index] = checked_add(self._sum_open[index], weight)
                    mentioned.add(literal.atom)
            for atom in mentioned:
                self._occurs[atom].append(index)

        self._nogoods: List[Nogood] = []
        self._watches: List[List[Nogood]] = [[] for _ in range(size)]
        # nogoods to re-check when search backtracks to or below their level
        self._recheck: Dict[int, List[Nogood]] = {}
        self._queue: Deque[int] = deque()
        self._decisions: List[Tuple[Literal, bool]] = []
        self._order = self._branching_order()
        self._started = False

        limit = self.config.oracle_limit
        limit = default_oracle_limit() if limit is None else limit
        if self.config.oracle_verify is None:
            self._verify = size <= limit
        else:
            self._verify = self.config.oracle_verify

    def _branching_order(self) -> List[int]:
        if self.config.branching == "shuffled":
            rng = np.random.default_rng(self.config.seed)
            return [int(atom) for atom in rng.permutation(self.program.size)]
        return list(range(self.program.size))

    # assignment bookkeeping

    def _assign(self, literal: Literal, reason: Reason):
        self.trail.push(literal, reason)
        for index, weight, positive in self._sum_terms[literal.atom]:
            self._sum_open[index] -= weight
            if positive == literal.positive:
                self._sum_sat[index] += weight
        self._queue.append(literal.atom)

    def _undo(self, level: int):
        for literal in self.trail.backtrack(level):
            for index, weight, positive in self._sum_terms[literal.atom]:
                self._sum_open[index] += weight
                if positive == literal.positive:
                    self._sum_sat[index] -= weight

    def _imply(self, literal: Literal) -> bool:
        current = self.trail.values[literal.atom]
        if current is None:
            self._assign(literal, Reason.PROPAGATED)
            return True
        return current == literal.positive

    def _conflict(self) -> bool:
        self._queue.clear()
        self.summary.conflicts += 1
        return False

    # propagation

    def _sum_state(self, index: int) -> Optional[bool]:
        condition = self._rules[index].sum_body
        low = self._sum_sat[index]
        return condition.relation.decide(low, low + self._sum_open[index], condition.bound)

    def _body_state(self, index: int) -> Tuple[Optional[bool], Optional[Literal]]:
        """
        Three-valued body status

        Returns:
            (False, None) if the body is falsified, (True, None) if satisfied,
            (None, literal) if exactly one ordinary literal is open and all else holds,
            (None, None) otherwise
        """
        rule = self._rules[index]
        values = self.trail.values
        open_count = 0
        unit = None

        for atom in rule.pos_body:
            value = values[atom]
            if value is False:
                return False, None
            if value is None:
                open_count += 1
                unit = Literal(atom, True)
        for atom in rule.neg_body:
            value = values[atom]
            if value is True:
                return False, None
            if value is None:
                open_count += 1
                unit = Literal(atom, False)
        if rule.sum_body is not None:
            state = self._sum_state(index)
            if state is False:
                return False, None
            if state is None:
                open_count += 1
                unit = None

        if open_count == 0:
            return True, None
        if open_count == 1:
            return None, unit
        return None, None

    def _check_rule(self, index: int) -> bool:
        rule = self._rules[index]
        state, unit = self._body_state(index)
        if rule.head is None:
            if state is True:
                return False
            if unit is not None:
                return self._imply(unit.complement())
            return True
        if state is True:
            return self._imply(Literal(rule.head, True))
        if unit is not None and self.trail.values[rule.head] is False:
            return self._imply(unit.complement())
        return True

    def _check_support(self, atom: int) -> bool:
        value = self.trail.values[atom]
        if value is False:
            return True

        support = None
        for index in self._heads[atom]:
            state, _ = self._body_state(index)
            if state is not False:
                if support is not None:
                    return True
                support = index

        if support is None:
            return self._imply(Literal(atom, False))
        if value is True:
            rule = self._rules[support]
            for body_atom in rule.pos_body:
                if not self._imply(Literal(body_atom, True)):
                    return False
            for body_atom in rule.neg_body:
                if not self._imply(Literal(body_atom, False)):
                    return False
        return True

    def _check_nogood(self, nogood: Nogood) -> bool:
        unit = None
        for literal in nogood.literals:
            state = self.trail.value(literal)
            if state is False:
                return True
            if state is None:
                if unit is not None:
                    return True
                unit = literal
        if unit is None:
            return False
        return self._imply(unit.complement())

    def _propagate(self) -> bool:
        while self._queue:
            atom = self._queue.popleft()
            for index in self._occurs[atom]:
                if not self._check_rule(index):
                    return self._conflict()
                head = self._rules[index].head
                if head is not None and not self._check_support(head):
                    return self._conflict()
            for index in self._heads[atom]:
                if not self._check_rule(index):
                    return self._conflict()
            if not self._check_support(atom):
                return self._conflict()
            for nogood in self._watches[atom]:
                if not self._check_nogood(nogood):
                    return self._conflict()
        return True

    def _start(self) -> bool:
        for index in range(len(self._rules)):
            if not self._check_rule(index):
                return self._conflict()
        for atom in range(self.program.size):
            if not self._check_support(atom):
                return self._conflict()
        for nogood in self._nogoods:
            if not self._check_nogood(nogood):
                return self._conflict()
        return True

    def add_nogood(self, nogood: Nogood) -> bool:
        """
        Add a nogood permanently

        Args:
            nogood: Literals forbidden together

        Returns:
            False if the current trail already violates it
        """
        self._nogoods.append(nogood)
        self.summary.nogoods += 1
        for literal in nogood.literals:
            self._watches[literal.atom].append(nogood)
        self._recheck.setdefault(self.trail.level, []).append(nogood)
        logger.debug(f"Added nogood over {len(nogood.literals)} literals")
        if not self._check_nogood(nogood):
            return self._conflict()
        return True

    # search

    def _next_atom(self) -> Optional[int]:
        values = self.trail.values
        for atom in self._order:
            if values[atom] is None:
                return atom
        return None

    def _decide(self, atom: int):
        deadline = self.config.deadline
        if deadline is not None and time.monotonic() > deadline:
            raise SearchTimeout(f"Search deadline passed after {self.summary.models} models")
        literal = Literal(atom, True)
        self.summary.decisions += 1
        self.trail.new_level()
        self._decisions.append((literal, False))
        self._assign(literal, Reason.DECISION)

    def _backtrack(self) -> bool:
        """Flip the deepest unflipped decision; False when the search space is exhausted"""
        while self._decisions:
            literal, flipped = self._decisions.pop()
            level = self.trail.level
            self._undo(level - 1)
            if flipped:
                continue

            self.trail.new_level()
            flip = literal.complement()
            self._decisions.append((flip, True))
            self._assign(flip, Reason.DECISION)

            stale = []
            for added_at in [key for key in self._recheck if key >= level]:
                stale.extend(self._recheck.pop(added_at))
            if stale:
                self._recheck.setdefault(level, []).extend(stale)
            if all(self._check_nogood(nogood) for nogood in stale):
                return True
            self._conflict()
        return False

    def _is_stable(self) -> bool:
        """Least model of the reduct equals the current total assignment"""
        values = self.trail.values
        missing: Dict[int, int] = {}
        agenda = []
        for atom_rules in self._heads:
            for index in atom_rules:
                rule = self._rules[index]
                if any(values[atom] for atom in rule.neg_body):
                    continue
                if rule.sum_body is not None and not self._sum_state(index):
                    continue
                missing[index] = len(rule.pos_body)
                if not rule.pos_body:
                    agenda.append(rule.head)

        derived = set()
        while agenda:
            atom = agenda.pop()
            if atom in derived:
                continue
            if not values[atom]:
                return False
            derived.add(atom)
            for index in self._positive_in[atom]:
                if index in missing:
                    missing[index] -= 1
                    if missing[index] == 0:
                        agenda.append(self._rules[index].head)

        return len(derived) == sum(1 for value in values if value)

    def _consult(self, on_partial: Optional[PartialHook]) -> bool:
        if on_partial is None:
            return True
        nogood = on_partial(self.trail)
        if nogood is None:
            return True
        return self.add_nogood(nogood)

    def enumerate(
        self,
        on_model: Optional[ModelHook] = None,
        on_partial: Optional[PartialHook] = None
    ) -> EnumerationSummary:
        """
        Enumerate answer sets one at a time

        Args:
            on_model: Called once per answer set; returning STOP ends the search
            on_partial: Called at every propagation fixpoint; a returned nogood
                is added permanently and the subtree it excludes is abandoned

        Returns:
            Search counters
        """
        if self._started:
            raise ContractError("A Solver instance runs a single search")
        self._started = True

        if not self._start():
            self.summary.exhausted = True
            return self.summary

        while True:
            if self._propagate() and self._consult(on_partial):
                if self._queue:
                    continue
                atom = self._next_atom()
                if atom is not None:
                    self._decide(atom)
                    continue

                if self._is_stable():
                    model = self.trail.true_atoms()
                    if self._verify and not is_answer_set(self.program, model):
                        raise VerificationError(model)
                    self.summary.models += 1
                    logger.debug(f"Answer set {self.summary.models}: {sorted(model)}")
                    if on_model is not None and on_model(model) is Control.STOP:
                        return self.summary
                else:
                    self.summary.unstable += 1

            if not self._backtrack():
                self.summary.exhausted = True
                return self.summary


def enumerate_models(
    program: Program,
    config: Optional[SearchConfig] = None,
    on_model: Optional[ModelHook] = None,
    on_partial: Optional[PartialHook] = None
) -> EnumerationSummary:
    """Run one enumeration on a fresh solver"""
    return Solver(program, config).enumerate(on_model, on_partial)


def solve_one(
    program: Program,
    config: Optional[SearchConfig] = None,
    summary: Optional[EnumerationSummary] = None
) -> Optional[AnswerSet]:
    """
    Find the first answer set in search order

    Args:
        program: Program to solve
        config: Search configuration
        summary: Counters to accumulate into

    Returns:
        An answer set, or None if the program has none
    """
    found: List[AnswerSet] = []

    def keep_first(model: AnswerSet) -> Control:
        found.append(model)
        return Control.STOP

    solver = Solver(program, config)
    result = solver.enumerate(keep_first)
    if summary is not None:
        summary.merge(result)
    return found[0] if found else None


def _bound_constraint(objective: ObjectiveFunction, relation: Relation, value: int) -> Rule:
    return Rule(None, sum_body=SumCondition(objective.terms, relation, value))


def optimize(
    program: Program,
    config: Optional[SearchConfig] = None,
    summary: Optional[EnumerationSummary] = None
) -> Optional[Tuple[AnswerSet, CostVector]]:
    """
    Find a lexicographically optimal answer set by iterated model improvement

    Level by level, a constraint demanding a strictly smaller value at the
    current level is added until the program becomes unsatisfiable; the level
    is then fixed at its best value. Every call runs on a fresh solver.

    Args:
        program: Program with normalized objectives
        config: Search configuration
        summary: Counters to accumulate into

    Returns:
        (answer set, cost vector), or None if the program has no answer set
    """
    best = solve_one(program, config, summary)
    if best is None:
        return None

    working = program
    for objective in program.objectives:
        while True:
            value = eval_objective(objective, best)
            improving = working.extend([_bound_constraint(objective, Relation.GE, value)])
            better = solve_one(improving, config, summary)
            if better is None:
                break
            best = better
        value = eval_objective(objective, best)
        working = working.extend([_bound_constraint(objective, Relation.NE, value)])

    cost = eval_cost(program, best)
    logger.debug(f"Optimum {cost}")
    return best, cost
