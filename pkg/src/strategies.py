"""
Aseo Strategies Module

Answer set enumeration by optimality: the naive sort-everything baseline,
weight enumeration (optimize, enumerate the equal-cost class, then tighten
sum constraints) and smart enumeration (top-k window with threshold nogoods).
"""

import bisect
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import ContractError
from .program import (
    AnswerSet,
    CostVector,
    ObjectiveFunction,
    Program,
    RankedModel,
    Relation,
    Rule,
    SumCondition,
    checked_add,
    compare_lex,
    eval_cost,
    renumber,
)
from .solver import (
    Control,
    EnumerationSummary,
    Nogood,
    SearchConfig,
    Trail,
    enumerate_models,
    optimize,
)

logger = logging.getLogger(__name__)

ALL = None

Sink = Callable[[RankedModel], None]
# ("eq" | "gt", level, value)
BoundSpec = Tuple[str, int, int]


class Mode(Enum):
    """Enumeration strategy"""
    NAIVE = "naive"
    WEIGHT = "weight"
    SMART = "smart"


def _check_k(k: Optional[int]):
    if k is not None and (not isinstance(k, int) or k < 1):
        raise ContractError(f"k must be a positive integer or ALL, got {k!r}")


def build_constraint_gt(objective: ObjectiveFunction, bound: int) -> Rule:
    """
    Constraint `:- #sum{terms} <= bound.`

    Answer sets that survive it have f_i(A) > bound.
    """
    if bound < 0:
        raise ContractError(f"Bound must be non-negative, got {bound}")
    return Rule(None, sum_body=SumCondition(objective.terms, Relation.LE, bound))


def build_constraint_eq(objective: ObjectiveFunction, value: int) -> Rule:
    """
    Constraint `:- #sum{terms} != value.`

    Answer sets that survive it have f_i(A) = value.
    """
    if value < 0:
        raise ContractError(f"Value must be non-negative, got {value}")
    return Rule(None, sum_body=SumCondition(objective.terms, Relation.NE, value))


def naive_enumerate(
    program: Program,
    k: Optional[int] = ALL,
    config: Optional[SearchConfig] = None,
    summary: Optional[EnumerationSummary] = None
) -> List[RankedModel]:
    """
    Enumerate every answer set, then sort by cost

    Memory grows with the number of answer sets.

    Args:
        program: Program with normalized objectives
        k: Number of models to return, ALL for every answer set
        config: Search configuration
        summary: Counters to accumulate into

    Returns:
        Ranked models, cost non-decreasing, ties in discovery order
    """
    _check_k(k)
    found: List[Tuple[CostVector, int, AnswerSet]] = []

    def record(model: AnswerSet):
        found.append((eval_cost(program, model), len(found), model))

    result = enumerate_models(program, config, on_model=record)
    if summary is not None:
        summary.merge(result)

    found.sort(key=lambda item: (item[0], item[1]))
    if k is not None:
        found = found[:k]
    logger.info(f"Naive enumeration ranked {len(found)} of {result.models} answer sets")
    return [RankedModel(model, cost, index) for index, (cost, _, model) in enumerate(found)]


@dataclass
class WeightSummary:
    """Outcome of weight enumeration"""
    emitted: int = 0
    optimize_calls: int = 0
    unsat_at_first_optimize: bool = False
    solver: EnumerationSummary = field(default_factory=EnumerationSummary)
    # the constraint set handed to each optimize call, in call order
    trace: List[Tuple[BoundSpec, ...]] = field(default_factory=list)


def _bound_rules(program: Program, bounds: Sequence[BoundSpec]) -> List[Rule]:
    rules = []
    for kind, level, value in bounds:
        objective = program.objectives[level - 1]
        if kind == "eq":
            rules.append(build_constraint_eq(objective, value))
        else:
            rules.append(build_constraint_gt(objective, value))
    return rules


def _next_bounds(costs: CostVector, level: int) -> List[BoundSpec]:
    """Equalities on levels below `level`, strictly worse at `level`"""
    bounds: List[BoundSpec] = [("eq", i, costs[i - 1]) for i in range(1, level)]
    bounds.append(("gt", level, costs[level - 1]))
    return bounds


def weight_enumerate(
    program: Program,
    k: Optional[int] = ALL,
    sink: Optional[Sink] = None,
    config: Optional[SearchConfig] = None
) -> WeightSummary:
    """
    Stream answer sets in non-decreasing cost order by constraining the program

    Each round optimizes the input program plus at most p bound constraints,
    enumerates the whole class of answer sets sharing the optimum's cost,
    and then demands a strictly worse value at the last level. When no such
    answer set exists the bounds are relaxed one level up. Every round
    starts from the input program on fresh solvers.

    Args:
        program: Program with normalized objectives
        k: Stop after this many models, ALL to exhaust the answer sets
        sink: Receives each model as soon as it is found
        config: Search configuration

    Returns:
        Counters and the constraint trace
    """
    _check_k(k)
    summary = WeightSummary()
    sink = sink or (lambda ranked: None)

    def emit(model: AnswerSet) -> Control:
        sink(RankedModel(model, eval_cost(program, model), summary.emitted))
        summary.emitted += 1
        if k is not None and summary.emitted >= k:
            return Control.STOP
        return Control.CONTINUE

    levels = program.levels
    if levels == 0:
        summary.solver.merge(enumerate_models(program, config, emit))
        return summary

    level = levels
    bounds: List[BoundSpec] = []
    costs: Optional[CostVector] = None

    while level >= 1:
        summary.trace.append(tuple(bounds))
        summary.optimize_calls += 1
        result = optimize(program.extend(_bound_rules(program, bounds)), config, summary.solver)

        if result is None:
            if summary.emitted == 0:
                summary.unsat_at_first_optimize = True
                logger.info("Program has no answer sets")
                return summary
            if level == 1:
                break
            level -= 1
            bounds = _next_bounds(costs, level)
            logger.info(f"No answer set left at level {level + 1}, relaxing to {bounds}")
            continue

        model, costs = result
        logger.info(f"Optimal cost under {list(bounds)}: {costs}")
        equal_class = [("eq", i, costs[i - 1]) for i in range(1, levels + 1)]
        found = enumerate_models(program.extend(_bound_rules(program, equal_class)), config, emit)
        summary.solver.merge(found)
        if k is not None and summary.emitted >= k:
            return summary

        level = levels
        bounds = _next_bounds(costs, level)

    logger.info(f"Weight enumeration finished after {summary.emitted} models")
    return summary


class TopKWindow:
    """The k best models seen so far, sorted by cost then discovery"""

    def __init__(self, k: int):
        """
        Initialize an empty window

        Args:
            k: Capacity
        """
        self.k = k
        self.entries: List[RankedModel] = []
        self._costs: List[CostVector] = []
        self._discovered = 0

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.k

    @property
    def threshold(self) -> Optional[CostVector]:
        """Cost of the k-th entry, or None (+infinity) while the window is not full"""
        if not self.full:
            return None
        return self._costs[self.k - 1]

    def insert(self, model: AnswerSet, cost: CostVector) -> bool:
        """
        Insert a model by insertion sort, evicting position k+1

        Returns:
            True if the model is kept
        """
        discovery = self._discovered
        self._discovered += 1
        position = bisect.bisect_right(self._costs, cost)
        if position >= self.k:
            return False
        self._costs.insert(position, cost)
        self.entries.insert(position, RankedModel(model, cost, discovery))
        if len(self.entries) > self.k:
            self._costs.pop(self.k)
            self.entries.pop(self.k)
        return True

    def ranked(self) -> List[RankedModel]:
        return renumber(self.entries)


class ThresholdPruner:
    """
    Partial-assignment hook for smart enumeration

    The partial cost of a level is the weight of its literals that are on
    the trail. It never decreases as the trail grows, so a partial cost
    above the window threshold rules out every completion.
    """

    def __init__(self, program: Program, window: TopKWindow):
        """
        Initialize the pruner

        Args:
            program: Program with non-negative objective weights
            window: Window providing the threshold
        """
        self.window = window
        self.levels = program.levels
        self.pruned = 0
        self._when_true = [[0] * self.levels for _ in range(program.size)]
        self._when_false = [[0] * self.levels for _ in range(program.size)]
        for position, objective in enumerate(program.objectives):
            for weight, literal in objective.terms:
                table = self._when_true if literal.positive else self._when_false
                table[literal.atom][position] = checked_add(table[literal.atom][position], weight)

    def partial_cost(self, literals) -> CostVector:
        totals = [0] * self.levels
        for literal in literals:
            row = self._when_true[literal.atom] if literal.positive else self._when_false[literal.atom]
            for position, weight in enumerate(row):
                if weight:
                    totals[position] = checked_add(totals[position], weight)
        return tuple(totals)

    def __call__(self, trail: Trail) -> Optional[Nogood]:
        threshold = self.window.threshold
        if threshold is None:
            return None
        if compare_lex(self.partial_cost(trail), threshold) > 0:
            self.pruned += 1
            return Nogood(trail.literals())
        return None


def smart_enumerate(
    program: Program,
    k: int,
    config: Optional[SearchConfig] = None,
    summary: Optional[EnumerationSummary] = None
) -> List[RankedModel]:
    """
    Top-k enumeration with a sliding window and threshold nogoods

    Args:
        program: Program with normalized objectives
        k: Window size, finite
        config: Search configuration
        summary: Counters to accumulate into

    Returns:
        The k best models (fewer if the program has fewer answer sets)
    """
    if k is None:
        raise ContractError("Smart enumeration needs a finite k")
    _check_k(k)

    window = TopKWindow(k)
    pruner = ThresholdPruner(program, window)

    def insert(model: AnswerSet):
        window.insert(model, eval_cost(program, model))

    result = enumerate_models(program, config, on_model=insert, on_partial=pruner)
    if summary is not None:
        summary.merge(result)
    logger.info(
        f"Smart enumeration kept {len(window.entries)} models, "
        f"pruned {pruner.pruned} partial assignments"
    )
    return window.ranked()


def run_strategy(
    mode: Mode,
    program: Program,
    k: Optional[int] = ALL,
    config: Optional[SearchConfig] = None,
    sink: Optional[Sink] = None,
    summary: Optional[EnumerationSummary] = None
) -> List[RankedModel]:
    """
    Run any of the three strategies and collect its ranking

    Args:
        mode: Strategy to use
        program: Program with normalized objectives
        k: Number of models, ALL for every answer set (not allowed for SMART)
        config: Search configuration
        sink: Optional per-model callback (called in emission order)
        summary: Counters to accumulate into

    Returns:
        Ranked models in emission order
    """
    mode = Mode(mode)
    if mode is Mode.WEIGHT:
        collected: List[RankedModel] = []

        def collect(ranked: RankedModel):
            collected.append(ranked)
            if sink is not None:
                sink(ranked)

        result = weight_enumerate(program, k, collect, config)
        if summary is not None:
            summary.merge(result.solver)
        return collected

    if mode is Mode.NAIVE:
        ranked = naive_enumerate(program, k, config, summary)
    else:
        ranked = smart_enumerate(program, k, config, summary)
    if sink is not None:
        for model in ranked:
            sink(model)
    return ranked
