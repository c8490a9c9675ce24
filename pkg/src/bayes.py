"""
Aseo Bayes Module

Boolean Bayesian networks: JSON loading, d-separation pruning, compilation of
MAP search into a weighted program, and posterior estimates from the k most
probable assignments on each side of the query.
"""

import json
import math
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import ContractError, CostOverflowError, NetworkError, UndefinedPosteriorError
from .program import INT64_MAX, AnswerSet, Atom, Literal, ObjectiveFunction, Program, Rule
from .solver import SearchConfig
from .strategies import ALL, Mode, run_strategy

logger = logging.getLogger(__name__)

DEFAULT_SCALE = 10**6
EXACT_LIMIT = 20


def row_index(given: Sequence[bool]) -> int:
    """CPT row of a parent assignment; the first parent is the most significant bit"""
    index = 0
    for value in given:
        index = index * 2 + int(bool(value))
    return index


@dataclass(frozen=True)
class Variable:
    """
    A Boolean random variable

    Attributes:
        name: Variable name
        parents: Ordered parent names
        cpt: P(var = true | parents) indexed by row_index of the parent values
    """
    name: str
    parents: Tuple[str, ...]
    cpt: Tuple[float, ...]

    def p_true(self, given: Sequence[bool]) -> float:
        return self.cpt[row_index(given)]


class BayesNet:
    """Directed acyclic graph of Boolean variables with CPTs"""

    def __init__(self, variables: Sequence[Variable]):
        """
        Initialize and validate the network

        Args:
            variables: Variables in any order

        Raises:
            NetworkError: Unknown parent, cycle, bad CPT
        """
        self.variables: Tuple[Variable, ...] = tuple(variables)
        self._index: Dict[str, int] = {}
        for position, variable in enumerate(self.variables):
            if variable.name in self._index:
                raise NetworkError(f"Duplicate variable: {variable.name}")
            self._index[variable.name] = position

        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(self._index)
        for variable in self.variables:
            for parent in variable.parents:
                if parent not in self._index:
                    raise NetworkError(f"Unknown parent '{parent}' of '{variable.name}'")
                self.graph.add_edge(parent, variable.name)
            if len(set(variable.parents)) != len(variable.parents):
                raise NetworkError(f"Repeated parent of '{variable.name}'")
            if len(variable.cpt) != 2 ** len(variable.parents):
                raise NetworkError(
                    f"CPT of '{variable.name}' has {len(variable.cpt)} rows, "
                    f"expected {2 ** len(variable.parents)}"
                )
            for probability in variable.cpt:
                if not 0.0 <= probability <= 1.0:
                    raise NetworkError(f"Probability {probability} of '{variable.name}' outside [0, 1]")

        if not nx.is_directed_acyclic_graph(self.graph):
            cycle = nx.find_cycle(self.graph)
            raise NetworkError(f"Cycle detected: {' -> '.join(edge[0] for edge in cycle)}")

    def __len__(self) -> int:
        return len(self.variables)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    @property
    def names(self) -> List[str]:
        return [variable.name for variable in self.variables]

    def index(self, name: str) -> int:
        return self._index[name]

    def variable(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def restrict(self, names: Iterable[str]) -> "BayesNet":
        """Sub-network over the given variables, which must be closed under parents"""
        keep = set(names)
        return BayesNet([variable for variable in self.variables if variable.name in keep])


@dataclass
class QuerySpec:
    """Query variable q and evidence e"""
    query: str
    evidence: Dict[str, bool] = field(default_factory=dict)

    def validate(self, net: BayesNet):
        if self.query not in net:
            raise NetworkError(f"Unknown query variable: {self.query}")
        for name in self.evidence:
            if name not in net:
                raise NetworkError(f"Unknown evidence variable: {name}")
        if self.query in self.evidence:
            raise NetworkError(f"Query variable '{self.query}' is also evidence")

    def restricted(self, net: BayesNet) -> "QuerySpec":
        """The same query with evidence outside the network dropped"""
        return QuerySpec(self.query, {k: v for k, v in self.evidence.items() if k in net})


def load_network(source: str) -> BayesNet:
    """
    Parse a network from JSON text

    Format: {"variables": [{"name", "parents": [...], "cpt": [{"given": [...], "p_true"}]}]}

    Args:
        source: JSON text

    Returns:
        Validated network
    """
    try:
        document = json.loads(source)
    except json.JSONDecodeError as e:
        raise NetworkError(f"Invalid JSON: {e}") from e

    if not isinstance(document, dict) or not isinstance(document.get("variables"), list):
        raise NetworkError("Network must be an object with a 'variables' list")

    variables = []
    for entry in document["variables"]:
        try:
            name = str(entry["name"])
            parents = tuple(str(parent) for parent in entry.get("parents", []))
            rows = entry["cpt"]
        except (KeyError, TypeError) as e:
            raise NetworkError(f"Malformed variable entry: {entry!r}") from e

        cpt: List[Optional[float]] = [None] * (2 ** len(parents))
        for row in rows:
            given = row.get("given", [])
            if len(given) != len(parents) or not all(isinstance(v, bool) for v in given):
                raise NetworkError(f"CPT row of '{name}' needs {len(parents)} boolean parent values: {given!r}")
            index = row_index(given)
            if cpt[index] is not None:
                raise NetworkError(f"Duplicate CPT row {given} for '{name}'")
            try:
                cpt[index] = float(row["p_true"])
            except (KeyError, TypeError, ValueError) as e:
                raise NetworkError(f"CPT row of '{name}' lacks a numeric p_true") from e

        missing = [i for i, value in enumerate(cpt) if value is None]
        if missing:
            raise NetworkError(f"CPT of '{name}' is missing {len(missing)} of {len(cpt)} rows")
        variables.append(Variable(name, parents, tuple(cpt)))

    net = BayesNet(variables)
    logger.info(f"Loaded network with {len(net)} variables and {net.graph.number_of_edges()} arcs")
    return net


def dump_network(net: BayesNet) -> str:
    """Serialize a network to the JSON format read by load_network"""
    variables = []
    for variable in net.variables:
        rows = []
        for given in itertools.product([False, True], repeat=len(variable.parents)):
            rows.append({"given": list(given), "p_true": variable.p_true(given)})
        variables.append({"name": variable.name, "parents": list(variable.parents), "cpt": rows})
    return json.dumps({"variables": variables}, indent=2)


def relevant_subnetwork(net: BayesNet, spec: QuerySpec) -> BayesNet:
    """
    Drop the variables that cannot influence P(q | e)

    Takes the ancestral closure of the query and evidence, moralizes it and
    keeps the connected component containing the query.

    Args:
        net: Network
        spec: Query and evidence

    Returns:
        Sub-network with the same exact posterior
    """
    spec.validate(net)
    targets = {spec.query} | set(spec.evidence)
    ancestral = set(targets)
    for target in targets:
        ancestral |= nx.ancestors(net.graph, target)

    moral = nx.moral_graph(net.graph.subgraph(ancestral))
    keep = nx.node_connected_component(moral, spec.query)
    logger.info(f"Relevant sub-network keeps {len(keep)} of {len(net)} variables")
    return net.restrict(keep)


@dataclass
class WeightedEncoding:
    """
    A network compiled into a program whose answer sets are the assignments

    Attributes:
        program: Choice rules, evidence and zero-row constraints, one objective
        scale: Multiplier turning -ln(p) into integer weights
        atom_map: Variable name -> (true atom id, false atom id)
        forbidden_rows: Number of zero-probability rows encoded as constraints
    """
    program: Program
    scale: int
    atom_map: Dict[str, Tuple[int, int]]
    forbidden_rows: int = 0

    def decode(self, model: AnswerSet) -> Dict[str, bool]:
        return {name: true_atom in model for name, (true_atom, _) in self.atom_map.items()}


class _Signature:
    """Interns atom names while an encoding is built"""

    def __init__(self):
        self.ids: Dict[str, int] = {}

    def __call__(self, name: str) -> int:
        if name not in self.ids:
            self.ids[name] = len(self.ids)
        return self.ids[name]

    def atoms(self) -> Tuple[Atom, ...]:
        return tuple(Atom(index, name) for name, index in self.ids.items())


def encode_map(net: BayesNet, evidence: Mapping[str, bool], scale: int = DEFAULT_SCALE) -> WeightedEncoding:
    """
    Compile MAP search over a network into a weighted program

    Every CPT row and value of the child gets an indicator atom defined by
    the row's pattern and weighted round(-ln p * scale); rows with p = 0
    become constraints and rows with p = 1 cost nothing.

    Args:
        net: Network
        evidence: Clamped variables
        scale: Positive weight multiplier

    Returns:
        The encoding; cost order equals descending joint probability up to rounding
    """
    if not isinstance(scale, int) or scale <= 0:
        raise ContractError(f"Scale must be a positive integer, got {scale!r}")
    for name in evidence:
        if name not in net:
            raise NetworkError(f"Unknown evidence variable: {name}")

    atom = _Signature()
    rules: List[Rule] = []
    terms = []
    atom_map: Dict[str, Tuple[int, int]] = {}
    forbidden = 0

    for position, variable in enumerate(net.variables):
        true_atom = atom(f"t({position})")
        false_atom = atom(f"f({position})")
        atom_map[variable.name] = (true_atom, false_atom)
        rules.append(Rule(true_atom, neg_body=frozenset([false_atom])))
        rules.append(Rule(false_atom, neg_body=frozenset([true_atom])))

    for name, value in evidence.items():
        true_atom, false_atom = atom_map[name]
        rules.append(Rule(None, pos_body=frozenset([false_atom if value else true_atom])))

    for position, variable in enumerate(net.variables):
        parent_maps = [atom_map[parent] for parent in variable.parents]
        for given in itertools.product([False, True], repeat=len(variable.parents)):
            pattern = {
                true_atom if value else false_atom
                for (true_atom, false_atom), value in zip(parent_maps, given)
            }
            p_true = variable.p_true(given)
            row = row_index(given)
            for value, probability in ((True, p_true), (False, 1.0 - p_true)):
                own = atom_map[variable.name][0 if value else 1]
                body = frozenset(pattern | {own})
                if probability <= 0.0:
                    rules.append(Rule(None, pos_body=body))
                    forbidden += 1
                    continue
                if probability >= 1.0:
                    continue
                weight = round(-math.log(probability) * scale)
                if weight > INT64_MAX:
                    raise CostOverflowError(f"Weight of row {given} of '{variable.name}' overflows")
                if weight == 0:
                    continue
                indicator = atom(f"w({position},{row},{int(value)})")
                rules.append(Rule(indicator, pos_body=body))
                terms.append((weight, Literal(indicator)))

    objective = ObjectiveFunction(1, tuple(terms))
    # raises CostOverflowError when the weights sum past 64 bits
    objective.total_weight()
    program = Program(atom.atoms(), tuple(rules), (objective,))
    logger.debug(
        f"Encoded {len(net)} variables into {program.size} atoms, {len(rules)} rules, "
        f"{forbidden} forbidden rows"
    )
    return WeightedEncoding(program, scale, atom_map, forbidden)


@dataclass
class QueryEstimate:
    """Approximate posterior P(q | e) from ranked assignments"""
    posterior: float
    k: Optional[int]
    scale: int
    mass_true: float
    mass_false: float
    assignments_true: int
    assignments_false: int
    exact: Optional[float] = None

    def to_dict(self) -> Dict:
        record = {
            "posterior": self.posterior,
            "k": self.k,
            "scale": self.scale,
            "mass_true": self.mass_true,
            "mass_false": self.mass_false,
            "assignments_true": self.assignments_true,
            "assignments_false": self.assignments_false,
            "masses": "unnormalized joint P(q, c, e)",
        }
        if self.exact is not None:
            record["exact"] = self.exact
            record["error"] = abs(self.posterior - self.exact)
        return record


def approximate_query(
    net: BayesNet,
    spec: QuerySpec,
    k: Optional[int] = ALL,
    scale: int = DEFAULT_SCALE,
    mode: Mode = Mode.WEIGHT,
    config: Optional[SearchConfig] = None
) -> QueryEstimate:
    """
    Estimate P(q | e) from the k most probable assignments with q and with not q

    Args:
        net: Network
        spec: Query and evidence
        k: Assignments per branch, ALL for exact enumeration
        scale: Weight multiplier
        mode: Enumeration strategy for both branches
        config: Search configuration

    Returns:
        Estimate with the branch masses it was computed from

    Raises:
        UndefinedPosteriorError: Neither branch has an assignment of nonzero probability
    """
    spec.validate(net)

    def branch(value: bool) -> List[int]:
        evidence = dict(spec.evidence)
        evidence[spec.query] = value
        encoding = encode_map(net, evidence, scale)
        ranked = run_strategy(mode, encoding.program, k, config)
        return [model.cost[0] for model in ranked]

    with ThreadPoolExecutor(max_workers=2) as pool:
        pending_true = pool.submit(branch, True)
        pending_false = pool.submit(branch, False)
        costs_true = np.asarray(pending_true.result(), dtype=float)
        costs_false = np.asarray(pending_false.result(), dtype=float)

    if costs_true.size == 0 and costs_false.size == 0:
        raise UndefinedPosteriorError(f"Evidence {spec.evidence} has probability zero")

    # shift by the best cost so the ratio survives when absolute masses underflow
    shift = np.concatenate([costs_true, costs_false]).min()
    relative_true = np.exp(-(costs_true - shift) / scale).sum()
    relative_false = np.exp(-(costs_false - shift) / scale).sum()

    estimate = QueryEstimate(
        posterior=float(relative_true / (relative_true + relative_false)),
        k=k,
        scale=scale,
        mass_true=float(np.exp(-costs_true / scale).sum()),
        mass_false=float(np.exp(-costs_false / scale).sum()),
        assignments_true=int(costs_true.size),
        assignments_false=int(costs_false.size),
    )
    logger.info(
        f"P({spec.query} | e) ~ {estimate.posterior:.6f} from "
        f"{estimate.assignments_true}+{estimate.assignments_false} assignments"
    )
    return estimate


def joint_probabilities(net: BayesNet, assignments: np.ndarray) -> np.ndarray:
    """
    Joint probability of each row of a Boolean assignment matrix

    Args:
        net: Network
        assignments: Array of shape (m, len(net)), column i = variable i

    Returns:
        Array of m probabilities
    """
    joint = np.ones(len(assignments))
    for position, variable in enumerate(net.variables):
        rows = np.zeros(len(assignments), dtype=np.int64)
        for parent in variable.parents:
            rows = rows * 2 + assignments[:, net.index(parent)]
        p_true = np.asarray(variable.cpt)[rows]
        joint *= np.where(assignments[:, position], p_true, 1.0 - p_true)
    return joint


def joint_probability(net: BayesNet, assignment: Mapping[str, bool]) -> float:
    row = np.array([[assignment[name] for name in net.names]], dtype=bool)
    return float(joint_probabilities(net, row)[0])


def all_assignments(net: BayesNet) -> np.ndarray:
    if len(net) > EXACT_LIMIT:
        raise NetworkError(f"Direct summation supports at most {EXACT_LIMIT} variables")
    return np.array(list(itertools.product([False, True], repeat=len(net))), dtype=bool).reshape(-1, len(net))


def exact_posterior(net: BayesNet, spec: QuerySpec) -> float:
    """
    P(q | e) by direct summation over all assignments

    Args:
        net: Network with at most 20 variables
        spec: Query and evidence

    Returns:
        Exact posterior
    """
    spec.validate(net)
    grid = all_assignments(net)
    joint = joint_probabilities(net, grid)
    consistent = np.ones(len(grid), dtype=bool)
    for name, value in spec.evidence.items():
        consistent &= grid[:, net.index(name)] == value
    denominator = joint[consistent].sum()
    if denominator <= 0.0:
        raise UndefinedPosteriorError(f"Evidence {spec.evidence} has probability zero")
    numerator = joint[consistent & grid[:, net.index(spec.query)]].sum()
    return float(numerator / denominator)


def random_network(
    variables: int,
    seed: Optional[int] = None,
    max_parents: int = 2,
    low: float = 0.05,
    high: float = 0.95
) -> BayesNet:
    """
    Random network over x1..xn; parents are drawn among earlier variables

    Args:
        variables: Number of variables
        seed: Random seed
        max_parents: Upper bound on in-degree
        low: Smallest CPT probability
        high: Largest CPT probability

    Returns:
        Network with CPT entries rounded to three decimals
    """
    rng = np.random.default_rng(seed)
    names = [f"x{i + 1}" for i in range(variables)]
    result = []
    for position, name in enumerate(names):
        count = int(rng.integers(0, min(position, max_parents) + 1))
        chosen = sorted(rng.choice(position, size=count, replace=False)) if count else []
        parents = tuple(names[int(i)] for i in chosen)
        cpt = tuple(float(p) for p in np.round(rng.uniform(low, high, size=2 ** count), 3))
        result.append(Variable(name, parents, cpt))
    return BayesNet(result)


def random_query(
    net: BayesNet,
    seed: Optional[int] = None,
    evidence_fraction: Optional[float] = None
) -> QuerySpec:
    """
    Random query with evidence sampled from the network itself

    Args:
        net: Network with at least one variable
        seed: Random seed
        evidence_fraction: Share of variables observed (None: uniform in 1-50 %)

    Returns:
        Query spec whose evidence has nonzero probability
    """
    rng = np.random.default_rng(seed)
    if evidence_fraction is None:
        evidence_fraction = float(rng.uniform(0.01, 0.5))

    sample: Dict[str, bool] = {}
    for name in nx.topological_sort(net.graph):
        variable = net.variable(name)
        given = [sample[parent] for parent in variable.parents]
        sample[name] = bool(rng.random() < variable.p_true(given))

    names = net.names
    order = [names[int(i)] for i in rng.permutation(len(names))]
    query = order[0]
    observed = min(len(names) - 1, max(1, round(evidence_fraction * len(names))))
    if len(names) == 1:
        observed = 0
    return QuerySpec(query, {name: sample[name] for name in order[1:1 + observed]})
