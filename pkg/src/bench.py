"""
Aseo Bench Module

Runs enumeration strategies over instance families for a sweep of k values
and writes the averages as a CSV table.
"""

import csv
import time
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

from tqdm import tqdm

from .bayes import encode_map, random_network, random_query
from .errors import ContractError, SearchTimeout
from .generators import generate_pn, generate_random
from .parser import parse_program, render_program
from .program import RankedModel
from .solver import SearchConfig
from .strategies import Mode, run_strategy

logger = logging.getLogger(__name__)

DEFAULT_K_SWEEP = (10, 100, 1000, 10000)


@dataclass(frozen=True)
class Instance:
    """A benchmark program"""
    family: str
    name: str
    source: str


@dataclass
class CellResult:
    """One mode x k x instance run"""
    family: str
    instance: str
    mode: str
    k: int
    seconds: float
    timed_out: bool
    models: int


def _parse_options(text: str) -> Dict[str, int]:
    options = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ContractError(f"Expected key=value in generator spec, got '{item}'")
        try:
            options[key.strip()] = int(value)
        except ValueError:
            raise ContractError(f"Generator option {key} needs an integer, got '{value}'")
    return options


def instances_from_spec(spec: str) -> List[Instance]:
    """
    Generate instances from a spec string

    Supported forms:
        pn:LO-HI
        random:atoms=A,rules=R,levels=L,count=C,seed=S
        bayes:variables=V,count=C,seed=S

    Args:
        spec: Generator spec

    Returns:
        Instances in generation order
    """
    family, _, arguments = spec.partition(":")
    family = family.strip().lower()

    if family == "pn":
        low, sep, high = arguments.partition("-")
        try:
            low_n = int(low)
            high_n = int(high) if sep else low_n
        except ValueError:
            raise ContractError(f"Expected pn:LO-HI, got '{spec}'")
        return [Instance("pn", f"pn{n}", generate_pn(n)) for n in range(low_n, high_n + 1)]

    options = _parse_options(arguments)
    count = options.get("count", 10)
    seed = options.get("seed", 0)

    if family == "random":
        atoms = options.get("atoms", 10)
        rules = options.get("rules", 2 * atoms)
        levels = options.get("levels", 1)
        return [
            Instance("random", f"random-{seed + i}", generate_random(atoms, rules, levels, seed + i))
            for i in range(count)
        ]

    if family == "bayes":
        variables = options.get("variables", 10)
        instances = []
        for i in range(count):
            net = random_network(variables, seed + i)
            query = random_query(net, seed + i)
            encoding = encode_map(net, query.evidence)
            instances.append(Instance("bayes", f"bayes-{seed + i}", render_program(encoding.program)))
        return instances

    raise ContractError(f"Unknown generator family: {family}")


def instances_from_directory(directory: str) -> List[Instance]:
    """
    Collect .lp files of a directory, sorted by name

    Args:
        directory: Directory path

    Returns:
        Instances labeled with the directory name as family
    """
    path = Path(directory)
    if not path.is_dir():
        raise FileNotFoundError(f"Instance directory not found: {path}")
    files = sorted(path.glob("*.lp"))
    logger.info(f"Found {len(files)} program files in {path}")
    return [Instance(path.name, file.stem, file.read_text(encoding="utf-8")) for file in files]


def load_instances(targets: Iterable[str]) -> List[Instance]:
    """Resolve each target as a directory if one exists, else as a generator spec"""
    instances: List[Instance] = []
    for target in targets:
        if Path(target).is_dir():
            instances.extend(instances_from_directory(target))
        else:
            instances.extend(instances_from_spec(target))
    return instances


def run_cell(instance: Instance, mode: str, k: int, timeout: Optional[float]) -> CellResult:
    """
    Run one strategy on one instance under a deadline

    Args:
        instance: Program to enumerate
        mode: Strategy name
        k: Number of models
        timeout: Seconds before the cell is abandoned

    Returns:
        Cell result; timed-out cells report the timeout as their runtime
        and the models emitted before it
    """
    program = parse_program(instance.source)
    config = SearchConfig.with_timeout(timeout, oracle_verify=False)
    emitted: List[RankedModel] = []
    start = time.perf_counter()
    try:
        ranked = run_strategy(Mode(mode), program, k, config, sink=emitted.append)
    except SearchTimeout:
        logger.warning(f"Timeout: {instance.name} mode={mode} k={k} after {len(emitted)} models")
        return CellResult(instance.family, instance.name, mode, k, float(timeout), True, len(emitted))
    elapsed = time.perf_counter() - start
    return CellResult(instance.family, instance.name, mode, k, elapsed, False, len(ranked))


class BenchRunner:
    """Runs the mode x k x instance grid"""

    def __init__(
        self,
        modes: Sequence[str] = ("weight", "smart"),
        k_sweep: Sequence[int] = DEFAULT_K_SWEEP,
        timeout: Optional[float] = 1800,
        jobs: int = 1
    ):
        """
        Initialize the runner

        Args:
            modes: Strategy names
            k_sweep: k values, one CSV column each
            timeout: Per-cell timeout in seconds
            jobs: Number of worker processes
        """
        self.modes = [Mode(mode).value for mode in modes]
        self.k_sweep = list(k_sweep)
        self.timeout = timeout
        self.jobs = max(1, jobs)

    def cells(self, instances: Sequence[Instance]):
        for instance in instances:
            for mode in self.modes:
                for k in self.k_sweep:
                    yield instance, mode, k

    def run(self, instances: Sequence[Instance], progress: bool = True) -> List[CellResult]:
        """
        Run every cell

        Args:
            instances: Instances to benchmark
            progress: Show a progress bar

        Returns:
            Cell results in grid order
        """
        cells = list(self.cells(instances))
        logger.info(f"Running {len(cells)} cells on {self.jobs} worker(s)")
        results: List[Optional[CellResult]] = [None] * len(cells)

        with tqdm(total=len(cells), desc="bench", unit="cell", disable=not progress) as bar:
            if self.jobs == 1:
                for position, (instance, mode, k) in enumerate(cells):
                    results[position] = run_cell(instance, mode, k, self.timeout)
                    bar.update(1)
            else:
                with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                    pending = {
                        pool.submit(run_cell, instance, mode, k, self.timeout): position
                        for position, (instance, mode, k) in enumerate(cells)
                    }
                    for future in as_completed(pending):
                        results[pending[future]] = future.result()
                        bar.update(1)

        return [result for result in results if result is not None]

    def table(self, results: Sequence[CellResult]) -> List[Dict]:
        """
        Aggregate cells into one row per family and mode

        Returns:
            Rows with average seconds per k and the number of timed-out cells
        """
        rows: Dict[tuple, Dict] = {}
        for result in results:
            key = (result.family, result.mode)
            row = rows.setdefault(key, {
                "family": result.family,
                "instances": set(),
                "mode": result.mode,
                "seconds": {k: [] for k in self.k_sweep},
                "timeouts": 0,
            })
            row["instances"].add(result.instance)
            row["seconds"][result.k].append(result.seconds)
            row["timeouts"] += int(result.timed_out)

        table = []
        for row in rows.values():
            record = {"family": row["family"], "instances": len(row["instances"]), "mode": row["mode"]}
            for k in self.k_sweep:
                values = row["seconds"][k]
                record[f"k={k}"] = round(sum(values) / len(values), 6) if values else ""
            record["timeouts"] = row["timeouts"]
            table.append(record)
        return table

    def header(self) -> List[str]:
        return ["family", "instances", "mode"] + [f"k={k}" for k in self.k_sweep] + ["timeouts"]

    def write_csv(self, results: Sequence[CellResult], stream: TextIO):
        writer = csv.DictWriter(stream, fieldnames=self.header())
        writer.writeheader()
        for row in self.table(results):
            writer.writerow(row)
