"""
Aseo Report Module

Formats ranked models as text lines or JSON records and collects the run
report that closes a solve.
"""

import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, TextIO

from .program import AnswerSet, CostVector, Program, RankedModel
from .solver import EnumerationSummary

logger = logging.getLogger(__name__)

FORMATS = ("text", "json")


@dataclass
class RunReport:
    """
    Outcome of one solve

    Attributes:
        mode: Strategy name
        k: Requested number of models (None: all)
        status: "complete", "timeout" or "unsat"
        phases: Wall time in seconds per phase
        summary: Solver counters
        records: Per-model records in emission order
    """
    mode: str
    k: Optional[int]
    status: str = "complete"
    phases: Dict[str, float] = field(default_factory=dict)
    summary: EnumerationSummary = field(default_factory=EnumerationSummary)
    records: List[Dict] = field(default_factory=list)

    @property
    def emitted(self) -> int:
        return len(self.records)

    def to_dict(self, include_records: bool = True) -> Dict:
        result = {
            "mode": self.mode,
            "k": self.k,
            "status": self.status,
            "emitted": self.emitted,
            "phases": {name: round(seconds, 6) for name, seconds in self.phases.items()},
            "summary": self.summary.to_dict(),
        }
        if include_records:
            result["models"] = self.records
        return result


class ModelWriter:
    """Streams ranked models to an output as they are emitted"""

    def __init__(self, program: Program, format: str = "text", stream: Optional[TextIO] = None):
        """
        Initialize the writer

        Args:
            program: Program whose atom names are printed
            format: Output format (text or json)
            stream: Destination, stdout if None
        """
        format = format.lower()
        if format not in FORMATS:
            raise ValueError(f"Unsupported output format: {format}")
        self.program = program
        self.format = format
        self.stream = stream or sys.stdout
        self.records: List[Dict] = []

    @staticmethod
    def format_cost(cost: CostVector) -> str:
        """
        Format a cost vector in angle brackets

        Args:
            cost: Cost vector

        Returns:
            String like <1,4,7>
        """
        return f"<{','.join(str(value) for value in cost)}>"

    def format_text(self, ranked: RankedModel) -> str:
        names = self.program.atom_names(ranked.model)
        return " ".join([self.format_cost(ranked.cost)] + names)

    def record(self, ranked: RankedModel) -> Dict:
        return {
            "index": ranked.index,
            "cost": list(ranked.cost),
            "atoms": self.program.atom_names(ranked.model),
        }

    def __call__(self, ranked: RankedModel):
        record = self.record(ranked)
        self.records.append(record)
        if self.format == "text":
            line = self.format_text(ranked)
        else:
            line = json.dumps({"model": record})
        self.stream.write(f"{line}\n")
        self.stream.flush()
        logger.debug(f"Emitted model {ranked.index} with cost {ranked.cost}")

    def finish(self, report: RunReport):
        """
        Close the stream with the run report

        Text output reports through logging only; JSON output ends with a
        report record.
        """
        report.records = list(self.records)
        if self.format == "json":
            self.stream.write(f"{json.dumps({'report': report.to_dict(include_records=False)})}\n")
            self.stream.flush()
        logger.info(
            f"{report.mode} run {report.status}: {report.emitted} models, "
            f"{report.summary.decisions} decisions, {report.summary.conflicts} conflicts"
        )


def read_json_models(program: Program, text: str) -> List[RankedModel]:
    """
    Parse JSON model output back into ranked models

    Args:
        program: Program the output was produced for
        text: JSON lines written by ModelWriter

    Returns:
        Ranked models in emission order
    """
    models = []
    for line in text.splitlines():
        if not line.strip():
            continue
        document = json.loads(line)
        if "model" not in document:
            continue
        record = document["model"]
        model: AnswerSet = program.model_from_names(record["atoms"])
        models.append(RankedModel(model, tuple(record["cost"]), record["index"]))
    return models
