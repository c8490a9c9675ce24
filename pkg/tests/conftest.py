"""
Shared fixture programs
"""

import itertools
from pathlib import Path

import pytest

from src.parser import parse_file, parse_program

INSTANCES = Path(__file__).parent.parent / "instances"

TOP_FIVE_WEIGHTS = {"l1": 5, "l2": 1, "l3": 2, "l4": 2, "l5": 6}
TOP_FIVE_MODELS = [
    {"l1", "l2", "l3"},
    {"l1", "l3", "l5"},
    {"l2", "l3", "l5"},
    {"l1", "l2", "l4"},
    {"l1", "l4", "l5"},
]


def top_five_source() -> str:
    """Five guessed atoms restricted to five answer sets, one weighted level"""
    names = sorted(TOP_FIVE_WEIGHTS)
    lines = []
    for name in names:
        lines.append(f"{name} :- not n{name}.")
        lines.append(f"n{name} :- not {name}.")
    for bits in itertools.product([False, True], repeat=len(names)):
        chosen = {name for name, bit in zip(names, bits) if bit}
        if chosen in TOP_FIVE_MODELS:
            continue
        body = [name if bit else f"not {name}" for name, bit in zip(names, bits)]
        lines.append(f":- {', '.join(body)}.")
    terms = "; ".join(f"{TOP_FIVE_WEIGHTS[name]}@1 : {name}" for name in names)
    lines.append(f"#minimize{{{terms}}}.")
    return "\n".join(lines) + "\n"


@pytest.fixture
def three_way():
    return parse_file(str(INSTANCES / "three_way.lp"))


@pytest.fixture
def top_five():
    return parse_program(top_five_source())


@pytest.fixture
def instances_dir():
    return INSTANCES


def visible(program, model, prefix="l"):
    """Atom names of a model, restricted to a prefix"""
    return {name for name in program.atom_names(model) if name.startswith(prefix)}
