"""
Aseo Generators Module

Benchmark program generators: the P_n worst-case family and seeded random
normal programs with prioritized objectives.
"""

import logging
from typing import List, Optional

import numpy as np

from .errors import ContractError, CostOverflowError

logger = logging.getLogger(__name__)

# 2^(n-1) and the objective total 2^n - 1 must stay within int64
PN_MAX = 63
CONSTRAINT_PROBABILITY = 0.1


def generate_pn(n: int) -> str:
    """
    Generate P_n, a program with 2^(2n-1) answer sets spread over 2^n costs

    Each answer set encodes a pair of n-bit numbers a and b with a < b (via
    the lt chain) or a >= b, constrained by the top bit; the objective is the
    value of a.

    Args:
        n: Number of bit positions, at least 1

    Returns:
        Program text
    """
    if not isinstance(n, int) or n < 1:
        raise ContractError(f"n must be a positive integer, got {n!r}")
    if n > PN_MAX:
        raise CostOverflowError(f"Weight 2^{n - 1} of P_{n} overflows 64-bit costs")

    lines: List[str] = [f"% P_{n}"]
    for i in range(1, n + 1):
        lines.append(f"a({i}) :- not abar({i}).")
        lines.append(f"abar({i}) :- not a({i}).")
        lines.append(f"b({i}) :- not bbar({i}).")
        lines.append(f"bbar({i}) :- not b({i}).")
    for i in range(1, n + 1):
        lines.append(f"lt({i}) :- abar({i}), b({i}).")
        if i < n:
            lines.append(f"lt({i}) :- a({i}), b({i}), lt({i + 1}).")
            lines.append(f"lt({i}) :- abar({i}), bbar({i}), lt({i + 1}).")
    lines.append(":- b(1), lt(2).")
    lines.append(":- bbar(1), not lt(2).")

    terms = "; ".join(f"{2 ** (i - 1)}@1 : a({i})" for i in range(1, n + 1))
    lines.append(f"#minimize{{{terms}}}.")
    return "".join(f"{line}\n" for line in lines)


def generate_random(
    atoms: int,
    rules: int,
    levels: int = 1,
    seed: Optional[int] = None,
    max_body: int = 2,
    max_weight: int = 9
) -> str:
    """
    Generate a random normal program

    Args:
        atoms: Number of atoms p1..pN
        rules: Number of rules; about one in ten is a constraint
        levels: Number of priority levels, each with at least one term
        seed: Random seed; equal seeds give identical text
        max_body: Largest positive and negative body size
        max_weight: Largest objective weight

    Returns:
        Program text
    """
    if atoms < 0 or rules < 0 or levels < 0:
        raise ContractError("atoms, rules and levels must be non-negative")
    if atoms == 0 and (rules or levels):
        raise ContractError("rules and objectives need at least one atom")

    rng = np.random.default_rng(seed)
    names = [f"p{i + 1}" for i in range(atoms)]
    lines: List[str] = [f"% random atoms={atoms} rules={rules} levels={levels} seed={seed}"]

    for _ in range(rules):
        constraint = rng.random() < CONSTRAINT_PROBABILITY
        pos_count = int(rng.integers(0, min(max_body, atoms) + 1))
        neg_count = int(rng.integers(0, min(max_body, atoms) + 1))
        if constraint and pos_count + neg_count == 0:
            neg_count = 1
        pos = sorted(int(i) for i in rng.choice(atoms, size=pos_count, replace=False))
        neg = sorted(int(i) for i in rng.choice(atoms, size=neg_count, replace=False))
        body = [names[i] for i in pos] + [f"not {names[i]}" for i in neg]

        if constraint:
            lines.append(f":- {', '.join(body)}.")
            continue
        head = names[int(rng.integers(0, atoms))]
        lines.append(f"{head} :- {', '.join(body)}." if body else f"{head}.")

    for level in range(1, levels + 1):
        count = int(rng.integers(1, min(3, atoms) + 1))
        chosen = sorted(int(i) for i in rng.choice(atoms, size=count, replace=False))
        terms = []
        for i in chosen:
            weight = int(rng.integers(0, max_weight + 1))
            literal = names[i] if rng.random() < 0.8 else f"not {names[i]}"
            terms.append(f"{weight}@{level} : {literal}")
        lines.append(f"#minimize{{{'; '.join(terms)}}}.")

    logger.debug(f"Generated random program with {atoms} atoms, {rules} rules, {levels} levels")
    return "".join(f"{line}\n" for line in lines)
