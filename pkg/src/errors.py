"""
Aseo Error Types

Domain exceptions raised by the library. Each one derives from the closest
builtin so callers that only know the builtins still catch them.
"""

from typing import Optional


class ParseError(ValueError):
    """Malformed program text, with the position of the offending token"""

    def __init__(self, line: int, column: int, message: str, snippet: str = ""):
        """
        Initialize the parse error

        Args:
            line: 1-based line of the offending token
            column: 1-based column of the offending token
            message: Human-readable description
            snippet: Offending token text
        """
        self.line = line
        self.column = column
        self.message = message
        self.snippet = snippet
        super().__init__(str(self))

    def __str__(self) -> str:
        location = f"{self.line}:{self.column}: {self.message}"
        if self.snippet:
            return f"{location} near '{self.snippet}'"
        return location


class CostOverflowError(OverflowError):
    """A weight or cost left the signed 64-bit range"""


class OracleLimitError(ValueError):
    """The brute-force oracle refused a signature that is too large"""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(
            f"Signature has {size} atoms, oracle limit is {limit} "
            f"(set ASEO_ORACLE_LIMIT to raise it)"
        )


class ContractError(ValueError):
    """An operation was called outside its precondition"""


class NetworkError(ValueError):
    """Invalid Bayesian network or query"""


class UndefinedPosteriorError(ArithmeticError):
    """The evidence has probability zero, so P(q | e) is undefined"""


class SearchTimeout(TimeoutError):
    """The solver passed its deadline"""


class VerificationError(AssertionError):
    """Oracle verification rejected a model produced by the solver"""

    def __init__(self, model: frozenset, detail: Optional[str] = None):
        self.model = model
        message = f"Solver produced a non-answer set: {sorted(model)}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
