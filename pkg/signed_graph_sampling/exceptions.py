"""Exceptions raised by signed graph sampling"""
from __future__ import annotations

from typing import Any


class SamplingError(Exception):
    """Base class for all errors raised by the package"""

    def __init__(self, message: str, cause: Any = None) -> None:
        super().__init__(message)
        self.message = message
        self.cause = cause

    def __str__(self) -> str:
        if self.cause is None:
            return self.message
        return f"{self.message}: {self.cause}"


class InputError(SamplingError):
    """Invalid input supplied by the caller"""


class GraphError(InputError):
    """Invalid graph structure, edge or coloring"""


class DisconnectedGraphError(GraphError):
    """Operation requires a connected graph"""


class DimensionError(InputError):
    """Dimension mismatch or matrix too large for dense computation"""


class ConfigError(InputError):
    """Experiment configuration rejected"""


class DataError(InputError):
    """Malformed or degenerate signal data"""

    def __init__(self, message: str, cause: Any = None, line: int | None = None) -> None:
        super().__init__(message, cause)
        self.line = line

    def __str__(self) -> str:
        text = super().__str__()
        if self.line is not None:
            return f"line {self.line}: {text}"
        return text


class NumericalError(SamplingError):
    """Numerical failure during computation"""


class ConvergenceError(NumericalError):
    """Iterative method reached its iteration cap"""

    def __init__(
        self,
        message: str,
        cause: Any = None,
        iterations: int = 0,
        residual: float = float("nan"),
        condition: float | None = None,
    ) -> None:
        super().__init__(message, cause)
        self.iterations = iterations
        self.residual = residual
        self.condition = condition


class NotPositiveDefiniteError(NumericalError):
    """Matrix expected to be positive definite is not"""


class SingularSystemError(NumericalError):
    """Linear system is numerically singular"""


class ReducibleGraphError(NumericalError):
    """First eigenvector has numerically zero entries"""
