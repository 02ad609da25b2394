"""Exception hierarchy shared by the library, the CLI and the API."""
from typing import Optional


class SplitBenchError(Exception):
    """Base class for every error raised by splitbench"""


class DimensionMismatchError(SplitBenchError, ValueError):
    """Vector or operator shapes are not conformable"""


class GradientUnavailableError(SplitBenchError, TypeError):
    """A gradient or Bregman divergence was requested from a nonsmooth function"""


class ProblemShapeError(SplitBenchError, ValueError):
    """Invalid function parameters or an algorithm/problem mismatch"""


class InfeasibleStepsizeError(SplitBenchError, ValueError):
    """Stepsize rule preconditions fail or a contraction constraint is violated"""


class NonFiniteIterateError(SplitBenchError, ArithmeticError):
    """An iterate became inf or NaN"""

    def __init__(self, iteration: int, message: Optional[str] = None):
        self.iteration = iteration
        super().__init__(message or f"non-finite iterate at iteration {iteration} (stepsizes too large?)")


class ReferenceSolveError(SplitBenchError, RuntimeError):
    """The reference solver did not reach the requested KKT residual"""

    def __init__(self, residual: float, message: str):
        self.residual = residual
        super().__init__(message)


class LyapunovBoundError(SplitBenchError, AssertionError):
    """A Lyapunov value left its sandwich bounds under feasible stepsizes"""


class ConfigError(SplitBenchError, ValueError):
    """Experiment config is malformed or inconsistent"""
