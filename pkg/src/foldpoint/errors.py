"""Exception types raised by the solver library."""


class FoldpointError(Exception):
    """Base class for all library errors."""


class DomainViolation(FoldpointError):
    """A point lies outside the feasible open set S."""


class PositivityViolation(FoldpointError):
    """Some denominator G_i(u) is not strictly positive."""

    def __init__(self, index, value=None):
        self.index = index
        self.value = value
        msg = f"G_{index}(u) = {value!r} is not positive" if value is not None else f"G_{index}(u) <= 0"
        super().__init__(msg)


class InvalidMultiplier(FoldpointError):
    """A multiplier vector psi is not in the closed positive orthant minus zero."""


class InvalidParams(FoldpointError):
    """Problem constructor received out-of-range parameters."""


class MaxIterExceeded(FoldpointError):
    """An inner iteration budget was exhausted."""


class SingularSystem(FoldpointError):
    """The bordered linear system could not be factorized stably."""


class NoConvergence(FoldpointError):
    """Newton refinement did not reach the residual tolerance."""


class SingularJacobian(FoldpointError):
    """The branching-system Jacobian broke down during Newton refinement."""
