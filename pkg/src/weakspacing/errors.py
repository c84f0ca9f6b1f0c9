class ConvergenceError(RuntimeError):
    """An iterative or self-checking numerical routine did not converge."""


class IllConditionedError(ArithmeticError):
    """I - K is numerically singular on the chosen discretization."""
