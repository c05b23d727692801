"""Exception types shared across the package."""


class NonFiniteError(ArithmeticError):
    """An operation produced (or received) a NaN or infinite entry."""


class GenerationError(RuntimeError):
    """A random problem generator exhausted its redraw budget."""
