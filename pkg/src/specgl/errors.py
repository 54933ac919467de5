"""Exception types raised across the package."""


class SpecGLError(Exception):
    """Base class for all package errors."""


class FailedConvergence(SpecGLError):
    """An iterative numerical routine ran out of its iteration budget."""


class DegenerateGraph(SpecGLError):
    """A generator could not produce a graph without isolated vertices."""


class ZeroSignal(SpecGLError):
    """The observation matrix has zero Frobenius norm."""


class ValidityViolation(SpecGLError):
    """An assembled adjacency matrix breaks the nonnegativity requirement."""


class NumericalFailure(SpecGLError):
    """The LP solver stalled or exhausted its pivot budget."""


class ConfigError(SpecGLError):
    """Bad experiment configuration or manifest."""
