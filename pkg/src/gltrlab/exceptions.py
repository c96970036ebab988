"""Exception hierarchy for gltrlab."""


class GltrLabError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(GltrLabError, ValueError):
    """A shifted tridiagonal matrix produced a non-positive LDL^T pivot."""

    def __init__(self, index, pivot):
        self.index = index
        self.pivot = pivot
        super().__init__(f"non-positive pivot {pivot:.3e} at position {index}")


class NoConvergence(GltrLabError, RuntimeError):
    pass


class ZeroVector(GltrLabError, ValueError):
    pass


class ZeroGradient(ZeroVector):
    pass


class AlreadyBrokenDown(GltrLabError, RuntimeError):
    pass


class MaxSecularIterations(NoConvergence):
    pass


class NotConverged(GltrLabError, RuntimeError):
    """GLTR hit its iteration cap; ``result`` holds the partial trace."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InvalidInterval(GltrLabError, ValueError):
    pass


class DimensionMismatch(GltrLabError, ValueError):
    pass


class AsymmetricMatrix(GltrLabError, ValueError):
    pass


class ParseError(GltrLabError, ValueError):
    def __init__(self, message, line=None, position=None):
        self.line = line
        self.position = position
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {position}" if position is not None else "") + ")"
        super().__init__(message + where)


class DenseTooLarge(GltrLabError, ValueError):
    pass


class NotBoundaryCase(GltrLabError, ValueError):
    pass
