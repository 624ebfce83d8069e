"""Exception types raised by kendall3d."""


class KendallError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(KendallError, ValueError):
    pass


class ParseError(KendallError, ValueError):
    """A landmark file could not be parsed.

    ``line`` is the 1-based line number of the offending row when known.
    """

    def __init__(self, message, path=None, line=None):
        parts = [str(path)] if path is not None else []
        if line is not None:
            parts.append(f"line {line}")
        where = ", ".join(parts)
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class DegenerateConfigurationError(KendallError, ValueError):
    """All landmarks coincide, so no pre-shape exists."""


class SingularShapeError(KendallError, ValueError):
    """The shape lies on (or numerically near) the singular set."""


class DegenerateSpectrumError(KendallError, ValueError):
    """Repeated pseudo-singular values; the Kendall basis collapses."""


class IllConditionedBasisError(KendallError, ValueError):
    pass


class DegeneratePlaneError(KendallError, ValueError):
    """The two vectors given for a sectional plane are linearly dependent."""


class NoUniqueLogarithmError(KendallError, ValueError):
    """The two points are antipodal on the pre-shape sphere."""


class SimulationSpecError(InvalidArgumentError):
    pass
