"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: InfeasibleError exits 2 (the requested
bound does not exist for the given parameters, message names the violated
constraint), every other PlbError exits 1.
"""


class PlbError(Exception):
    """Base class for all package errors."""


class ParameterError(PlbError, ValueError):
    """An argument is outside its documented domain."""


class InfeasibleError(PlbError):
    """The requested bound is not defined for these parameters.

    `constraint` names the violated condition, e.g. "nu(alpha, K) < 1".
    """

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class AccuracyError(PlbError):
    """A computation could not certify the requested accuracy.

    Carries the last two refinement values so the caller can inspect how far
    apart they are.
    """

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class ConstructionError(PlbError):
    """A generated geometric object violates a structural invariant."""


class MeshError(PlbError):
    """A produced mesh violates a quality or conformity requirement."""


class ConvergenceError(PlbError):
    """An iterative solver did not reach its stopping test.

    `best` carries the best iterate found so far, when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InconsistencyError(PlbError):
    """Two quantities that must agree by theory failed their cross-check.

    Raised when a computed value violates an inequality it must satisfy
    analytically; this signals a formula or quadrature bug, not bad input.
    """
