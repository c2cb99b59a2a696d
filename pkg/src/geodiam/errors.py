"""Exception hierarchy shared by all geodiam modules."""


class GeodiamError(Exception):
    """Base class for every error raised by geodiam."""


class InvalidArgument(GeodiamError, ValueError):
    pass


class DegenerateInput(GeodiamError, ValueError):
    pass


class MeshFormatError(GeodiamError, ValueError):
    pass


class OffSurface(GeodiamError, ValueError):
    pass


class NotConvex(GeodiamError, ValueError):
    pass


class NotSymmetric(GeodiamError, ValueError):
    pass


class SymmetryViolation(GeodiamError, RuntimeError):
    pass


class InvolutionCheckFailed(GeodiamError, ValueError):
    pass


class BudgetExceeded(GeodiamError, RuntimeError):
    """The exact search ran out of nodes.

    ``upper_bound`` holds the best feasible length found before giving up
    (``inf`` if no candidate path was seen).
    """

    def __init__(self, message, upper_bound=float("inf")):
        super().__init__(message)
        self.upper_bound = upper_bound


class SimplicityViolation(GeodiamError, RuntimeError):
    pass


class RegionCountViolation(GeodiamError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SwapViolation(GeodiamError, RuntimeError):
    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class InvalidSpace(GeodiamError, ValueError):
    pass
