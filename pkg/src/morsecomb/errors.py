"""Exception hierarchy shared by all modules."""


class GeometryError(ValueError):
    """Base class for geometric precondition failures."""


class NumericalFailure(GeometryError):
    pass


class DegenerateElement(GeometryError):
    pass


class DegenerateSegment(GeometryError):
    pass


class NotRegular(GeometryError):
    """A segment fails a regularity requirement.

    ``k`` names the first pattern dimension whose eigenvalue gap is too
    small, or is None when the failure is an angular (Theta) one.
    """

    def __init__(self, k=None, message=None):
        self.k = k
        if message is None:
            message = f"segment not regular at dimension {k}"
        super().__init__(message)


class NotNested(GeometryError):
    pass


class PatternMismatch(GeometryError):
    pass


class NotAntipodal(GeometryError):
    def __init__(self, i=None, j=None, indices=None, message=None):
        self.i, self.j, self.indices = i, j, indices
        if message is None:
            message = f"families {i} and {j} not antipodal at flags {indices}"
        super().__init__(message)


class NoConvergence(GeometryError):
    def __init__(self, iterations, message=None):
        self.iterations = iterations
        super().__init__(message or f"descent stalled after {iterations} iterations")


class NotOnParallelSet(GeometryError):
    pass


class InvalidGap(GeometryError):
    pass


class EndpointMismatch(GeometryError):
    pass


class RangeError(GeometryError):
    pass


class NotProximal(GeometryError):
    def __init__(self, i, message=None):
        self.i = i
        super().__init__(message or f"element {i} is not proximal for the pattern")


class ConfigError(ValueError):
    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
