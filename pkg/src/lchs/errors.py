"""Exception hierarchy. Each class maps to one failure category so callers
(and the CLI exit-code table) can tell config, build, and solve problems apart."""


class LchsError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(LchsError):
    """Input matrix/vector has the wrong shape."""


class HermiticityError(LchsError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class RangeError(LchsError):
    """A parameter or result is outside the supported range."""


class DomainError(LchsError):
    """Evaluation requested outside the function's domain of validity."""


class QuadratureError(LchsError):
    """Adaptive quadrature failed to reach the requested accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PropagationError(LchsError):
    """A unitary propagation step failed."""

    def __init__(self, message, t=None, term_index=None):
        super().__init__(message)
        self.t = t
        self.term_index = term_index


class ConvergenceError(LchsError):
    """Iterative refinement hit its step cap before converging."""

    def __init__(self, message, last_delta=None):
        super().__init__(message)
        self.last_delta = last_delta


class BuildError(LchsError):
    """A problem builder received inconsistent physical parameters."""


class PreconditionError(LchsError):
    """A documented precondition (e.g. the positivity gate) is violated."""


class FitError(LchsError):
    """Scaling-law fit received unusable data."""


class ConfigError(LchsError):
    """Run configuration failed schema validation."""

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer
