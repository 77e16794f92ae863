"""Exception hierarchy for rbfid."""


class RBFidError(Exception):
    """Base class for every error raised by this package."""


class NotTracePreserving(RBFidError, ValueError):
    pass


class DimensionMismatch(RBFidError, ValueError):
    pass


class UnsupportedDimension(RBFidError, ValueError):
    pass


class InvalidProbability(RBFidError, ValueError):
    pass


class ZeroAxis(RBFidError, ValueError):
    pass


class OutOfRange(RBFidError, ValueError):
    pass


class NotCPTP(RBFidError, ValueError):
    pass


class ModelTableIncomplete(RBFidError, ValueError):
    pass


class NotUnitaryResidual(RBFidError, ValueError):
    pass


class NotUnitary(RBFidError, ValueError):
    pass


class LengthMismatch(RBFidError, ValueError):
    pass


class ClosureOverflow(RBFidError, RuntimeError):
    pass


class EigSolverFailure(RBFidError, RuntimeError):
    pass


class DegenerateNoise(RBFidError, ValueError):
    pass


class FormulaPreconditionViolated(RBFidError, ValueError):
    """A closed-form series coefficient was requested but a lower order is nonzero."""


class TaylorIllConditioned(RBFidError, RuntimeError):
    """Finite-difference Taylor coefficients disagree between step sizes."""


class DecompositionGateFailed(RBFidError, RuntimeError):
    """The primitive decomposition table does not give <theta_k^2> = 3/2 theta^2."""


class ConfigError(RBFidError, ValueError):
    """Malformed configuration file or noise-model description."""
