class LabError(Exception):
    """Base class for every domain error raised by the lab."""


class NotHyperbolic(LabError):
    """An axis or translation length was requested from a non-hyperbolic map."""


class DegenerateTriple(LabError):
    """Two points of a boundary triple coincide within tolerance."""


class ReductionStalled(LabError):
    """Domain reduction hit its iteration cap."""


class TrivialWord(LabError):
    """A closed geodesic was requested for the empty word."""


class RelatorViolation(LabError):
    """Generator images do not send the relator to a conjugate of itself."""


class MonotonicityViolation(LabError):
    """Sampled boundary images are not in circular order."""


class DepthExceeded(LabError):
    """An earthquake chain is longer than the allowed depth."""


class NotSymplectic(LabError):
    """An integer H1 matrix fails M^T J M = J."""


class InversionFailed(LabError):
    """Bisection could not invert a circle map."""


class ConfigError(LabError):
    """A configuration value does not resolve."""


class QuadratureError(LabError):
    """Adaptive quadrature hit its cell cap before reaching the tolerance."""
