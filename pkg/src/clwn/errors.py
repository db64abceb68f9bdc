"""Exception types shared by the library and the command line front end."""


class ClwnError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(ClwnError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NumericalError(ClwnError):
    """Base class for failures of a numerical computation."""


# moebius
class OrientationMismatch(NumericalError, ValueError):
    pass


class DegenerateTriple(NumericalError, ValueError):
    pass


# fuchsian
class CapacityExceeded(NumericalError):
    pass


class NearLimitSet(NumericalError):
    def __init__(self, message, point=None, margin=None):
        super().__init__(message)
        self.point = point
        self.margin = margin


# series
class PoleEncountered(NumericalError):
    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


class ZeroDenominator(NumericalError):
    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


class DenominatorVanishes(NumericalError):
    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest


class SingularSystem(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


# flows
class StepUnderflow(NumericalError):
    def __init__(self, message, t=None, z=None):
        super().__init__(message)
        self.t = t
        self.z = z


class TripleCollision(NumericalError):
    pass


class GuardTripped(NumericalError):
    def __init__(self, message, t=None, margins=None):
        super().__init__(message)
        self.t = t
        self.margins = margins


class SeedSwallowed(NumericalError):
    def __init__(self, message, seed=None, swallow_time=None):
        super().__init__(message)
        self.seed = seed
        self.swallow_time = swallow_time


class FreenessWarning(UserWarning):
    """Emitted when the interval ping-pong test cannot confirm freeness."""


class ShellWarning(UserWarning):
    """Emitted when an outer-shell product factor is far from 1."""
