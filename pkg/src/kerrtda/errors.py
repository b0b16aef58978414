"""Exception hierarchy shared by all modules."""


class KerrTDAError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteState(KerrTDAError):
    """The classical integration diverged or left the overflow guard."""


class InvalidDimension(KerrTDAError, ValueError):
    pass


class TruncationBreach(KerrTDAError):
    """Population reached the top of the truncated Fock space."""


class StepTooLarge(KerrTDAError):
    """The per-step jump probability is too large for the chosen ``dt``."""


class NormIncrease(KerrTDAError):
    """The unnormalized trajectory norm grew across a step."""


class TraceDrift(KerrTDAError):
    pass


class DimensionTooLarge(KerrTDAError, ValueError):
    pass


class SeriesTooShort(KerrTDAError, ValueError):
    pass


class EmptyCloud(KerrTDAError, ValueError):
    pass


class RadiusNonPositive(KerrTDAError, ValueError):
    pass


class SizeCap(KerrTDAError):
    """The Rips complex would exceed the configured simplex budget."""


class ConfigError(KerrTDAError, ValueError):
    pass
