"""Exception hierarchy shared by the solver, the operator workbench and the CLI."""


class EPError(Exception):
    """Base class for every error raised by eplab."""


class ParameterDomainError(EPError, ValueError):
    """Physical parameter outside the admissible range (e.g. gamma <= 1)."""


class VacuumError(EPError, ValueError):
    """Density reached (or would reach) zero, where the transform degenerates."""


class NeutralityError(EPError, ValueError):
    """Net charge is not zero, so the 2D potential cannot decay at infinity."""


class OriginRegularityError(EPError, ValueError):
    """Radial vector profile does not vanish at r = 0."""


class DomainTooSmallError(EPError, ValueError):
    """Periodic box too small for the requested propagation time."""


class DataError(EPError, ValueError):
    """Input series unusable (non-positive norms, bad window, ...)."""


class InstabilityError(EPError, ArithmeticError):
    """Non-finite values appeared during a right-hand-side evaluation or step."""


class InconsistencyError(EPError, ArithmeticError):
    """Two routes that must agree produced incompatible results."""


class CompatibilityError(EPError, ValueError):
    """Snapshot header does not match the expected grid or parameters."""


class ConfigError(EPError, ValueError):
    """Base class for configuration file problems."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class MissingKeyError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


class DuplicateKeyError(ConfigError):
    pass


class OutOfRangeError(ConfigError):
    pass


class MalformedNumberError(ConfigError):
    pass
