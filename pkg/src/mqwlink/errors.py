"""Exception hierarchy shared by all modules."""


class MqwLinkError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(MqwLinkError, ValueError):
    """Invalid parameter, waveform or configuration value."""

    def __init__(self, message, key=None, line=None):
        self.message = message
        self.key = key
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None and key not in message:
            prefix += f"{key}: "
        super().__init__(prefix + message)


class DomainError(MqwLinkError, ValueError):
    """Argument outside the domain of a closed-form law."""


class SimulationError(MqwLinkError, RuntimeError):
    """Integration failure; carries the simulation time where it occurred."""

    def __init__(self, message, t=None):
        self.t = t
        if t is not None:
            message = f"{message} (t = {t:.6e} s)"
        super().__init__(message)


class NegativeCarrierDensity(SimulationError):
    pass


class NegativePhotonDensity(SimulationError):
    pass


class NoConvergence(SimulationError):
    pass


class BelowThreshold(MqwLinkError, ValueError):
    pass


class InsufficientData(MqwLinkError, ValueError):
    pass


class MissingLevel(MqwLinkError, ValueError):
    pass


class Infeasible(MqwLinkError):
    """No candidate operating point satisfies the constraints."""
