"""Exception types raised by the mprl package."""


class MprlError(Exception):
    """Base class for all package-specific errors."""


class NoImpactError(MprlError):
    """Ball velocity is zero or points away from the interception plane."""


class HorizonExceededError(MprlError):
    """Predicted interception lies beyond the propagation horizon."""


class CapExceededError(MprlError):
    """Enumerative search would exceed the sequence cap."""


class InfeasibleProblemError(MprlError):
    """Every action sequence violates the state constraints."""


class BallNotFoundError(MprlError):
    """No ball-valued pixel anywhere in the frame."""


class PaddleNotFoundError(MprlError):
    """No paddle-valued pixel anywhere in the frame."""


class StepAfterTerminalError(MprlError):
    """step() called on a finished game."""


class ContractViolationError(MprlError):
    """An operation was consulted outside its contract (e.g. the safety
    controller queried inside the safe region)."""
