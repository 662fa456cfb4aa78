"""Exception hierarchy for the PT-SUSY toolkit."""

from typing import Optional, Sequence


class PTSusyError(Exception):
    """Base class for every solver, construction and study failure."""


class GridAlignmentError(PTSusyError):
    """A delta position or path end does not fall on a grid node."""


class DivergenceError(PTSusyError):
    """A shot exceeded the overflow guard."""

    def __init__(self, position: float, magnitude: float):
        super().__init__(f"wavefunction diverged at x={position:.6g} (|phi|={magnitude:.3g})")
        self.position = position
        self.magnitude = magnitude

    def __reduce__(self):
        return type(self), (self.position, self.magnitude)


class ConvergenceError(PTSusyError):
    """Newton iteration did not reach the requested tolerance."""


class SingularJacobianError(ConvergenceError):
    """The finite-difference Jacobian is numerically singular."""


class PoleError(PTSusyError):
    """A superpotential has a pole inside the region where it is used."""

    def __init__(self, message: str, positions: Sequence[float] = ()):
        super().__init__(message)
        self.positions = list(positions)

    def __reduce__(self):
        return type(self), (str(self), self.positions)


class NodalStateError(PoleError):
    """The state used to build a superpotential has a node."""

    def __init__(self, position: float):
        super().__init__(f"state has a node near x={position:.6g}", [position])
        self.position = position

    def __reduce__(self):
        return type(self), (self.position,)


class SuperpotentialError(PTSusyError):
    """A superpotential cannot be built from the given data."""


class ContinuationGapError(PTSusyError):
    """Parameter continuation could not bridge a step."""

    def __init__(self, gamma: float, reason: Optional[str] = None):
        message = f"continuation gap at gamma={gamma:.6g}"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message)
        self.gamma = gamma
        self.reason = reason

    # Instances cross process boundaries in parallel sweeps.
    def __reduce__(self):
        return type(self), (self.gamma, self.reason)


class OracleError(PTSusyError):
    """The transcendental eigenvalue equation has no admissible roots."""


class CalibrationError(PTSusyError):
    """A target energy cannot be reached by any separation."""


class EPStudyError(PTSusyError):
    """Independent exceptional-point estimates disagree."""


class ConfigError(ValueError):
    """Malformed configuration file line."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
