"""Exception hierarchy shared by all modules.

Two families matter operationally: validation failures (bad inputs,
violated invariants; CLI exit code 2) and numerical guard failures
(the computation started but a runtime safeguard fired; CLI exit
code 3).  Every exception records which module and guard produced it
so failure reports can name the culprit.
"""


class SemigaussError(Exception):
    exit_code = 2

    def __init__(self, message, *, module="semigauss", guard="error"):
        super().__init__(message)
        self.module = module
        self.guard = guard

    def __str__(self):
        return f"[{self.module}:{self.guard}] {super().__str__()}"


class ValidationError(SemigaussError):
    """Invalid input, configuration, or violated type invariant."""

    exit_code = 2


class NumericalGuardError(SemigaussError):
    """A runtime numerical safeguard fired; partial results may exist."""

    exit_code = 3


class ConditioningError(NumericalGuardError):
    """Linear solve too ill-conditioned to trust."""


class ResolutionError(NumericalGuardError):
    """Sampling too coarse for the requested analysis."""


class CoverageError(NumericalGuardError):
    """Grid or time window does not cover the state or the analysis."""


class AliasingError(NumericalGuardError):
    """Spectral tail mass reached the anti-aliasing guard band."""


class TrajectoryEscapeError(NumericalGuardError):
    """State became non-finite during integration."""


class StepUnderflowError(NumericalGuardError):
    """Adaptive step size collapsed below machine resolution."""


class AmbiguityError(NumericalGuardError):
    """Several near-period candidates are indistinguishable at tolerance."""
