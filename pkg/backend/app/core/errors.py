"""
Exception hierarchy for tandemcal.

Every failure raised by the simulation core derives from TandemcalError so the
entrypoint can print a short summary instead of a traceback.
"""

from typing import Optional


class TandemcalError(Exception):
    """Base class for all tandemcal errors."""


class DimensionMismatchError(TandemcalError, ValueError):
    """Operand shapes do not compose. The message names the offending operand."""


class NormalizationError(TandemcalError):
    """First element is numerically zero, so the scale gauge cannot be fixed."""


class ZeroCoefficientError(NormalizationError, ValueError):
    """A reciprocity coefficient or α entry is zero, so it cannot be inverted."""


class DegenerateChannelError(TandemcalError):
    """Beam pair is (numerically) orthogonal to the channel."""


class ConditioningError(TandemcalError):
    """A beamformer matrix is too ill-conditioned to invert."""


class DegenerateRatioError(TandemcalError):
    """Reverse observation of the inter-AP exchange is too small to divide by."""


class PerturbationError(TandemcalError):
    """Perturbed beam set never reached full rank within the retry budget."""


class RankDeficiencyError(TandemcalError):
    """HᵀH is singular: fewer effective antennas than users."""


class InvalidSinrError(TandemcalError, ValueError):
    """Negative SINR passed to the rate computation."""


class ConfigError(TandemcalError):
    """Experiment config file is malformed or violates SystemConfig invariants."""


class SweepAxisError(TandemcalError, ValueError):
    """Unknown sweep axis or a value that is invalid for the axis."""


class TrialError(TandemcalError):
    """A Monte Carlo trial failed. Wraps the cause and records the trial index."""

    def __init__(self, trial_index: int, cause: Optional[BaseException] = None):
        self.trial_index = trial_index
        self.cause = cause
        detail = f"{type(cause).__name__}: {cause}" if cause is not None else "failed"
        super().__init__(f"trial {trial_index}: {detail}")

    def __reduce__(self):
        # keep picklable across the sweep process pool
        return (type(self), (self.trial_index, self.cause))
