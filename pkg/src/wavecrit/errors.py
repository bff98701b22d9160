"""Shared exception types.

All failures that contracts promise to diagnose raise a subclass of
WavecritError with a short, stable message prefix, so callers (and the
CLI exit-code logic) can match on type rather than text.
"""


class WavecritError(Exception):
    """Base class for all package errors.

    Keyword arguments become attributes, so raisers can attach a witness
    (index, radius, value) without each subclass defining a constructor.
    """

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        for key, value in details.items():
            setattr(self, key, value)


class GridError(WavecritError):
    """Grid is unusable for the requested operation ("grid too coarse")."""


class ExtentError(WavecritError):
    """Requested evaluation leaves the resolved radial extent."""


class InvertibilityError(WavecritError):
    """A value left the invertible range (a, b) of a profile."""


class KatoClassError(WavecritError):
    """Integral defining the Kato norm diverges ("not in Kato class")."""


class CeasedSolutionError(WavecritError):
    """Exact solution ceased (blow-up) before the requested time."""


class WitnessError(WavecritError):
    """Criterion-failure witness inconsistent with the propagated field."""


class AdmissibilityError(WavecritError):
    """Data admit no monotonicity guarantee ("monotonicity not guaranteed")."""


class SolitonError(WavecritError):
    """Requested soliton does not exist for the given exponent."""


class ConvergenceError(WavecritError):
    """Refinement study not in the asymptotic regime."""


class ConfigError(WavecritError):
    """Scenario configuration is invalid."""
