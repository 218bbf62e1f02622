"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so the CLI can map them
to exit code 3; configuration problems raise :class:`ConfigError` (exit 2).
"""


class HillGapError(Exception):
    """Base class for all package errors."""


class ConfigError(HillGapError, ValueError):
    """Invalid run configuration or potential description."""


class NumericalError(HillGapError):
    """A numerical routine could not deliver its contract."""


class QuadratureError(NumericalError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class EigenError(NumericalError):
    def __init__(self, message, fingerprint=None):
        super().__init__(message)
        self.fingerprint = fingerprint


class StepSizeError(NumericalError):
    """Adaptive integrator step fell below the underflow floor."""


class BracketError(NumericalError, ValueError):
    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples or []


class BandAssignmentError(NumericalError):
    def __init__(self, message, m=None):
        super().__init__(message)
        self.m = m


class NearResonanceError(NumericalError):
    pass


class TableExtensionError(NumericalError):
    pass


class UnsupportedFormError(HillGapError, TypeError):
    pass
