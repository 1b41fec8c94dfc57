"""Exception hierarchy.

Every error carries a short ``category`` string. The command line tool prints
it as part of a machine-readable failure record and maps it to an exit code.
"""


class GeoGateError(Exception):
    """Base class for all library errors."""

    category = "error"
    exit_code = 1


class InvalidDimensionError(GeoGateError, ValueError):
    category = "invalid-dimension"
    exit_code = 2


class InvalidParameterError(GeoGateError, ValueError):
    category = "invalid-parameter"
    exit_code = 2


class InvalidEnvelopeError(InvalidParameterError):
    category = "invalid-envelope"


class LayoutMismatchError(GeoGateError, ValueError):
    category = "layout-mismatch"
    exit_code = 2


class SingularConfigurationError(GeoGateError, ValueError):
    category = "singular-configuration"
    exit_code = 3


class DegenerateLoopError(GeoGateError, ValueError):
    category = "degenerate-loop"
    exit_code = 3


class PlanMismatchError(GeoGateError, ValueError):
    category = "plan-mismatch"
    exit_code = 3


class IntegratorFailureError(GeoGateError, RuntimeError):
    category = "integrator-failure"
    exit_code = 4


class CalibrationError(GeoGateError, RuntimeError):
    category = "calibration-failure"
    exit_code = 4


class SpecValidationError(GeoGateError, ValueError):
    category = "spec-validation"
    exit_code = 2


class ConfigError(GeoGateError, ValueError):
    category = "config"
    exit_code = 2
