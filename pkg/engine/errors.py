"""
Error hierarchy. Every error carries a machine-readable ``kind`` that the
CLI prints in its structured error JSON.

InputError subclasses mean the caller handed in something the operation
cannot work with (exit code 2); InvariantViolation subclasses mean an
identity or theorem-backed inequality failed to hold (exit code 1).
"""


class GeometryError(Exception):
    kind = "geometry_error"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_json(self):
        payload = {"error": self.kind, "message": str(self)}
        if self.details:
            payload["details"] = self.details
        return payload


# -------------------------------
# INPUT ERRORS (exit 2)
# -------------------------------
class InputError(GeometryError, ValueError):
    kind = "input_error"


class ParseError(InputError):
    kind = "parse_error"


class DegenerateInput(InputError):
    kind = "degenerate_input"


class DimensionMismatch(InputError):
    kind = "dimension_mismatch"


class NotSupported(InputError):
    kind = "not_supported"


class ModeNotSupported(InputError):
    kind = "mode_not_supported"


class MissingSeed(InputError):
    kind = "missing_seed"


class Infeasible(InputError):
    kind = "infeasible"


class Unbounded(InputError):
    kind = "unbounded"


class GaugeBodyError(InputError):
    kind = "gauge_body_error"


class NotGeneralPosition(InputError):
    kind = "not_general_position"

    def __init__(self, message="", report=None):
        super().__init__(message)
        self.report = report

    def to_json(self):
        payload = super().to_json()
        if self.report is not None:
            payload["report"] = self.report.to_json()
        return payload


class NotStronglyGeneralPosition(NotGeneralPosition):
    kind = "not_strongly_general_position"


class OnExceptionalSet(InputError):
    kind = "on_exceptional_set"


class OutsideBody(InputError):
    kind = "outside_body"


# -------------------------------
# INVARIANT VIOLATIONS (exit 1)
# -------------------------------
class InvariantViolation(GeometryError, AssertionError):
    kind = "invariant_violation"


class SingularSystem(InvariantViolation):
    kind = "singular_system"


class DualityGap(InvariantViolation):
    kind = "duality_gap"


class VolumeMismatch(InvariantViolation):
    kind = "volume_mismatch"


class BoundViolated(InvariantViolation):
    kind = "bound_violated"


class MismatchedPaths(InvariantViolation):
    kind = "mismatched_paths"


class FormulaMismatch(InvariantViolation):
    kind = "formula_mismatch"


class MeasureMismatch(InvariantViolation):
    kind = "measure_mismatch"


class GaugeDegenerate(InvariantViolation):
    kind = "gauge_degenerate"


class PositionCheckFailed(InvariantViolation):
    kind = "position_check_failed"


class InfeasibleLambda(InvariantViolation):
    kind = "infeasible_lambda"


class SeparationFailed(InvariantViolation):
    kind = "separation_failed"
