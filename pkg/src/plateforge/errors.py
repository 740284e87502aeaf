"""Exception hierarchy for the planning pipeline."""


class PlanningError(Exception):
    """Base class for all plateforge errors."""


class MalformedStl(PlanningError):
    """STL bytes violate the binary record layout or the ASCII grammar."""


class EmptyMesh(PlanningError):
    """Mesh has no valid (non-degenerate) faces."""


class MalformedCatalog(PlanningError):
    """Catalog document violates the documented JSON schema."""


class InvariantViolation(PlanningError):
    """A plate model's lengths are mutually inconsistent."""

    def __init__(self, message, model_id=None):
        super().__init__(message)
        self.model_id = model_id


class GeometryInfeasible(PlanningError):
    """Requested ring dimensions cannot produce a valid solid."""


class DegenerateFrame(PlanningError):
    """No tangent direction can be constructed at the seed anchor."""


class SeedMiss(PlanningError):
    """The central cascade ray missed the surface (inconsistent frame)."""


class IndexOutOfRange(PlanningError):
    """Marker index outside the baseline."""


class BaselineTooShort(PlanningError):
    """Baseline arc cannot carry the requested plate model.

    Carries the span the model needs (ring-center to ring-center) and the
    arc actually available, both in mm.
    """

    def __init__(self, required_mm, available_mm):
        super().__init__(
            f"baseline too short: required {required_mm:.3f} mm span "
            f"centered on the seed, available {available_mm:.3f} mm"
        )
        self.required_mm = required_mm
        self.available_mm = available_mm


class DegenerateDirection(PlanningError):
    """Ring direction vector vanishes after in-plane projection."""


class NoSuchSide(PlanningError):
    """Attachment corners requested on a closed ring side."""


class FlippedFrame(PlanningError):
    """Consecutive bridge rectangles disagree by more than 90 degrees."""

    def __init__(self, message, rectangle_index=None):
        super().__init__(message)
        self.rectangle_index = rectangle_index


class NothingToSave(PlanningError):
    """Session has no in-progress implant."""


class EmptySession(PlanningError):
    """Session has no implants to export."""
