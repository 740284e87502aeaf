"""The one planning pipeline behind both front doors (CLI and service).

Seed -> frame -> cascade -> implant -> STL, fully deterministic, so the
CLI and the HTTP service produce byte-identical output for equal inputs.
"""

import math
import time
from dataclasses import dataclass

from .baseline import Baseline, SeedFrame, compute_baseline, make_seed_frame
from .catalog import model_by_id
from .implant import Implant, generate_implant, implant_span_mm
from .spatial import SpatialIndex
from .stl import save_stl


@dataclass(frozen=True)
class PlanResult:
    frame: SeedFrame
    baseline: Baseline
    implant: Implant
    stl_bytes: bytes
    report: dict


def run_plan(index: SpatialIndex, models, click, angle_deg: float, model_id: str,
             step_mm: float = 0.5) -> PlanResult:
    """Plan one implant end to end.

    Raises KeyError (unknown model), SeedMiss, or BaselineTooShort.
    """
    model = model_by_id(models, model_id)
    started = time.perf_counter()
    frame = make_seed_frame(index, click, math.radians(angle_deg))
    baseline = compute_baseline(index, frame, model, step_mm)
    implant = generate_implant(baseline, model)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    stl_bytes = save_stl(implant.mesh, "binary")
    report = {
        "point_count": len(baseline.points),
        "truncated": [bool(baseline.truncated[0]), bool(baseline.truncated[1])],
        "ring_count": len(implant.placements),
        "triangle_count": implant.mesh.n_faces,
        "span_mm": implant_span_mm(implant),
        "elapsed_ms": elapsed_ms,
    }
    return PlanResult(frame=frame, baseline=baseline, implant=implant,
                      stl_bytes=stl_bytes, report=report)
