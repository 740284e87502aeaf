"""Surface-conforming centerline extraction.

From a clicked seed point the planner derives a frame (surface anchor,
outward normal N, tangent direction D controlled by the mouse-wheel
angle) and marches a cascade of parallel rays: origins lifted above the
anchor and stepped along D, each cast along -N. The ordered hit points
are the baseline markers the implant generator consumes.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateFrame, IndexOutOfRange, SeedMiss
from .geometry import normalize, rotation_about_axis
from .spatial import SpatialIndex

DEFAULT_STEP_MM = 0.5

# origins are lifted this fraction of the bbox diagonal above the anchor
CASCADE_HEIGHT_FRACTION = 0.05


def surface_epsilon(mesh) -> float:
    """On-surface tolerance: 1e-6 of the mesh bbox diagonal."""
    return 1e-6 * mesh.bbox_diagonal()


@dataclass(frozen=True)
class SeedFrame:
    """Anchor on the surface plus an orthonormal (normal, tangent) pair."""

    anchor: np.ndarray
    normal: np.ndarray
    direction: np.ndarray
    wheel_angle: float

    def __post_init__(self):
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float).reshape(3))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float).reshape(3))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float).reshape(3))


@dataclass(frozen=True)
class BaselinePoint:
    position: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float).reshape(3))


@dataclass(frozen=True)
class Baseline:
    """Ordered surface markers along the cascade axis.

    `seed_index` is the marker cast from k = 0 (it re-finds the anchor);
    `truncated` flags whether either end ran off the mesh.
    """

    points: tuple
    seed: SeedFrame
    model_id: str
    step: float
    truncated: tuple
    seed_index: int

    def positions(self):
        return np.array([p.position for p in self.points])

    def normals(self):
        return np.array([p.normal for p in self.points])

    def arc_lengths(self):
        """Cumulative polyline arc length per marker, starting at 0."""
        pos = self.positions()
        seg = np.linalg.norm(np.diff(pos, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])


def _orient_outward(index: SpatialIndex, point, normal):
    """Flip `normal` toward the side with fewer mesh crossings."""
    up = index.count_hits(point, normal)
    down = index.count_hits(point, -normal)
    return normal if up <= down else -normal


def _oriented_face_normal(index: SpatialIndex, face, surface_point, toward=None):
    """Winding normal of `face`, flipped toward a reference side.

    `toward`: an off-surface point the normal should face; when it lies
    on the surface (no preferred side) the outward heuristic decides.
    """
    n = index.mesh.face_normals[face]
    eps = surface_epsilon(index.mesh)
    if toward is not None:
        offset = np.asarray(toward, dtype=float) - surface_point
        if np.linalg.norm(offset) > eps:
            side = float(np.dot(n, offset))
            if side < 0:
                return -n
            if side > 0:
                return n
    return _orient_outward(index, surface_point, n)


def make_seed_frame(index: SpatialIndex, click, wheel_angle: float, ref_tangent=None) -> SeedFrame:
    """Project a click onto the surface and build the cascade frame.

    The tangent reference defaults to global +x (global +y when the
    normal is parallel to x); `wheel_angle` rotates it about the normal.
    """
    click = np.asarray(click, dtype=float).reshape(3)
    face, anchor, _dist = index.nearest_triangle(click)
    normal = _oriented_face_normal(index, face, anchor, toward=click)

    if ref_tangent is None:
        t0 = np.array([1.0, 0.0, 0.0])
        proj = t0 - np.dot(t0, normal) * normal
        if np.linalg.norm(proj) < 1e-9:
            t0 = np.array([0.0, 1.0, 0.0])
            proj = t0 - np.dot(t0, normal) * normal
    else:
        t0 = np.asarray(ref_tangent, dtype=float).reshape(3)
        proj = t0 - np.dot(t0, normal) * normal
        if np.linalg.norm(proj) < 1e-9:
            raise DegenerateFrame("reference tangent is parallel to the surface normal")
    tangent = normalize(proj)
    direction = rotation_about_axis(normal, wheel_angle) @ tangent
    return SeedFrame(anchor=anchor, normal=normal, direction=direction, wheel_angle=float(wheel_angle))


def cascade_origins(index: SpatialIndex, frame: SeedFrame, overall_length: float, step: float):
    """Ray origins for the cascade: anchor + h·N + k·step·D, k in [-K, K]."""
    if step <= 0:
        raise ValueError("step must be positive")
    if overall_length < step:
        raise ValueError("plate length shorter than one step")
    h = CASCADE_HEIGHT_FRACTION * index.mesh.bbox_diagonal()
    half_steps = math.floor((overall_length / 2.0) / step + 1e-9)
    ks = np.arange(-half_steps, half_steps + 1)
    base = frame.anchor + h * frame.normal
    return base + (ks * step)[:, None] * frame.direction, ks


def compute_baseline(index: SpatialIndex, frame: SeedFrame, model, step: float = DEFAULT_STEP_MM) -> Baseline:
    """Cast the cascade and collect markers.

    A miss stops extension past that side (truncation) and never leaves
    holes in the middle. The k = 0 ray must hit; anything else means the
    frame and mesh disagree (SeedMiss).
    """
    origins, ks = cascade_origins(index, frame, model.overall_length, step)
    dirs = np.broadcast_to(-frame.normal, origins.shape)
    faces, ts, _us, _vs = index.first_hits(origins, dirs)

    center = int(np.nonzero(ks == 0)[0][0])
    if faces[center] < 0:
        raise SeedMiss("central cascade ray missed the surface")

    lo = center
    while lo - 1 >= 0 and faces[lo - 1] >= 0:
        lo -= 1
    hi = center
    while hi + 1 < len(ks) and faces[hi + 1] >= 0:
        hi += 1

    points = []
    for i in range(lo, hi + 1):
        pos = origins[i] - ts[i] * frame.normal
        n = index.mesh.face_normals[faces[i]]
        if float(np.dot(n, frame.normal)) < 0:
            n = -n
        points.append(BaselinePoint(position=pos, normal=n))

    return Baseline(
        points=tuple(points),
        seed=frame,
        model_id=model.id,
        step=float(step),
        truncated=(lo > 0, hi < len(ks) - 1),
        seed_index=center - lo,
    )


def adjust_marker(baseline: Baseline, index: SpatialIndex, marker_index: int, new_position) -> Baseline:
    """Re-project one marker to the surface point closest to new_position."""
    if not 0 <= marker_index < len(baseline.points):
        raise IndexOutOfRange(
            f"marker {marker_index} outside 0..{len(baseline.points) - 1}"
        )
    new_position = np.asarray(new_position, dtype=float).reshape(3)
    face, cp, _dist = index.nearest_triangle(new_position)
    normal = _oriented_face_normal(index, face, cp, toward=new_position)
    points = list(baseline.points)
    points[marker_index] = BaselinePoint(position=cp, normal=normal)
    return replace(baseline, points=tuple(points))


# --- wire format ----------------------------------------------------------


def baseline_to_dict(baseline: Baseline) -> dict:
    return {
        "model_id": baseline.model_id,
        "step_mm": baseline.step,
        "wheel_angle_rad": baseline.seed.wheel_angle,
        "seed": {
            "anchor": list(baseline.seed.anchor),
            "N": list(baseline.seed.normal),
            "D": list(baseline.seed.direction),
        },
        "points": [
            {"p": list(p.position), "n": list(p.normal)} for p in baseline.points
        ],
        "truncated": [bool(baseline.truncated[0]), bool(baseline.truncated[1])],
    }


def baseline_from_dict(doc: dict) -> Baseline:
    seed = SeedFrame(
        anchor=doc["seed"]["anchor"],
        normal=doc["seed"]["N"],
        direction=doc["seed"]["D"],
        wheel_angle=float(doc["wheel_angle_rad"]),
    )
    points = tuple(
        BaselinePoint(position=p["p"], normal=p["n"]) for p in doc["points"]
    )
    positions = np.array([p.position for p in points])
    seed_index = int(np.argmin(np.linalg.norm(positions - seed.anchor, axis=1)))
    return Baseline(
        points=points,
        seed=seed,
        model_id=doc["model_id"],
        step=float(doc["step_mm"]),
        truncated=(bool(doc["truncated"][0]), bool(doc["truncated"][1])),
        seed_index=seed_index,
    )
