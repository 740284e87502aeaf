"""Implant synthesis: rings posed along the baseline, bridges lofted
between them.

Ring normals align with the interpolated baseline normal in full 3D; the
ring direction is aligned only through its in-plane component (the
baseline tangent need not be perpendicular to the normal, the ring frame
always is). Bridges are built from one rectangle per intermediate
baseline marker, joined by two triangles per side face.
"""

import base64
from dataclasses import dataclass

import numpy as np

from .baseline import Baseline, baseline_from_dict, baseline_to_dict
from .catalog import PlateModel, RingMesh, ring_mesh
from .errors import BaselineTooShort, DegenerateDirection, FlippedFrame, NoSuchSide
from .geometry import RigidTransform, frame_rotation, normalize, slerp_unit
from .mesh import AREA_EPS, TriangleMesh, apply_transform, merge_meshes
from .stl import load_stl, save_stl

# consecutive bridge rectangles disagreeing by more than 90° mean the
# surface folds tighter than a plate can follow
FLIP_DOT_LIMIT = -1e-9


@dataclass(frozen=True)
class RingPlacement:
    """Pose of one ring: center sits bar_thickness/2 above the surface
    point so the plate underside rests on the bone."""

    ring_index: int
    center: np.ndarray
    normal: np.ndarray
    direction: np.ndarray
    forward_is_next: bool
    arc: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(3)
        n = normalize(self.normal)
        d_raw = np.asarray(self.direction, dtype=float).reshape(3)
        d_in = d_raw - np.dot(d_raw, n) * n
        norm = np.linalg.norm(d_in)
        if norm < 1e-9:
            raise DegenerateDirection(
                f"ring {self.ring_index}: direction parallel to the normal"
            )
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "direction", d_in / norm)

    @property
    def pose(self) -> RigidTransform:
        """Canonical +z to normal (exact), +x to the in-plane direction."""
        return RigidTransform(frame_rotation(self.normal, self.direction), self.center)


@dataclass(frozen=True)
class BridgeSection:
    start_corners: np.ndarray
    end_corners: np.ndarray
    waypoints: tuple
    mesh: TriangleMesh


@dataclass(frozen=True)
class Implant:
    model_id: str
    baseline: Baseline
    placements: tuple
    mesh: TriangleMesh


def _interpolate(arcs, positions, normals, s):
    """Linear position / slerp normal at arc coordinate s (clamped)."""
    s = float(np.clip(s, arcs[0], arcs[-1]))
    seg = int(np.clip(np.searchsorted(arcs, s, side="right") - 1, 0, len(arcs) - 2))
    span = arcs[seg + 1] - arcs[seg]
    frac = 0.0 if span < 1e-15 else (s - arcs[seg]) / span
    pos = (1.0 - frac) * positions[seg] + frac * positions[seg + 1]
    n = normalize(slerp_unit(normals[seg], normals[seg + 1], frac))
    return pos, n


def place_rings(baseline: Baseline, model: PlateModel) -> list:
    """Walk the polyline by arc length and pose each ring.

    The first ring sits half the plate length (minus the end-ring radius)
    from the seed marker toward the positive end; the rest follow at the
    model's bar gaps toward the negative end.
    """
    arcs = baseline.arc_lengths()
    positions = baseline.positions()
    normals = baseline.normals()
    s0 = arcs[baseline.seed_index]

    half_span = model.overall_length / 2.0 - model.end_ring_radius
    ring_arcs = [s0 + half_span]
    for gap in model.bar_lengths:
        ring_arcs.append(ring_arcs[-1] - gap)

    required = model.overall_length - 2.0 * model.end_ring_radius
    available = float(arcs[-1] - arcs[0])
    if ring_arcs[0] > arcs[-1] + 1e-9 or ring_arcs[-1] < arcs[0] - 1e-9:
        raise BaselineTooShort(required, available)

    centers = []
    ns = []
    for s in ring_arcs:
        pos, n = _interpolate(arcs, positions, normals, s)
        centers.append(pos + (model.bar_thickness / 2.0) * n)
        ns.append(n)

    placements = []
    last = len(ring_arcs) - 1
    for i in range(last + 1):
        if i < last:
            d = centers[i + 1] - centers[i]
            forward = True
        else:
            d = centers[i - 1] - centers[i]
            forward = False
        placements.append(
            RingPlacement(
                ring_index=i,
                center=centers[i],
                normal=ns[i],
                direction=d,
                forward_is_next=forward,
                arc=float(ring_arcs[i]),
            )
        )
    return placements


def pose_ring(ring: RingMesh, placement: RingPlacement) -> TriangleMesh:
    """Rigidly move the canonical ring solid into its placement."""
    return apply_transform(ring.mesh, placement.pose)


def attachment_corners(placement: RingPlacement, ring: RingMesh, side: str) -> np.ndarray:
    """Posed corners of the flat side facing the requested neighbor,
    ordered (bottom-left, bottom-right, top-right, top-left) in the
    placement frame (direction, normal)."""
    if side not in ("toward_next", "toward_prev"):
        raise ValueError(f"side must be toward_next/toward_prev, got {side!r}")
    wants_forward = (side == "toward_next") == placement.forward_is_next
    flat = "front" if wants_forward else "back"
    if flat not in ring.corner_tags:
        raise NoSuchSide(f"ring {placement.ring_index} has no flat side {side}")
    corners = ring.mesh.vertices[list(ring.corner_tags[flat])]
    return placement.pose.apply(corners)


def _rect_normal(corners):
    return normalize(corners[3] - corners[0])


def build_bridge(start_corners, end_corners, between, bar_width: float,
                 bar_thickness: float) -> BridgeSection:
    """Loft a bar between two attachment rectangles.

    One rectangle is spanned per intermediate baseline point, oriented by
    the local (tangent-toward-end × normal) frame and lifted half the bar
    thickness; consecutive rectangles are stitched with two triangles per
    side face. The two open ends abut the ring flats.
    """
    start_corners = np.asarray(start_corners, dtype=float).reshape(4, 3)
    end_corners = np.asarray(end_corners, dtype=float).reshape(4, 3)
    half_w = bar_width / 2.0
    half_t = bar_thickness / 2.0

    centers = [start_corners.mean(axis=0)]
    for p in between:
        centers.append(np.asarray(p.position, dtype=float) + half_t * np.asarray(p.normal, dtype=float))
    centers.append(end_corners.mean(axis=0))

    rects = [start_corners]
    for j, p in enumerate(between):
        n = normalize(p.normal)
        tangent = centers[j + 2] - centers[j + 1]
        side = np.cross(n, tangent)
        norm = np.linalg.norm(side)
        if norm < 1e-9:
            raise DegenerateDirection(f"bridge rectangle {j}: tangent parallel to normal")
        s = side / norm
        c = centers[j + 1]
        rects.append(
            np.array(
                [
                    c - half_w * s - half_t * n,
                    c + half_w * s - half_t * n,
                    c + half_w * s + half_t * n,
                    c - half_w * s + half_t * n,
                ]
            )
        )
    rects.append(end_corners)

    rect_normals = [_rect_normal(r) for r in rects]
    for k in range(len(rects) - 1):
        if float(np.dot(rect_normals[k], rect_normals[k + 1])) < FLIP_DOT_LIMIT:
            raise FlippedFrame(
                f"bridge rectangles {k} and {k + 1} disagree by more than 90°",
                rectangle_index=k,
            )

    verts = np.vstack(rects)
    faces = []
    for k in range(len(rects) - 1):
        base = 4 * k
        for f in range(4):
            n1 = base + f
            n2 = base + (f + 1) % 4
            n3 = base + 4 + (f + 1) % 4
            n4 = base + 4 + f
            faces.append([n1, n2, n3])
            faces.append([n1, n3, n4])
    mesh = TriangleMesh(verts, np.asarray(faces))
    return BridgeSection(
        start_corners=start_corners,
        end_corners=end_corners,
        waypoints=tuple(np.asarray(r) for r in rects[1:-1]),
        mesh=mesh,
    )


def default_ring_provider(model: PlateModel):
    """Memoized canonical ring solids for a model."""
    cache = {}

    def provide(spec) -> RingMesh:
        if spec not in cache:
            cache[spec] = ring_mesh(spec, model.bar_width, model.bar_thickness)
        return cache[spec]

    return provide


def generate_implant(baseline: Baseline, model: PlateModel, rings=None) -> Implant:
    """Full synthesis: place rings, pose them, loft every bridge."""
    provider = rings if rings is not None else default_ring_provider(model)
    placements = place_rings(baseline, model)
    arcs = baseline.arc_lengths()

    ring_solids = [provider(spec) for spec in model.rings]
    parts = [pose_ring(ring_solids[i], placements[i]) for i in range(len(placements))]

    for i in range(len(placements) - 1):
        a, b = placements[i], placements[i + 1]
        start = attachment_corners(a, ring_solids[i], "toward_next")
        end = attachment_corners(b, ring_solids[i + 1], "toward_prev")
        if not b.forward_is_next:
            # the last ring faces backward: mirror its corner order into
            # the bridge travel frame (swap left/right)
            end = end[[1, 0, 3, 2]]
        window_hi = a.arc - ring_solids[i].flat_distance - 1e-9
        window_lo = b.arc + ring_solids[i + 1].flat_distance + 1e-9
        inside = np.nonzero((arcs > window_lo) & (arcs < window_hi))[0]
        between = [baseline.points[j] for j in reversed(inside)]
        parts.append(
            build_bridge(start, end, between, model.bar_width, model.bar_thickness).mesh
        )

    mesh = merge_meshes(parts)
    if not np.isfinite(mesh.vertices).all():
        raise ValueError("implant mesh contains non-finite vertices")
    if mesh.face_areas().min() < AREA_EPS:
        raise ValueError("implant mesh contains degenerate faces")
    return Implant(
        model_id=model.id,
        baseline=baseline,
        placements=tuple(placements),
        mesh=mesh,
    )


def implant_span_mm(implant: Implant) -> float:
    """Outer-edge to outer-edge extent along the plate axis."""
    first = implant.placements[0].center
    last = implant.placements[-1].center
    axis = normalize(first - last)
    proj = implant.mesh.vertices @ axis
    return float(proj.max() - proj.min())


# --- serialization (session files) -----------------------------------------


def implant_to_dict(implant: Implant) -> dict:
    return {
        "model_id": implant.model_id,
        "baseline": baseline_to_dict(implant.baseline),
        "placements": [
            {
                "ring_index": p.ring_index,
                "center": list(p.center),
                "normal": list(p.normal),
                "direction": list(p.direction),
                "forward_is_next": p.forward_is_next,
                "arc": p.arc,
            }
            for p in implant.placements
        ],
        "mesh_stl_b64": base64.b64encode(save_stl(implant.mesh, "binary")).decode("ascii"),
    }


def implant_from_dict(doc: dict) -> Implant:
    placements = tuple(
        RingPlacement(
            ring_index=int(p["ring_index"]),
            center=p["center"],
            normal=p["normal"],
            direction=p["direction"],
            forward_is_next=bool(p["forward_is_next"]),
            arc=float(p["arc"]),
        )
        for p in doc["placements"]
    )
    return Implant(
        model_id=doc["model_id"],
        baseline=baseline_from_dict(doc["baseline"]),
        placements=placements,
        mesh=load_stl(base64.b64decode(doc["mesh_stl_b64"])),
    )
