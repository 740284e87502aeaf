"""Parametric miniplate catalog and ring-element solid generation.

Three stock models are built in (M-4138 / M-4320 / M-4322, overall
lengths 23 / 29 / 35 mm, 4 / 4 / 6 rings). Ring cross-section defaults
(radii, thickness, bar section) are configurable placeholders in the
published size class; vendor blueprints are not public.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryInfeasible, InvariantViolation, MalformedCatalog
from .mesh import TriangleMesh

CATALOG_VERSION = 1

DEFAULT_OUTER_RADIUS = 2.5
DEFAULT_HOLE_RADIUS = 1.0
DEFAULT_THICKNESS = 1.0
DEFAULT_BAR_WIDTH = 2.0
DEFAULT_BAR_THICKNESS = 1.0
DEFAULT_SEGMENTS = 32


@dataclass(frozen=True)
class RingSpec:
    """One ring element: an annulus with 1 (end) or 2 (middle) flat
    attachment sides."""

    kind: str  # "end" | "middle"
    outer_radius: float = DEFAULT_OUTER_RADIUS
    hole_radius: float = DEFAULT_HOLE_RADIUS
    thickness: float = DEFAULT_THICKNESS
    segments: int = DEFAULT_SEGMENTS

    def __post_init__(self):
        if self.kind not in ("end", "middle"):
            raise InvariantViolation(f"unknown ring kind {self.kind!r}")
        if not self.hole_radius < self.outer_radius:
            raise InvariantViolation("hole must be smaller than the ring")
        if self.thickness <= 0:
            raise InvariantViolation("ring thickness must be positive")
        if self.segments < 8:
            raise InvariantViolation("ring tessellation too coarse")

    @property
    def flat_sides(self) -> int:
        return 1 if self.kind == "end" else 2


@dataclass(frozen=True)
class PlateModel:
    """Catalog entry. `bar_lengths` are center-to-center ring gaps;
    `overall_length` spans outer edge to outer edge."""

    id: str
    overall_length: float
    rings: tuple
    bar_lengths: tuple
    bar_width: float = DEFAULT_BAR_WIDTH
    bar_thickness: float = DEFAULT_BAR_THICKNESS
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rings", tuple(self.rings))
        object.__setattr__(self, "bar_lengths", tuple(float(b) for b in self.bar_lengths))
        if len(self.rings) < 2:
            raise InvariantViolation("a plate needs at least two rings", self.id)
        if len(self.bar_lengths) != len(self.rings) - 1:
            raise InvariantViolation(
                f"{len(self.rings)} rings need {len(self.rings) - 1} bar gaps, "
                f"got {len(self.bar_lengths)}",
                self.id,
            )
        if self.rings[0].kind != "end" or self.rings[-1].kind != "end":
            raise InvariantViolation("outermost rings must be end rings", self.id)
        if any(r.kind != "middle" for r in self.rings[1:-1]):
            raise InvariantViolation("inner rings must be middle rings", self.id)
        span = sum(self.bar_lengths) + 2 * self.rings[0].outer_radius
        if abs(span - self.overall_length) > 1e-9:
            raise InvariantViolation(
                f"overall length {self.overall_length} != bars + end radii {span}",
                self.id,
            )
        if self.bar_thickness > min(r.thickness for r in self.rings):
            raise InvariantViolation("bar thicker than the rings", self.id)

    @property
    def end_ring_radius(self) -> float:
        return self.rings[0].outer_radius


def _stock_rings(n: int) -> tuple:
    kinds = ["end"] + ["middle"] * (n - 2) + ["end"]
    return tuple(RingSpec(kind=k) for k in kinds)


def catalog() -> list:
    """Built-in plate models (extensible via PLATEFORGE_CATALOG file)."""
    return [
        PlateModel(
            id="M-4138",
            overall_length=23.0,
            rings=_stock_rings(4),
            bar_lengths=(6.0, 6.0, 6.0),
        ),
        PlateModel(
            id="M-4320",
            overall_length=29.0,
            rings=_stock_rings(4),
            # central gap carries the extension; the vendor sheet calls the
            # long bar "9 mm" while the overall-length delta is 6 mm — the
            # overall length is authoritative here
            bar_lengths=(6.0, 12.0, 6.0),
            note="extended central bar (vendor bar figure: 9 mm)",
        ),
        PlateModel(
            id="M-4322",
            overall_length=35.0,
            rings=_stock_rings(6),
            bar_lengths=(6.0, 6.0, 6.0, 6.0, 6.0),
        ),
    ]


def model_by_id(models, model_id: str) -> PlateModel:
    for m in models:
        if m.id == model_id:
            return m
    raise KeyError(model_id)


# --- catalog file ----------------------------------------------------------


def _ring_to_dict(r: RingSpec) -> dict:
    return {
        "kind": r.kind,
        "outer_radius_mm": r.outer_radius,
        "hole_radius_mm": r.hole_radius,
        "thickness_mm": r.thickness,
        "segments": r.segments,
    }


def _model_to_dict(m: PlateModel) -> dict:
    doc = {
        "id": m.id,
        "overall_length_mm": m.overall_length,
        "rings": [_ring_to_dict(r) for r in m.rings],
        "bar_lengths_mm": list(m.bar_lengths),
        "bar_width_mm": m.bar_width,
        "bar_thickness_mm": m.bar_thickness,
    }
    if m.note:
        doc["note"] = m.note
    return doc


def save_catalog(models) -> bytes:
    doc = {"catalog_version": CATALOG_VERSION, "models": [_model_to_dict(m) for m in models]}
    return json.dumps(doc, indent=2).encode()


def load_catalog(data: bytes) -> list:
    """Parse and validate a catalog document."""
    try:
        doc = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedCatalog(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "models" not in doc:
        raise MalformedCatalog("catalog document needs a 'models' list")
    if not isinstance(doc["models"], list):
        raise MalformedCatalog("'models' must be a list")
    models = []
    for entry in doc["models"]:
        try:
            rings = tuple(
                RingSpec(
                    kind=r["kind"],
                    outer_radius=float(r["outer_radius_mm"]),
                    hole_radius=float(r["hole_radius_mm"]),
                    thickness=float(r["thickness_mm"]),
                    segments=int(r.get("segments", DEFAULT_SEGMENTS)),
                )
                for r in entry["rings"]
            )
            models.append(
                PlateModel(
                    id=str(entry["id"]),
                    overall_length=float(entry["overall_length_mm"]),
                    rings=rings,
                    bar_lengths=tuple(float(b) for b in entry["bar_lengths_mm"]),
                    bar_width=float(entry["bar_width_mm"]),
                    bar_thickness=float(entry["bar_thickness_mm"]),
                    note=str(entry.get("note", "")),
                )
            )
        except (KeyError, TypeError) as exc:
            raise MalformedCatalog(f"model entry missing field: {exc}") from None
    return models


# --- ring solid ------------------------------------------------------------


@dataclass(frozen=True)
class RingMesh:
    """Ring solid in canonical pose: center at the origin, ring axis +z,
    flat side(s) facing +x (and -x for middle rings). The solid spans
    z in [-bar_thickness/2, thickness - bar_thickness/2] so the bar
    mid-plane is z = 0.

    `corner_tags` maps each flat side to the 4 vertex ids of its
    attachment rectangle, ordered (bottom-left, bottom-right, top-right,
    top-left) in the (+x direction, +z normal) frame.
    """

    mesh: TriangleMesh
    corner_tags: dict
    flat_distance: float


def flat_plane_distance(outer_radius: float, bar_width: float) -> float:
    """Distance from ring center to a flat side: the chord of width
    bar_width on the outer circle."""
    if bar_width >= 2 * outer_radius:
        raise GeometryInfeasible("bar wider than the ring")
    return math.sqrt(outer_radius**2 - (bar_width / 2.0) ** 2)


def _angle_samples(spec: RingSpec, theta_c: float):
    """Boundary angles with flat breakpoints landed exactly.

    Returns (angles, flat flags) covering [0, 2π); `flat` marks samples
    whose outer point lies on a flat plane.
    """
    seg = spec.segments
    flat_sub = max(2, seg // 8)
    angles = []
    flags = []

    def arc(a0, a1, n):
        for i in range(n):
            angles.append(a0 + (a1 - a0) * i / n)
            flags.append(False)

    def flat(a0, a1, n):
        for i in range(n):
            angles.append(a0 + (a1 - a0) * i / n)
            flags.append(True)

    if spec.flat_sides == 1:
        flat(-theta_c, theta_c, flat_sub)
        arc(theta_c, 2 * math.pi - theta_c, seg)
    else:
        flat(-theta_c, theta_c, flat_sub)
        arc(theta_c, math.pi - theta_c, seg)
        flat(math.pi - theta_c, math.pi + theta_c, flat_sub)
        arc(math.pi + theta_c, 2 * math.pi - theta_c, seg)
    return np.array(angles), np.array(flags, dtype=bool)


def ring_mesh(spec: RingSpec, bar_width: float = DEFAULT_BAR_WIDTH,
              bar_thickness: float = DEFAULT_BAR_THICKNESS) -> RingMesh:
    """Closed annulus-with-flats solid plus tagged attachment corners."""
    if bar_thickness > spec.thickness:
        raise GeometryInfeasible("bar thicker than the ring")
    d = flat_plane_distance(spec.outer_radius, bar_width)
    if d <= spec.hole_radius:
        raise GeometryInfeasible(
            f"flat side at {d:.3f} mm would cut the {spec.hole_radius:.3f} mm hole"
        )
    theta_c = math.asin((bar_width / 2.0) / spec.outer_radius)
    angles, on_flat = _angle_samples(spec, theta_c)
    nb = len(angles)

    outer = np.empty((nb, 2))
    cos = np.cos(angles)
    sin = np.sin(angles)
    outer[:, 0] = spec.outer_radius * cos
    outer[:, 1] = spec.outer_radius * sin
    # flat samples: project onto the cut plane x = ±d
    right = on_flat & (cos > 0)
    left = on_flat & (cos < 0)
    with np.errstate(divide="ignore"):
        outer[right, 0] = d
        outer[right, 1] = d * np.tan(angles[right])
        outer[left, 0] = -d
        outer[left, 1] = -d * np.tan(angles[left])
    inner = np.column_stack([spec.hole_radius * cos, spec.hole_radius * sin])

    # exact breakpoint coordinates (corner tags must form an exact rectangle)
    half_w = bar_width / 2.0
    for i in range(nb):
        a = angles[i] % (2 * math.pi)
        if abs(a - theta_c) < 1e-12:
            outer[i] = (d, half_w)
        elif abs(a - (2 * math.pi - theta_c)) < 1e-12:
            outer[i] = (d, -half_w)
        elif abs(a - (math.pi - theta_c)) < 1e-12:
            outer[i] = (-d, half_w)
        elif abs(a - (math.pi + theta_c)) < 1e-12:
            outer[i] = (-d, -half_w)

    z0 = -bar_thickness / 2.0
    z_tag = bar_thickness / 2.0
    z1 = spec.thickness - bar_thickness / 2.0
    wall_rows = [z0, z_tag] if z1 - z_tag <= 1e-12 else [z0, z_tag, z1]
    z_top = wall_rows[-1]

    verts = []
    ring_ids = {}
    for z in wall_rows:
        ring_ids[("outer", z)] = len(verts)
        verts.extend([[x, y, z] for x, y in outer])
    for z in (z0, z_top):
        ring_ids[("inner", z)] = len(verts)
        verts.extend([[x, y, z] for x, y in inner])
    verts = np.asarray(verts, dtype=float)

    faces = []

    def strip(a_start, b_start, flip=False):
        for i in range(nb):
            j = (i + 1) % nb
            a0, a1 = a_start + i, a_start + j
            b0, b1 = b_start + i, b_start + j
            if flip:
                faces.append([a0, b0, b1])
                faces.append([a0, b1, a1])
            else:
                faces.append([a0, a1, b1])
                faces.append([a0, b1, b0])

    # outer wall, stacked rows, outward winding
    for za, zb in zip(wall_rows[:-1], wall_rows[1:]):
        strip(ring_ids[("outer", za)], ring_ids[("outer", zb)])
    # inner wall (hole), inward winding
    strip(ring_ids[("inner", z0)], ring_ids[("inner", z_top)], flip=True)
    # top cap (+z) and bottom cap (-z)
    strip(ring_ids[("outer", z_top)], ring_ids[("inner", z_top)])
    strip(ring_ids[("outer", z0)], ring_ids[("inner", z0)], flip=True)

    mesh = TriangleMesh(verts, np.asarray(faces))

    def tag(side_sign):
        def vid(target, z):
            base = ring_ids[("outer", z)]
            hits = np.nonzero(
                (np.abs(outer[:, 0] - target[0]) < 1e-12)
                & (np.abs(outer[:, 1] - target[1]) < 1e-12)
            )[0]
            return int(base + hits[0])

        # (BL, BR, TR, TL) in the frame (D=+x, N=+z): side axis is N×D=+y
        bl = (side_sign * d, -half_w)
        br = (side_sign * d, half_w)
        return (
            vid(bl, z0),
            vid(br, z0),
            vid(br, z_tag),
            vid(bl, z_tag),
        )

    corner_tags = {"front": tag(+1)}
    if spec.flat_sides == 2:
        corner_tags["back"] = tag(-1)
    return RingMesh(mesh=mesh, corner_tags=corner_tags, flat_distance=d)


def analytic_ring_volume(spec: RingSpec, bar_width: float) -> float:
    """Exact annulus-with-flats volume (tessellation check target)."""
    d = flat_plane_distance(spec.outer_radius, bar_width)
    r_o, r_i = spec.outer_radius, spec.hole_radius
    segment = r_o**2 * math.acos(d / r_o) - d * math.sqrt(r_o**2 - d**2)
    area = math.pi * (r_o**2 - r_i**2) - spec.flat_sides * segment
    return area * spec.thickness
