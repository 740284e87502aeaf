"""Surface-conforming miniplate placement planning on triangle meshes."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (
    BaselineTooShort,
    DegenerateDirection,
    DegenerateFrame,
    EmptyMesh,
    EmptySession,
    FlippedFrame,
    GeometryInfeasible,
    IndexOutOfRange,
    InvariantViolation,
    MalformedCatalog,
    MalformedStl,
    NoSuchSide,
    NothingToSave,
    PlanningError,
    SeedMiss,
)
from .baseline import (
    Baseline,
    BaselinePoint,
    SeedFrame,
    adjust_marker,
    compute_baseline,
    make_seed_frame,
)
from .catalog import (
    PlateModel,
    RingMesh,
    RingSpec,
    catalog,
    load_catalog,
    ring_mesh,
    save_catalog,
)
from .geometry import RigidTransform
from .implant import (
    Implant,
    RingPlacement,
    attachment_corners,
    build_bridge,
    generate_implant,
    place_rings,
    pose_ring,
)
from .mesh import TriangleMesh, apply_transform, merge_meshes
from .raycast import Ray, first_hit, intersect_ray_triangle
from .session import Session, export_all, save_current
from .spatial import Hit, SpatialIndex, build_index, nearest_triangle
from .stl import load_stl, save_stl

__version__ = "0.1.0"
