"""Axis-aligned BVH over a triangle mesh for ray and distance queries.

The build is deterministic (median split on the longest centroid axis,
stable ordering), so identical meshes always produce identical indexes
and therefore identical query results.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptyMesh
from .mesh import TriangleMesh

LEAF_SIZE = 8

# hit acceptance windows shared by every ray query
T_EPS = 1e-7     # minimum hit distance; guards against self-intersection
BARY_EPS = 1e-9  # barycentric containment slack
DET_EPS = 1e-12  # parallel-ray determinant cutoff
TIE_EPS = 1e-9   # |Δt| window treated as a tie (lowest face id wins)


def _build_arrays(tri_min, tri_max, centroids, leaf_size):
    n_tris = len(tri_min)
    bmin, bmax, left, right, start, count = [], [], [], [], [], []
    order = np.empty(n_tris, dtype=np.int64)
    cursor = 0

    # boxes get a hair of padding so rays grazing a box boundary exactly
    # (hit point on a box corner) cannot be culled by slab-test rounding;
    # conservative inclusion never changes query results
    diag = float(np.linalg.norm(tri_max.max(axis=0) - tri_min.min(axis=0)))
    pad = 1e-9 * diag + 1e-12

    # (triangle-id array, slot in `left`/`right` of the parent, which side)
    stack = [(np.arange(n_tris, dtype=np.int64), None, None)]
    while stack:
        idx, parent, side = stack.pop()
        node_id = len(bmin)
        if parent is not None:
            (left if side == "l" else right)[parent] = node_id
        bmin.append(tri_min[idx].min(axis=0) - pad)
        bmax.append(tri_max[idx].max(axis=0) + pad)
        left.append(-1)
        right.append(-1)
        start.append(0)
        count.append(0)

        cent = centroids[idx]
        extent = cent.max(axis=0) - cent.min(axis=0)
        if len(idx) <= leaf_size or not extent.any():
            start[node_id] = cursor
            count[node_id] = len(idx)
            order[cursor : cursor + len(idx)] = idx
            cursor += len(idx)
            continue
        axis = int(np.argmax(extent))
        ordered = idx[np.argsort(cent[:, axis], kind="stable")]
        mid = len(ordered) // 2
        # right pushed first so the left child is visited (and numbered) first
        stack.append((ordered[mid:], node_id, "r"))
        stack.append((ordered[:mid], node_id, "l"))

    return (
        np.ascontiguousarray(bmin, dtype=np.float64),
        np.ascontiguousarray(bmax, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(start, dtype=np.int64),
        np.asarray(count, dtype=np.int64),
        order,
    )


@dataclass(frozen=True)
class Hit:
    """Ray/triangle intersection: parameter t (mm), barycentrics (u, v)
    weighting v1 and v2, and the face id."""

    t: float
    u: float
    v: float
    face: int


class SpatialIndex:
    """Immutable BVH over one mesh; safe to share across readers."""

    def __init__(self, mesh: TriangleMesh, leaf_size: int = LEAF_SIZE):
        if mesh is None or mesh.n_faces == 0:
            raise EmptyMesh("cannot index an empty mesh")
        self.mesh = mesh
        v0, v1, v2 = mesh.triangle_corners()
        tri_min = np.minimum(np.minimum(v0, v1), v2)
        tri_max = np.maximum(np.maximum(v0, v1), v2)
        centroids = (tri_min + tri_max) * 0.5
        (
            self._bmin,
            self._bmax,
            self._left,
            self._right,
            self._start,
            self._count,
            order,
        ) = _build_arrays(tri_min, tri_max, centroids, leaf_size)
        self._tv0 = np.ascontiguousarray(v0[order])
        self._tv1 = np.ascontiguousarray(v1[order])
        self._tv2 = np.ascontiguousarray(v2[order])
        self._fids = order
        self._kern = _kernels.active

    @property
    def n_nodes(self):
        return len(self._bmin)

    @property
    def backend(self):
        return self._kern.BACKEND_NAME

    def _tree_args(self):
        return (
            self._bmin, self._bmax, self._left, self._right,
            self._start, self._count, self._tv0, self._tv1, self._tv2, self._fids,
        )

    def first_hits(self, origins, directions):
        """Batch closest-hit query; face id -1 marks a miss."""
        return self._kern.bvh_first_hit(
            *self._tree_args(),
            origins, directions, T_EPS, BARY_EPS, DET_EPS, TIE_EPS,
        )

    def first_hit(self, origin, direction):
        f, t, u, v = self.first_hits(
            np.asarray(origin, dtype=float).reshape(1, 3),
            np.asarray(direction, dtype=float).reshape(1, 3),
        )
        if f[0] < 0:
            return None
        return Hit(t=float(t[0]), u=float(u[0]), v=float(v[0]), face=int(f[0]))

    def count_hits(self, origin, direction):
        """How many triangles the ray crosses at t > T_EPS."""
        out = self._kern.bvh_count_hits(
            *self._tree_args(),
            np.asarray(origin, dtype=float).reshape(1, 3),
            np.asarray(direction, dtype=float).reshape(1, 3),
            T_EPS, BARY_EPS, DET_EPS,
        )
        return int(out[0])

    def nearest_triangles(self, points):
        """Batch nearest query: (face ids, closest points, distances)."""
        return self._kern.bvh_nearest(*self._tree_args(), points, TIE_EPS)

    def nearest_triangle(self, point):
        f, cp, d = self.nearest_triangles(np.asarray(point, dtype=float).reshape(1, 3))
        return int(f[0]), cp[0], float(d[0])


def build_index(mesh: TriangleMesh) -> SpatialIndex:
    """Build the acceleration structure for a mesh."""
    return SpatialIndex(mesh)


def nearest_triangle(index: SpatialIndex, point):
    """(face id, closest surface point, distance in mm) for a point."""
    return index.nearest_triangle(point)
