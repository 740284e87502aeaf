"""Triangle-soup mesh container with derived per-face normals.

Vertices are kept exactly as provided (no welding); all downstream
queries are ray casts and distance lookups, never topology walks.
Units are millimeters throughout.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMesh
from .geometry import RigidTransform

# faces below this area are dropped at load time; ray kernels divide by
# edge cross products, so zero-area faces are never allowed through
AREA_EPS = 1e-12


def _face_cross(vertices, faces):
    v0 = vertices[faces[:, 0]]
    e1 = vertices[faces[:, 1]] - v0
    e2 = vertices[faces[:, 2]] - v0
    return np.cross(e1, e2)


@dataclass
class TriangleMesh:
    """Indexed triangle soup.

    `degenerate_dropped` records how many facets were discarded by the
    loader for falling under the area floor.
    """

    vertices: np.ndarray
    faces: np.ndarray
    degenerate_dropped: int = 0
    _face_normals: np.ndarray = field(default=None, repr=False, compare=False)
    _bbox: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(self.faces) == 0:
            raise EmptyMesh("mesh has no faces")
        if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")
        f = self.faces
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise ValueError("face repeats a vertex index")

    @property
    def face_normals(self):
        """Unit normals recomputed from vertex winding (cached)."""
        if self._face_normals is None:
            cross = _face_cross(self.vertices, self.faces)
            norms = np.linalg.norm(cross, axis=1)
            if np.any(norms < 2.0 * AREA_EPS):
                raise ValueError("degenerate face survived load-time cleaning")
            self._face_normals = cross / norms[:, None]
        return self._face_normals

    def face_areas(self):
        return 0.5 * np.linalg.norm(_face_cross(self.vertices, self.faces), axis=1)

    @property
    def n_faces(self):
        return len(self.faces)

    def bbox(self):
        """(min, max) corner pair over all referenced vertices (cached)."""
        if self._bbox is None:
            used = self.vertices[np.unique(self.faces)]
            self._bbox = (used.min(axis=0), used.max(axis=0))
        return self._bbox

    def bbox_diagonal(self):
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def triangle_corners(self):
        """Per-face corner arrays (v0, v1, v2), each (F, 3)."""
        return (
            self.vertices[self.faces[:, 0]],
            self.vertices[self.faces[:, 1]],
            self.vertices[self.faces[:, 2]],
        )


def apply_transform(mesh: TriangleMesh, transform: RigidTransform) -> TriangleMesh:
    """Rigidly move a mesh; connectivity is preserved, normals recomputed."""
    return TriangleMesh(
        transform.apply(mesh.vertices),
        mesh.faces.copy(),
        degenerate_dropped=mesh.degenerate_dropped,
    )


def merge_meshes(meshes) -> TriangleMesh:
    """Concatenate meshes into one soup (no welding, no booleans)."""
    meshes = list(meshes)
    if not meshes:
        raise EmptyMesh("nothing to merge")
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        offset += len(m.vertices)
    return TriangleMesh(np.vstack(verts), np.vstack(faces))
