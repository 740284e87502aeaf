"""Small 3D helpers: unit vectors, rotations, rigid transforms."""

from dataclasses import dataclass, field

import numpy as np

ORTHONORMAL_TOL = 1e-9


def normalize(v):
    """Return v / |v|; raises on (near-)zero input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-300:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def rotation_about_axis(axis, angle):
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = normalize(axis)
    c = np.cos(angle)
    s = np.sin(angle)
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def slerp_unit(a, b, frac):
    """Spherical interpolation between unit vectors, frac in [0, 1].

    Falls back to linear blending when the vectors are (anti-)parallel.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    omega = np.arccos(dot)
    if omega < 1e-9:
        return normalize((1.0 - frac) * a + frac * b)
    if np.pi - omega < 1e-9:
        # opposite normals: no unique great-circle; pick the shorter blend
        return normalize((1.0 - frac) * a + frac * b) if frac != 0.5 else a
    s = np.sin(omega)
    return (np.sin((1.0 - frac) * omega) / s) * a + (np.sin(frac * omega) / s) * b


def frame_rotation(normal, direction):
    """Rotation whose columns map +x to `direction`, +z to `normal`.

    `direction` must already be a unit vector in the plane perpendicular
    to `normal`.
    """
    n = np.asarray(normal, dtype=float)
    d = np.asarray(direction, dtype=float)
    return np.column_stack([d, np.cross(n, d), n])


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion: x -> rotation @ x + translation."""

    rotation: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        if np.max(np.abs(r @ r.T - np.eye(3))) > ORTHONORMAL_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOL:
            raise ValueError("rotation determinant is not +1")

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_frame(cls, normal, direction, origin):
        return cls(frame_rotation(normal, direction), np.asarray(origin, dtype=float))

    def apply(self, points):
        """Transform one point (3,) or a batch (N, 3)."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def apply_vector(self, vectors):
        """Rotate direction vectors (no translation)."""
        return np.asarray(vectors, dtype=float) @ self.rotation.T

    def compose(self, other):
        """self after other: (self ∘ other)(x) = self(other(x))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self):
        return RigidTransform(self.rotation.T, -(self.rotation.T @ self.translation))
