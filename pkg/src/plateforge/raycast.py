"""Ray/triangle intersection front end.

Backface culling is off: clinical STL windings are unreliable and the
cascade must see the surface from either side. All math is float64;
float32 appears only at the STL boundary.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .spatial import BARY_EPS, DET_EPS, T_EPS, Hit, SpatialIndex


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float).reshape(3)
        d = np.asarray(self.direction, dtype=float).reshape(3)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("ray direction must be a unit vector")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)


def intersect_ray_triangle(ray: Ray, v0, v1, v2):
    """Möller–Trumbore intersection; returns a Hit or None.

    Rays parallel to the triangle plane (|det| < 1e-12) miss, as do hits
    closer than the self-intersection floor t <= 1e-7.
    """
    t, u, v = _kernels.active.mt_pairs(
        ray.origin.reshape(1, 3),
        ray.direction.reshape(1, 3),
        np.asarray(v0, dtype=float).reshape(1, 3),
        np.asarray(v1, dtype=float).reshape(1, 3),
        np.asarray(v2, dtype=float).reshape(1, 3),
        T_EPS, BARY_EPS, DET_EPS,
    )
    if not np.isfinite(t[0]):
        return None
    return Hit(t=float(t[0]), u=float(u[0]), v=float(v[0]), face=0)


def first_hit(index: SpatialIndex, ray: Ray):
    """Closest intersection along the ray, or None."""
    return index.first_hit(ray.origin, ray.direction)
