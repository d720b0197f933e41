"""Shared geometric primitives: planes, rings, polygons, and the few vector
helpers the rest of the pipeline is built on.

Conventions used throughout the package:

* points are float64 arrays of shape (3,) or (n, 3); invalid points have all
  three components set to NaN
* unorganized clouds are (n, 3) arrays, organized clouds are (M, N, 3) grids
* triangles are counter-clockwise when viewed against their normal
* polygon shells are counter-clockwise and holes clockwise in the 2D
  projection onto their plane
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateInputError(ValueError):
    """Input does not carry enough geometry to operate on."""


class DegeneratePolygonError(ValueError):
    """A polygon ring collapsed below three points."""


class OpenBoundaryError(RuntimeError):
    """A boundary walk could not return to its starting point."""


@dataclass(frozen=True)
class Plane:
    """Geometric plane given by a unit normal and one point on the plane."""

    normal: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=np.float64))
        object.__setattr__(self, "point", np.asarray(self.point, dtype=np.float64))


@dataclass
class Polygon:
    """Polygon over mesh point indices: one exterior shell plus hole rings.

    Rings are implicitly closed (the last index connects back to the first).
    ``plane`` is the 2D projection frame the rings are simple in.
    """

    shell: np.ndarray
    holes: list[np.ndarray]
    plane: Plane


@dataclass
class Polygon2D:
    """Polygon with explicit 2D ring coordinates in the plane's basis.

    This is the post-processing and serialization form; buffering creates new
    vertices so point indices no longer apply.
    """

    shell: np.ndarray
    holes: list[np.ndarray]
    plane: Plane

    def lift(self) -> tuple[np.ndarray, list[np.ndarray]]:
        """Return the shell and holes as 3D coordinates on the plane."""
        u, v = plane_basis(self.plane)
        origin = self.plane.point

        def lift_ring(ring):
            return origin + np.outer(ring[:, 0], u) + np.outer(ring[:, 1], v)

        return lift_ring(self.shell), [lift_ring(h) for h in self.holes]


def plane_basis(plane: Plane) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal in-plane basis (u, v) for a plane.

    u = normalize(cross(normal, e)) with e = +z, switching to e = +y when the
    normal is within ~25 degrees of +/-z; v = cross(normal, u).  (u, v, normal)
    is right-handed, so counter-clockwise in (u, v) is counter-clockwise seen
    from the normal side.
    """
    n = plane.normal
    if abs(n[2]) > 0.9:
        e = np.array([0.0, 1.0, 0.0])
    else:
        e = np.array([0.0, 0.0, 1.0])
    u = np.cross(n, e)
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def project_to_plane(points: np.ndarray, plane: Plane) -> np.ndarray:
    """Project points into the plane's 2D basis (distances in-plane preserved).

    NaN points project to NaN coordinates.
    """
    u, v = plane_basis(plane)
    rel = np.atleast_2d(np.asarray(points, dtype=np.float64)) - plane.point
    out = np.empty((rel.shape[0], 2))
    out[:, 0] = rel @ u
    out[:, 1] = rel @ v
    return out


def lift_from_plane(coords: np.ndarray, plane: Plane) -> np.ndarray:
    """Inverse of :func:`project_to_plane` for in-plane points."""
    u, v = plane_basis(plane)
    coords = np.atleast_2d(coords)
    return plane.point + np.outer(coords[:, 0], u) + np.outer(coords[:, 1], v)


def point_to_plane_distance(p: np.ndarray, plane: Plane) -> float:
    """Signed orthogonal distance dot(p - plane.point, plane.normal)."""
    return float(np.dot(np.asarray(p, dtype=np.float64) - plane.point, plane.normal))


def triangle_normal(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Unit normal of triangle (a, b, c); NaN vector if the triangle is degenerate."""
    cross = np.cross(np.asarray(b) - a, np.asarray(c) - a)
    norm = np.linalg.norm(cross)
    if not norm > 0.0:
        return np.full(3, np.nan)
    return cross / norm


def triangle_normals(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Per-triangle unit normals for an indexed triangle set (vectorized).

    Degenerate (zero-area) triangles get NaN normals.
    """
    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]]
    c = points[triangles[:, 2]]
    cross = np.cross(b - a, c - a)
    norm = np.linalg.norm(cross, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = cross / norm[:, None]
    out[~(norm > 0.0)] = np.nan
    return out


def ring_area(ring: np.ndarray) -> float:
    """Signed area of a closed 2D ring by the shoelace formula (CCW positive)."""
    ring = np.asarray(ring, dtype=np.float64)
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
