"""Synthetic scene generators with known ground truth.

These build the inputs used by the test suite and benchmarks: noisy planes,
an indoor box-room range scan with labeled planes and box obstacles, a
floor/seat/wall mesh, and jittered normal clusters for the histogram.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FLOOR = 0
WALL_XP = 1
WALL_XN = 2
WALL_YP = 3
WALL_YN = 4
BOX_BASE = 5


def flat_plane_opc(rows: int = 20, cols: int = 20, spacing: float = 0.05,
                   z: float = 0.0, noise: float = 0.0, seed: int = 0) -> np.ndarray:
    """Flat grid in the xy plane; mesh normals point +z."""
    rng = np.random.default_rng(seed)
    u, v = np.meshgrid(np.arange(rows, dtype=float), np.arange(cols, dtype=float),
                       indexing="ij")
    opc = np.stack([v * spacing, -u * spacing, np.full_like(u, z)], axis=2)
    if noise > 0:
        opc[:, :, 2] += rng.normal(0.0, noise, size=(rows, cols))
    return opc


@dataclass
class RoomScene:
    opc: np.ndarray          # (n, n, 3) range scan from the ceiling camera
    labels: np.ndarray       # (n, n) int ground-truth surface per pixel
    planes: dict             # label -> (normal, point) of the ideal plane
    boxes: list              # axis-aligned (lo, hi) corner pairs


def room_scene(n: int = 250, noise: float = 0.002, seed: int = 0,
               half: float = 2.0, wall_height: float = 2.5,
               cam_height: float = 2.4, fov_deg: float = 120.0,
               boxes: list | None = None) -> RoomScene:
    """Range scan of a box room seen from a downward camera at the ceiling.

    The image center sees the floor (and the box obstacles standing on it);
    the periphery sees the four walls.  Range noise of the given sigma is
    applied along each ray.  Labels identify the ideal plane (or box) each
    pixel's ray hit.
    """
    if boxes is None:
        boxes = [
            (np.array([-1.3, -1.3, 0.0]), np.array([-0.55, -0.55, 0.35])),
            (np.array([0.5, 0.3, 0.0]), np.array([1.25, 1.05, 0.5])),
        ]
    rng = np.random.default_rng(seed)
    t_half = np.tan(np.deg2rad(fov_deg) / 2.0)

    row = np.linspace(1.0, -1.0, n)    # +y at the top of the image
    col = np.linspace(-1.0, 1.0, n)
    sy, sx = np.meshgrid(row, col, indexing="ij")
    d = np.stack([sx * t_half, sy * t_half, -np.ones_like(sx)], axis=2)
    d /= np.linalg.norm(d, axis=2)[..., None]
    origin = np.array([0.0, 0.0, cam_height])

    best_t = np.full((n, n), np.inf)
    labels = np.full((n, n), -1, dtype=np.int64)

    def consider(t, valid, label):
        hit = valid & (t > 0) & (t < best_t)
        best_t[hit] = t[hit]
        labels[hit] = label

    with np.errstate(divide="ignore", invalid="ignore"):
        # floor z = 0
        t = (0.0 - origin[2]) / d[..., 2]
        p = origin + t[..., None] * d
        consider(t, (np.abs(p[..., 0]) <= half) & (np.abs(p[..., 1]) <= half), FLOOR)
        # walls
        for label, axis, coord in ((WALL_XP, 0, half), (WALL_XN, 0, -half),
                                   (WALL_YP, 1, half), (WALL_YN, 1, -half)):
            t = (coord - origin[axis]) / d[..., axis]
            p = origin + t[..., None] * d
            other = 1 - axis
            ok = (np.abs(p[..., other]) <= half) & (p[..., 2] >= 0.0) \
                 & (p[..., 2] <= wall_height)
            consider(t, ok, label)
        # boxes via slab intersection
        for b, (lo, hi) in enumerate(boxes):
            t1 = (lo - origin) / d
            t2 = (hi - origin) / d
            t_near = np.max(np.minimum(t1, t2), axis=2)
            t_far = np.min(np.maximum(t1, t2), axis=2)
            consider(t_near, t_near <= t_far, BOX_BASE + b)

    ranges = best_t + rng.normal(0.0, noise, size=best_t.shape)
    opc = origin + ranges[..., None] * d

    planes = {
        FLOOR: (np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 0.0])),
        WALL_XP: (np.array([-1.0, 0.0, 0.0]), np.array([half, 0.0, 0.0])),
        WALL_XN: (np.array([1.0, 0.0, 0.0]), np.array([-half, 0.0, 0.0])),
        WALL_YP: (np.array([0.0, -1.0, 0.0]), np.array([0.0, half, 0.0])),
        WALL_YN: (np.array([0.0, 1.0, 0.0]), np.array([0.0, -half, 0.0])),
    }
    return RoomScene(opc=opc, labels=labels, planes=planes, boxes=boxes)


def grid_patch(origin, du, dv, nu: int, nv: int, index_offset: int = 0):
    """Right-cut triangulated rectangle patch; returns (points, triangles).

    ``du``/``dv`` are the step vectors between grid rows/columns; the patch
    normal is normalize(cross(du, dv)).
    """
    origin = np.asarray(origin, dtype=np.float64)
    du = np.asarray(du, dtype=np.float64)
    dv = np.asarray(dv, dtype=np.float64)
    u, v = np.meshgrid(np.arange(nu, dtype=float), np.arange(nv, dtype=float),
                       indexing="ij")
    points = origin + u[..., None] * du + v[..., None] * dv
    idx = index_offset + np.arange(nu * nv, dtype=np.int64).reshape(nu, nv)
    p1 = idx[:-1, :-1].ravel()
    p2 = idx[:-1, 1:].ravel()
    p3 = idx[1:, 1:].ravel()
    p4 = idx[1:, :-1].ravel()
    tris = np.concatenate([
        np.stack([p3, p2, p1], axis=1),
        np.stack([p1, p4, p3], axis=1),
    ])
    return points.reshape(-1, 3), tris


def step_scene(hole_quad: bool = True):
    """Floor, a floating elevated seat with the same normal, and one wall.

    The floor carries a one-quad hole under the seat when ``hole_quad`` is
    set (a 4-vertex hole, below typical hole thresholds).  Components share
    no vertices, so they are spatially disconnected.  Returns (points,
    triangles, expected) where expected maps 'floor'/'seat'/'wall' to
    triangle count.
    """
    parts = []
    tris = []
    offset = 0

    # floor: 9 x 9 grid over [0, 4]^2 at z = 0, +z normals
    n = 9
    u, v = np.meshgrid(np.arange(n, dtype=float), np.arange(n, dtype=float), indexing="ij")
    floor_pts = np.stack([v * 0.5, 4.0 - u * 0.5, np.zeros_like(u)], axis=2)
    idx = np.arange(n * n, dtype=np.int64).reshape(n, n)
    keep = []
    for iu in range(n - 1):
        for iv in range(n - 1):
            if hole_quad and iu == 4 and iv == 4:
                continue  # one-quad hole under the seat
            p1, p2 = idx[iu, iv], idx[iu, iv + 1]
            p3, p4 = idx[iu + 1, iv + 1], idx[iu + 1, iv]
            keep.append((p3, p2, p1))
            keep.append((p1, p4, p3))
    parts.append(floor_pts.reshape(-1, 3))
    tris.append(np.asarray(keep, dtype=np.int64))
    floor_count = len(keep)
    offset += n * n

    # seat: 5 x 5 grid over [1, 3]^2 at z = 1
    seat_pts, seat_tris = grid_patch([1.0, 3.0, 1.0], [0.0, -0.5, 0.0],
                                     [0.5, 0.0, 0.0], 5, 5, offset)
    parts.append(seat_pts)
    tris.append(seat_tris)
    offset += len(seat_pts)

    # wall: x = 0 plane, y in [0, 4], z in [0, 2], +x normal
    wall_pts, wall_tris = grid_patch([0.0, 0.0, 2.0], [0.0, 0.0, -0.5],
                                     [0.0, 0.5, 0.0], 5, 9, offset)
    parts.append(wall_pts)
    tris.append(wall_tris)

    points = np.concatenate(parts)
    triangles = np.concatenate(tris)
    expected = {"floor": floor_count, "seat": len(seat_tris), "wall": len(wall_tris)}
    return points, triangles, expected


def bump_scene(rows: int = 21, cols: int = 21, spacing: float = 0.05,
               bump_height: float = 0.1):
    """Flat grid with an abruptly raised interior rectangle (a floor bump)."""
    opc = flat_plane_opc(rows, cols, spacing)
    r0, r1 = rows // 2 - 2, rows // 2 + 2
    c0, c1 = cols // 2 - 2, cols // 2 + 2
    opc[r0:r1, c0:c1, 2] += bump_height
    mask = np.zeros((rows, cols), dtype=bool)
    mask[r0:r1, c0:c1] = True
    return opc, mask


def normal_cluster(center, count: int, jitter_deg: float, rng) -> np.ndarray:
    """Unit normals spread around ``center`` with the given angular sigma."""
    center = np.asarray(center, dtype=np.float64)
    center = center / np.linalg.norm(center)
    perp = rng.normal(size=(count, 3))
    perp -= (perp @ center)[:, None] * center
    perp /= np.linalg.norm(perp, axis=1)[:, None]
    ang = np.abs(rng.normal(0.0, np.deg2rad(jitter_deg), count))
    return np.cos(ang)[:, None] * center + np.sin(ang)[:, None] * perp
