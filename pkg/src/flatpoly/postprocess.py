"""Polygon post-processing in the plane projection: simplify, buffer, filter.

The five-step pipeline runs per polygon: Douglas-Peucker simplification with
tolerance alpha, a positive buffer (dilation) of beta_pos, a negative buffer
(erosion) of beta_neg, then area filters dropping polygons below gamma and
holes below delta.  Buffering is the Minkowski sum/difference with a circle
approximated by 8 segments per quadrant; it may fill holes, split a polygon
into several, annihilate it entirely, and repairs small self-intersections
left over from projecting noisy segments.

Buffering delegates to Shapely (GEOS); simplification and area filtering are
implemented here directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from flatpoly.geometry import DegeneratePolygonError, Polygon2D, ring_area

QUAD_SEGS = 8  # circle arc segments per quadrant


@dataclass
class PostprocessParams:
    alpha: float = 0.0      # meters, simplify tolerance
    beta_pos: float = 0.0   # meters, positive buffer
    beta_neg: float = 0.0   # meters, negative buffer
    gamma: float = 0.0      # square meters, min polygon area
    delta: float = 0.0      # square meters, min hole area

    def __post_init__(self):
        for name in ("alpha", "beta_pos", "beta_neg", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def _dp_chain(points: np.ndarray, lo: int, hi: int, tol: float, keep: np.ndarray):
    """Mark the vertices Douglas-Peucker retains on the open chain lo..hi."""
    if hi <= lo + 1:
        return
    a = points[lo]
    b = points[hi]
    ab = b - a
    seg_len2 = float(ab @ ab)
    rel = points[lo + 1:hi] - a
    if seg_len2 > 0:
        t = np.clip((rel @ ab) / seg_len2, 0.0, 1.0)
        d2 = np.sum((rel - t[:, None] * ab) ** 2, axis=1)
    else:
        d2 = np.sum(rel ** 2, axis=1)
    k = int(np.argmax(d2))
    if d2[k] > tol * tol:
        split = lo + 1 + k
        keep[split] = True
        _dp_chain(points, lo, split, tol, keep)
        _dp_chain(points, split, hi, tol, keep)


def simplify_ring(ring: np.ndarray, alpha: float) -> np.ndarray:
    """Douglas-Peucker on a closed ring; every dropped vertex stays within alpha.

    The ring is split at vertex 0 and the vertex farthest from it so the
    anchors are deterministic.
    """
    ring = np.asarray(ring, dtype=np.float64)
    if alpha <= 0.0 or len(ring) <= 3:
        return ring.copy()
    far = int(np.argmax(np.sum((ring - ring[0]) ** 2, axis=1)))
    if far == 0:
        return ring.copy()
    keep = np.zeros(len(ring), dtype=bool)
    keep[0] = keep[far] = True
    _dp_chain(ring, 0, far, alpha, keep)
    closed = np.vstack([ring[far:], ring[:1]])
    keep_back = np.zeros(len(closed), dtype=bool)
    keep_back[0] = keep_back[-1] = True
    _dp_chain(closed, 0, len(closed) - 1, alpha, keep_back)
    keep[far:] |= keep_back[:-1]
    return ring[keep]


def simplify(poly: Polygon2D, alpha: float) -> Polygon2D:
    """Simplify every ring; holes may drop out, a degenerate shell raises."""
    shell = simplify_ring(poly.shell, alpha)
    if len(shell) < 3:
        raise DegeneratePolygonError("shell collapsed below 3 points")
    holes = [h for h in (simplify_ring(h, alpha) for h in poly.holes) if len(h) >= 3]
    return Polygon2D(shell=shell, holes=holes, plane=poly.plane)


def _from_shapely(geom, plane) -> list[Polygon2D]:
    polys = []
    if geom.is_empty:
        return polys
    parts = geom.geoms if geom.geom_type == "MultiPolygon" else [geom]
    for part in parts:
        if part.geom_type != "Polygon" or part.is_empty:
            continue
        shell = np.asarray(part.exterior.coords[:-1], dtype=np.float64)
        if ring_area(shell) < 0:
            shell = shell[::-1]
        holes = []
        for interior in part.interiors:
            hole = np.asarray(interior.coords[:-1], dtype=np.float64)
            if ring_area(hole) > 0:
                hole = hole[::-1]
            holes.append(hole)
        polys.append(Polygon2D(shell=shell, holes=holes, plane=plane))
    return polys


def buffer(poly: Polygon2D, distance: float) -> list[Polygon2D]:
    """Minkowski buffer by a circle of |distance| (sum if positive, difference
    if negative).  Erosion may split the polygon or annihilate it (empty
    list); output rings are simple.
    """
    shp = ShapelyPolygon(poly.shell, holes=[h for h in poly.holes if len(h) >= 3])
    if not shp.is_valid:
        shp = shp.buffer(0)  # rebuild a valid geometry from crossed rings
    out = shp.buffer(distance, quad_segs=QUAD_SEGS)
    out = shapely.make_valid(out) if not out.is_valid else out
    return _from_shapely(out, poly.plane)


def filter_polygons(polys: list[Polygon2D], gamma: float, delta: float) -> list[Polygon2D]:
    """Drop polygons with |shell area| < gamma and holes with |area| < delta."""
    kept = []
    for poly in polys:
        if abs(ring_area(poly.shell)) < gamma:
            continue
        holes = [h for h in poly.holes if abs(ring_area(h)) >= delta]
        kept.append(Polygon2D(shell=poly.shell, holes=holes, plane=poly.plane))
    return kept


def run_pipeline(poly: Polygon2D, params: PostprocessParams) -> list[Polygon2D]:
    """simplify -> buffer(+beta_pos) -> buffer(-beta_neg) -> area/hole filters.

    Steps with zero-valued parameters are identity and skipped.
    """
    current = [simplify(poly, params.alpha)] if params.alpha > 0 else [poly]
    if params.beta_pos > 0:
        current = [p for poly_ in current for p in buffer(poly_, params.beta_pos)]
    if params.beta_neg > 0:
        current = [p for poly_ in current for p in buffer(poly_, -params.beta_neg)]
    return filter_polygons(current, params.gamma, params.delta)
