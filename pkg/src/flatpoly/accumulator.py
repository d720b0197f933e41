"""Spherical histogram over a refined icosahedron for dominant-normal estimation.

The accumulator is a sorted array of triangle cells keyed by their
space-filling-curve id (:mod:`flatpoly.sfc`), with a 12-column 1-ring
neighbor matrix and a least-squares line predicting array index from id.
Integrating a normal is: predict the index, binary-search the clamped
window for the nearest id, then take the best cell among the hit and its
neighbors.  Peaks are found on a five-chart 2D unwrap of the histogram and
merged by single-linkage agglomerative clustering.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.cluster.hierarchy import fcluster, linkage

from flatpoly import _kernels, sfc
from flatpoly.icosphere import (
    MAX_LEVEL,
    RefinedIcosahedron,
    build_refined_icosahedron,
    cell_neighbors,
    unwrap_layout,
    vertex_adjacency,
    vertex_cell_incidence,
)

MAX_PEAKS = 254  # group labels are 8-bit with 255 reserved


@dataclass
class GaussianAccumulator:
    """Histogram cells sorted by s2id, plus the search index structures."""

    level: int
    normals: np.ndarray        # (n, 3) cell surface normals, sorted by id
    s2ids: np.ndarray          # (n,) uint64, strictly ascending
    neighbors: np.ndarray      # (n, 12) cell indices, -1 padded
    model_slope: float
    model_intercept: float
    window_lo: int             # index-prediction error bounds used for search
    window_hi: int
    counts: np.ndarray         # (n,) int64 accumulated votes
    ico: RefinedIcosahedron = field(repr=False)
    vertex_cells: list = field(repr=False)   # per vertex: incident cell indices (sorted order)
    layout: np.ndarray = field(repr=False)   # pixel -> vertex map of the unwrap

    @property
    def num_cells(self) -> int:
        return len(self.s2ids)


@dataclass
class UnwrappedImage:
    """2D unwrap of the histogram: values in [0, 255] plus the vertex map."""

    pixels: np.ndarray          # (rows, cols) float64 in [0, 255]
    pixel_to_vertex: np.ndarray
    vertex_normals: np.ndarray


@dataclass
class PeakList:
    normals: np.ndarray  # (k, 3) unit normals, descending total weight
    weights: np.ndarray  # (k,)

    def __len__(self) -> int:
        return len(self.weights)


@functools.lru_cache(maxsize=None)
def _build_structure(level: int):
    ico = build_refined_icosahedron(level)
    cells = ico.cell_normals
    ids = sfc.s2_id(cells)
    order = np.argsort(ids, kind="stable")
    ids_sorted = ids[order]
    if len(np.unique(ids_sorted)) != len(ids_sorted):
        raise RuntimeError("space-filling-curve ids collided; refinement too deep")
    inv = np.empty(len(order), dtype=np.int64)
    inv[order] = np.arange(len(order))
    nbrs = cell_neighbors(ico)[order]
    nbrs = np.where(nbrs >= 0, inv[np.where(nbrs >= 0, nbrs, 0)], -1)

    idx = np.arange(len(ids_sorted), dtype=np.float64)
    x = ids_sorted.astype(np.float64)
    xm = x.mean()
    slope = ((x - xm) @ (idx - idx.mean())) / ((x - xm) @ (x - xm))
    intercept = idx.mean() - slope * xm
    err = idx - (slope * x + intercept)
    # one extra slot on each side so the window brackets any query id, not
    # just the ids of the cells the line was fitted on
    window_lo = int(np.floor(err.min())) - 1
    window_hi = int(np.ceil(err.max())) + 1

    incident = vertex_cell_incidence(ico)
    vertex_cells = [np.sort(inv[np.asarray(c, dtype=np.int64)]) for c in incident]
    layout = unwrap_layout(ico)

    normals_sorted = np.ascontiguousarray(cells[order])
    for arr in (normals_sorted, ids_sorted, nbrs, layout):
        arr.setflags(write=False)
    return ico, normals_sorted, ids_sorted, nbrs, slope, intercept, window_lo, window_hi, vertex_cells, layout


def build_accumulator(level: int) -> GaussianAccumulator:
    """Build (or reuse the cached structure of) a level-``level`` accumulator.

    Construction is deterministic: rebuilding at the same level yields
    bit-identical structures.  Counts start at zero.
    """
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in [0, {MAX_LEVEL}], got {level}")
    (ico, normals, ids, nbrs, slope, intercept, wlo, whi,
     vertex_cells, layout) = _build_structure(level)
    return GaussianAccumulator(
        level=level,
        normals=normals,
        s2ids=ids,
        neighbors=nbrs,
        model_slope=slope,
        model_intercept=intercept,
        window_lo=wlo,
        window_hi=whi,
        counts=np.zeros(len(ids), dtype=np.int64),
        ico=ico,
        vertex_cells=vertex_cells,
        layout=layout,
    )


def find_cell_indices(ga: GaussianAccumulator, normals: np.ndarray) -> np.ndarray:
    """Vectorized cell lookup for an (n, 3) array of unit normals.

    Non-unit rows are normalized inside the id mapping; zero or non-finite
    rows are rejected.
    """
    qn = np.ascontiguousarray(np.atleast_2d(normals), dtype=np.float64)
    sq = np.einsum("ij,ij->i", qn, qn)
    if not np.all(np.isfinite(sq)) or np.any(sq == 0.0):
        raise ValueError("query normals must be finite and nonzero")
    return _kernels.find_cells(
        qn, ga.s2ids, ga.normals, ga.neighbors,
        ga.model_slope, ga.model_intercept, ga.window_lo, ga.window_hi,
    )


def find_cell_index(ga: GaussianAccumulator, normal) -> int:
    """Cell index whose surface normal is (near-)closest to ``normal``."""
    return int(find_cell_indices(ga, np.asarray(normal, dtype=np.float64)[None, :])[0])


def integrate_normals(ga: GaussianAccumulator, normals: np.ndarray,
                      sample_pct: float = 1.0) -> np.ndarray:
    """Vote every round(1/sample_pct)-th normal into the histogram.

    NaN normals among the sampled ones are skipped.  Returns the updated
    counts array (also stored on the accumulator).
    """
    if not 0.0 < sample_pct <= 1.0:
        raise ValueError("sample_pct must be in (0, 1]")
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    stride = max(1, int(round(1.0 / sample_pct)))
    sampled = normals[::stride]
    sampled = sampled[np.all(np.isfinite(sampled), axis=1)]
    if len(sampled):
        idx = find_cell_indices(ga, sampled)
        ga.counts += np.bincount(idx, minlength=ga.num_cells)
    return ga.counts


def _vertex_values(ga: GaussianAccumulator) -> np.ndarray:
    """Per-vertex value: mean of adjacent cell counts, normalized to [0, 255]."""
    counts = ga.counts.astype(np.float64)
    peak = counts.max()
    if peak > 0:
        counts = counts * (255.0 / peak)
    values = np.empty(len(ga.ico.vertices))
    for v, cells in enumerate(ga.vertex_cells):
        values[v] = counts[cells].mean()
    return values


def unwrap_to_image(ga: GaussianAccumulator) -> UnwrappedImage:
    """Unwrap the histogram into the five-chart 2D image used for peak finding."""
    values = _vertex_values(ga)
    return UnwrappedImage(
        pixels=values[ga.layout],
        pixel_to_vertex=ga.layout,
        vertex_normals=ga.ico.vertices,
    )


_RING_FOOTPRINT = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=bool)


def detect_peaks(img: UnwrappedImage, v_min: float) -> tuple[np.ndarray, np.ndarray]:
    """Pixels that strictly dominate their 3x3 neighborhood and exceed v_min.

    Returns (normals, weights); duplicates from chart-border padding are kept
    and left to :func:`cluster_peaks`.
    """
    ring_max = ndimage.maximum_filter(
        img.pixels, footprint=_RING_FOOTPRINT, mode="constant", cval=-np.inf
    )
    mask = (img.pixels > ring_max) & (img.pixels > v_min)
    rows, cols = np.nonzero(mask)
    verts = img.pixel_to_vertex[rows, cols]
    return img.vertex_normals[verts], img.pixels[rows, cols]


def detect_peaks_sphere(ga: GaussianAccumulator, v_min: float) -> tuple[np.ndarray, np.ndarray]:
    """Sphere-native oracle detector: strict maxima over the vertex 1-ring.

    Used to validate the image-based detector; agrees with it up to
    chart-border duplicates on well-formed inputs.
    """
    values = _vertex_values(ga)
    adj = vertex_adjacency(ga.ico)
    keep = []
    for v, nbrs in enumerate(adj):
        val = values[v]
        if val > v_min and all(val > values[u] for u in nbrs):
            keep.append(v)
    keep = np.asarray(keep, dtype=np.int64)
    return ga.ico.vertices[keep], values[keep]


def cluster_peaks(normals: np.ndarray, weights: np.ndarray, d_peak: float) -> PeakList:
    """Merge raw peaks by single-linkage clustering with cutoff ``d_peak``.

    Each cluster collapses to the weight-weighted mean normal (renormalized);
    output is sorted by descending total weight and capped at 254 peaks.
    """
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) == 0:
        return PeakList(normals=np.empty((0, 3)), weights=np.empty(0))
    if len(weights) == 1:
        return PeakList(normals=normals.copy(), weights=weights.copy())

    labels = fcluster(linkage(normals, method="single"), t=d_peak, criterion="distance")
    merged_n = []
    merged_w = []
    for lab in np.unique(labels):
        sel = labels == lab
        w = weights[sel]
        total = w.sum()
        mean = (normals[sel] * w[:, None]).sum(axis=0)
        norm = np.linalg.norm(mean)
        if norm < 1e-12:
            # antipodal cancellation: fall back to the heaviest member
            mean = normals[sel][np.argmax(w)]
            norm = 1.0
        merged_n.append(mean / norm)
        merged_w.append(total)
    merged_n = np.asarray(merged_n)
    merged_w = np.asarray(merged_w)
    order = np.argsort(-merged_w, kind="stable")[:MAX_PEAKS]
    return PeakList(normals=merged_n[order], weights=merged_w[order])


def dominant_normals(mesh_normals: np.ndarray, level: int, v_min: float,
                     d_peak: float, sample_pct: float) -> PeakList:
    """Full estimation pass: integrate, unwrap, detect, cluster."""
    ga = build_accumulator(level)
    integrate_normals(ga, mesh_normals, sample_pct)
    img = unwrap_to_image(ga)
    raw_n, raw_w = detect_peaks(img, v_min)
    return cluster_peaks(raw_n, raw_w, d_peak)
