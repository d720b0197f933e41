"""Organized-cloud denoising: vertex Laplacian and bilateral normal smoothing.

Both filters work directly on the image-space grid, so no explicit mesh is
needed: the Laplacian averages each interior vertex toward its kernel-window
neighbors (inverse-distance weights), and the bilateral filter smooths the
normals of the implicit fully-connected right-cut triangle grid while
preserving edges.  Vertex updating after bilateral normal smoothing is
deliberately not performed; only the smoothed normals feed segmentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flatpoly import _kernels
from flatpoly.geometry import DegenerateInputError
from flatpoly.mesh import extract_triangles_opc


@dataclass
class LaplacianParams:
    lam: float = 1.0
    kernel_size: int = 3
    iterations: int = 1

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lambda must be in (0, 1]")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and >= 3")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class BilateralParams:
    sigma_length: float = 0.1
    sigma_angle: float = 0.15
    kernel_size: int = 3
    iterations: int = 1

    def __post_init__(self):
        if self.sigma_length <= 0 or self.sigma_angle <= 0:
            raise ValueError("sigma scales must be positive")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and >= 3")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def laplacian_filter_opc(opc: np.ndarray, params: LaplacianParams) -> np.ndarray:
    """Smooth an (M, N, 3) organized cloud; border ring and NaNs are untouched."""
    opc = np.asarray(opc, dtype=np.float64)
    if opc.ndim != 3 or min(opc.shape[:2]) < params.kernel_size:
        raise DegenerateInputError("grid smaller than the filter kernel")
    return _kernels.laplacian_filter(opc, params.lam, params.kernel_size, params.iterations)


def compute_fc_triangle_data(opc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centroids and unit normals of the fully-connected triangle grid.

    Both outputs have shape (M-1, N-1, 2, 3); entries are NaN exactly when
    one of the implicit triangle's vertices is NaN (or the triangle is
    degenerate, for normals).
    """
    opc = np.asarray(opc, dtype=np.float64)
    if opc.ndim != 3 or opc.shape[0] < 2 or opc.shape[1] < 2:
        raise DegenerateInputError("organized cloud must be at least 2 x 2")
    p1 = opc[:-1, :-1]
    p2 = opc[:-1, 1:]
    p3 = opc[1:, 1:]
    p4 = opc[1:, :-1]

    Mq, Nq = p1.shape[:2]
    centroids = np.empty((Mq, Nq, 2, 3))
    normals = np.empty((Mq, Nq, 2, 3))
    # first triangle {p3, p2, p1}, second {p1, p4, p3}
    for k, (a, b, c) in enumerate(((p3, p2, p1), (p1, p4, p3))):
        centroids[:, :, k] = (a + b + c) / 3.0
        cross = np.cross(b - a, c - a)
        norm = np.linalg.norm(cross, axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            n = cross / norm[..., None]
        n[~(norm > 0.0)] = np.nan
        normals[:, :, k] = n
    return centroids, normals


def bilateral_filter_opc(opc: np.ndarray, params: BilateralParams,
                         trimap: np.ndarray = None) -> np.ndarray:
    """Bilaterally smoothed unit normals for the valid mesh of an OPC.

    Smoothing runs on the fully-connected grid; the result is gathered
    through the GID map so row t is the normal of valid-mesh triangle t.
    """
    # a grid smaller than the kernel is fine here: window neighbors outside
    # the triangle grid are simply skipped (the 2 x 2 single-triangle case)
    opc = np.asarray(opc, dtype=np.float64)
    if opc.ndim != 3 or min(opc.shape[:2]) < 2:
        raise DegenerateInputError("organized cloud must be at least 2 x 2")
    centroids, normals = compute_fc_triangle_data(opc)
    smoothed = _kernels.bilateral_iterate(
        centroids, normals, params.sigma_length, params.sigma_angle,
        params.kernel_size, params.iterations,
    )
    if trimap is None:
        _, trimap = extract_triangles_opc(opc)
    flat = smoothed.reshape(-1, 3)
    valid = trimap >= 0
    out = np.empty((int(valid.sum()), 3))
    out[trimap[valid]] = flat[valid]
    return out
