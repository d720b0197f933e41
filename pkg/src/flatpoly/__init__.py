"""flatpoly: planar segment and polygon extraction from 3D sensor data.

Unorganized point clouds, organized (range-image) clouds, and triangle
meshes are converted to a common half-edge mesh; dominant plane normals are
estimated with a spherical histogram; planar segments grow per normal and
are emitted as non-convex polygons with interior holes.
"""

from flatpoly._kernels import ACTIVE as kernel_backend
from flatpoly.accumulator import (
    GaussianAccumulator,
    PeakList,
    build_accumulator,
    cluster_peaks,
    detect_peaks,
    dominant_normals,
    find_cell_index,
    integrate_normals,
    unwrap_to_image,
)
from flatpoly.config import (
    NormalEstimationParams,
    PipelineConfig,
    load_config,
    save_config,
)
from flatpoly.geometry import (
    DegenerateInputError,
    DegeneratePolygonError,
    OpenBoundaryError,
    Plane,
    Polygon,
    Polygon2D,
    point_to_plane_distance,
    project_to_plane,
    triangle_normal,
)
from flatpoly.mesh import (
    HalfEdgeMesh,
    mesh_from_opc,
    mesh_from_user,
    triangulate_unorganized,
)
from flatpoly.pipeline import SceneResult, StageError, bench, run_scene
from flatpoly.polygon import extract_polygon, polygon_area_2d
from flatpoly.postprocess import PostprocessParams
from flatpoly.segmentation import PlanarSegment, SegmentationParams, group_assignment
from flatpoly.smoothing import (
    BilateralParams,
    LaplacianParams,
    bilateral_filter_opc,
    laplacian_filter_opc,
)

__version__ = "0.1.0"
