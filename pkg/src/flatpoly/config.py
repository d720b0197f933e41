"""Pipeline configuration: a flat key-value text format with section headers.

Sections mirror the pipeline stages (grammar documented in the README):

    [input]         kind = unorganized | organized | mesh
    [laplacian]     enabled, lambda, kernel_size, iterations
    [bilateral]     enabled, sigma_length, sigma_angle, kernel_size, iterations
    [normals]       level, v_min, d_peak, sample_pct, fixed
    [segmentation]  l_max, ang_min, ptp_max, tri_min, vertices_hole_min
    [postprocess]   alpha, beta_pos, beta_neg, gamma, delta
    [runtime]       threads

``fixed`` lists dominant normals ("x y z" triples separated by ';') and
bypasses histogram estimation.  Unorganized input requires exactly one fixed
normal, (0, 0, 1): extraction after the 2.5D projection only supports planes
aligned with the xy plane (rotate the cloud beforehand for anything else).
"""

from __future__ import annotations

import configparser
import io as _io
from dataclasses import dataclass, field

import numpy as np

from flatpoly.postprocess import PostprocessParams
from flatpoly.segmentation import SegmentationParams
from flatpoly.smoothing import BilateralParams, LaplacianParams

INPUT_KINDS = ("unorganized", "organized", "mesh")


@dataclass
class NormalEstimationParams:
    level: int = 4
    v_min: float = 10.0
    d_peak: float = 0.28
    sample_pct: float = 0.12

    def __post_init__(self):
        if not 0 <= self.level <= 7:
            raise ValueError("level must be in [0, 7]")
        if not 0.0 < self.sample_pct <= 1.0:
            raise ValueError("sample_pct must be in (0, 1]")


@dataclass
class PipelineConfig:
    kind: str = "organized"
    laplacian: LaplacianParams | None = None
    bilateral: BilateralParams | None = None
    normals: NormalEstimationParams = field(default_factory=NormalEstimationParams)
    fixed_normals: np.ndarray | None = None
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    postprocess: PostprocessParams = field(default_factory=PostprocessParams)
    threads: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in INPUT_KINDS:
            raise ValueError(f"input kind must be one of {INPUT_KINDS}, got {self.kind!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.fixed_normals is not None:
            fn = np.atleast_2d(np.asarray(self.fixed_normals, dtype=np.float64))
            norms = np.linalg.norm(fn, axis=1)
            if np.any(norms == 0) or not np.all(np.isfinite(norms)):
                raise ValueError("fixed normals must be finite and nonzero")
            self.fixed_normals = fn / norms[:, None]
        if self.kind == "unorganized":
            if self.fixed_normals is None or len(self.fixed_normals) != 1 or \
                    not np.allclose(self.fixed_normals[0], [0.0, 0.0, 1.0], atol=1e-9):
                raise ValueError(
                    "unorganized input requires exactly one fixed dominant normal (0, 0, 1)")
            if self.laplacian is not None or self.bilateral is not None:
                raise ValueError("grid smoothing filters only apply to organized input")
        if self.kind == "mesh" and (self.laplacian is not None or self.bilateral is not None):
            raise ValueError("grid smoothing filters only apply to organized input")


def _parse_fixed(text: str):
    text = text.strip()
    if not text:
        return None
    rows = [r for r in (chunk.strip() for chunk in text.split(";")) if r]
    return np.array([[float(v) for v in r.split()] for r in rows])


def load_config(path_or_file) -> PipelineConfig:
    """Read a PipelineConfig from a config file (path or open text file)."""
    cp = configparser.ConfigParser()
    if hasattr(path_or_file, "read"):
        cp.read_file(path_or_file)
    else:
        with open(path_or_file, "r") as fh:
            cp.read_file(fh)

    kind = cp.get("input", "kind", fallback="organized")

    laplacian = None
    if cp.has_section("laplacian") and cp.getboolean("laplacian", "enabled", fallback=True):
        laplacian = LaplacianParams(
            lam=cp.getfloat("laplacian", "lambda", fallback=1.0),
            kernel_size=cp.getint("laplacian", "kernel_size", fallback=3),
            iterations=cp.getint("laplacian", "iterations", fallback=1),
        )
    bilateral = None
    if cp.has_section("bilateral") and cp.getboolean("bilateral", "enabled", fallback=True):
        bilateral = BilateralParams(
            sigma_length=cp.getfloat("bilateral", "sigma_length", fallback=0.1),
            sigma_angle=cp.getfloat("bilateral", "sigma_angle", fallback=0.15),
            kernel_size=cp.getint("bilateral", "kernel_size", fallback=3),
            iterations=cp.getint("bilateral", "iterations", fallback=1),
        )

    normals = NormalEstimationParams(
        level=cp.getint("normals", "level", fallback=4),
        v_min=cp.getfloat("normals", "v_min", fallback=10.0),
        d_peak=cp.getfloat("normals", "d_peak", fallback=0.28),
        sample_pct=cp.getfloat("normals", "sample_pct", fallback=0.12),
    )
    fixed = _parse_fixed(cp.get("normals", "fixed", fallback=""))

    segmentation = SegmentationParams(
        l_max=cp.getfloat("segmentation", "l_max", fallback=0.1),
        ang_min=cp.getfloat("segmentation", "ang_min", fallback=0.95),
        ptp_max=cp.getfloat("segmentation", "ptp_max", fallback=0.0),
        tri_min=cp.getint("segmentation", "tri_min", fallback=10),
        vertices_hole_min=cp.getint("segmentation", "vertices_hole_min", fallback=3),
    )
    postprocess = PostprocessParams(
        alpha=cp.getfloat("postprocess", "alpha", fallback=0.0),
        beta_pos=cp.getfloat("postprocess", "beta_pos", fallback=0.0),
        beta_neg=cp.getfloat("postprocess", "beta_neg", fallback=0.0),
        gamma=cp.getfloat("postprocess", "gamma", fallback=0.0),
        delta=cp.getfloat("postprocess", "delta", fallback=0.0),
    )
    threads = cp.getint("runtime", "threads", fallback=1)

    return PipelineConfig(
        kind=kind, laplacian=laplacian, bilateral=bilateral, normals=normals,
        fixed_normals=fixed, segmentation=segmentation, postprocess=postprocess,
        threads=threads,
    )


def save_config(config: PipelineConfig, path_or_file):
    """Write a config file that :func:`load_config` reads back equivalently."""
    cp = configparser.ConfigParser()
    cp["input"] = {"kind": config.kind}
    if config.laplacian is not None:
        lp = config.laplacian
        cp["laplacian"] = {
            "enabled": "true", "lambda": repr(lp.lam),
            "kernel_size": str(lp.kernel_size), "iterations": str(lp.iterations),
        }
    if config.bilateral is not None:
        bp = config.bilateral
        cp["bilateral"] = {
            "enabled": "true", "sigma_length": repr(bp.sigma_length),
            "sigma_angle": repr(bp.sigma_angle), "kernel_size": str(bp.kernel_size),
            "iterations": str(bp.iterations),
        }
    nm = config.normals
    normals_section = {
        "level": str(nm.level), "v_min": repr(nm.v_min),
        "d_peak": repr(nm.d_peak), "sample_pct": repr(nm.sample_pct),
    }
    if config.fixed_normals is not None:
        normals_section["fixed"] = "; ".join(
            " ".join(repr(float(v)) for v in row) for row in config.fixed_normals)
    cp["normals"] = normals_section
    sg = config.segmentation
    cp["segmentation"] = {
        "l_max": repr(sg.l_max), "ang_min": repr(sg.ang_min), "ptp_max": repr(sg.ptp_max),
        "tri_min": str(sg.tri_min), "vertices_hole_min": str(sg.vertices_hole_min),
    }
    pp = config.postprocess
    cp["postprocess"] = {
        "alpha": repr(pp.alpha), "beta_pos": repr(pp.beta_pos), "beta_neg": repr(pp.beta_neg),
        "gamma": repr(pp.gamma), "delta": repr(pp.delta),
    }
    cp["runtime"] = {"threads": str(config.threads)}

    if hasattr(path_or_file, "write"):
        cp.write(path_or_file)
    else:
        with open(path_or_file, "w") as fh:
            cp.write(fh)


def config_to_string(config: PipelineConfig) -> str:
    buf = _io.StringIO()
    save_config(config, buf)
    return buf.getvalue()
