"""File ingestion and output serialization.

Readers: whitespace-delimited XYZ text, PLY (ASCII and binary little-endian),
organized-grid text files ("M N" header then M*N rows, "nan" allowed), PLY
with a "comment grid M N" line, and OBJ/PLY triangle meshes.  Writers: the
polygon result document (17-significant-digit reals for exact round-trips),
a PGM graymap for the unwrapped histogram, and PLY clouds for round-trip
tests.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from flatpoly.geometry import Plane
from flatpoly.mesh import HalfEdgeMesh, mesh_from_user


class ParseError(ValueError):
    """Malformed input file; carries file and line context."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def _parse_floats(tokens, path, line_no, expected):
    if len(tokens) < expected:
        raise ParseError(path, line_no, f"expected {expected} values, got {len(tokens)}")
    try:
        return [float(t) for t in tokens[:expected]]  # float('nan') accepts "nan"/"NaN"
    except ValueError as exc:
        raise ParseError(path, line_no, str(exc)) from None


def load_xyz(path) -> np.ndarray:
    """Whitespace-delimited XYZ text -> (n, 3) unorganized cloud."""
    points = []
    with open(path, "r") as fh:
        for line_no, line in enumerate(fh, 1):
            tokens = line.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            points.append(_parse_floats(tokens, path, line_no, 3))
    return np.asarray(points, dtype=np.float64).reshape(-1, 3)


def load_grid(path) -> np.ndarray:
    """Grid text file ("M N" header, then M*N xyz rows) -> (M, N, 3) cloud."""
    with open(path, "r") as fh:
        lines = fh.readlines()
    header_no = None
    M = N = 0
    for line_no, line in enumerate(lines, 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        try:
            M, N = int(tokens[0]), int(tokens[1])
        except (ValueError, IndexError):
            raise ParseError(path, line_no, "grid header must be two integers 'M N'") from None
        header_no = line_no
        break
    if header_no is None or M < 1 or N < 1:
        raise ParseError(path, header_no or 1, "missing or invalid grid header")
    rows = []
    for line_no, line in enumerate(lines[header_no:], header_no + 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        rows.append(_parse_floats(tokens, path, line_no, 3))
    if len(rows) != M * N:
        raise ParseError(path, len(lines), f"expected {M * N} rows, got {len(rows)}")
    return np.asarray(rows, dtype=np.float64).reshape(M, N, 3)


_PLY_TYPES = {
    "float": ("f", 4), "float32": ("f", 4),
    "double": ("d", 8), "float64": ("d", 8),
    "char": ("b", 1), "int8": ("b", 1),
    "uchar": ("B", 1), "uint8": ("B", 1),
    "short": ("h", 2), "int16": ("h", 2),
    "ushort": ("H", 2), "uint16": ("H", 2),
    "int": ("i", 4), "int32": ("i", 4),
    "uint": ("I", 4), "uint32": ("I", 4),
}


def _parse_ply_header(fh, path):
    line = fh.readline()
    if line.strip() != b"ply":
        raise ParseError(path, 1, "not a PLY file")
    fmt = None
    elements = []  # (name, count, [properties]); property = (name, type) or ("list", count_t, item_t, name)
    grid = None
    line_no = 1
    while True:
        raw = fh.readline()
        line_no += 1
        if not raw:
            raise ParseError(path, line_no, "unexpected end of header")
        tokens = raw.decode("ascii", "replace").split()
        if not tokens:
            continue
        if tokens[0] == "format":
            fmt = tokens[1]
        elif tokens[0] == "comment":
            if len(tokens) == 4 and tokens[1] == "grid":
                grid = (int(tokens[2]), int(tokens[3]))
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise ParseError(path, line_no, "property before element")
            if tokens[1] == "list":
                elements[-1][2].append(("list", tokens[2], tokens[3], tokens[4]))
            else:
                elements[-1][2].append((tokens[2], tokens[1]))
        elif tokens[0] == "end_header":
            break
    if fmt not in ("ascii", "binary_little_endian"):
        raise ParseError(path, line_no, f"unsupported PLY format {fmt!r}")
    return fmt, elements, grid, line_no


def load_ply(path) -> tuple[np.ndarray, np.ndarray | None, tuple | None]:
    """PLY -> (vertices, faces or None, grid shape or None)."""
    with open(path, "rb") as fh:
        fmt, elements, grid, line_no = _parse_ply_header(fh, path)
        vertices = None
        faces = None
        for name, count, props in elements:
            if fmt == "ascii":
                rows = []
                for _ in range(count):
                    line_no += 1
                    rows.append(fh.readline().decode("ascii", "replace").split())
                if name == "vertex":
                    names = [p[0] for p in props]
                    try:
                        ix, iy, iz = names.index("x"), names.index("y"), names.index("z")
                    except ValueError:
                        raise ParseError(path, line_no, "vertex element lacks x/y/z") from None
                    vertices = np.array(
                        [[float(r[ix]), float(r[iy]), float(r[iz])] for r in rows]
                    )
                elif name == "face":
                    faces = []
                    for r in rows:
                        n = int(r[0])
                        if n != 3:
                            raise ParseError(path, line_no, "only triangular faces are supported")
                        faces.append([int(r[1]), int(r[2]), int(r[3])])
                    faces = np.asarray(faces, dtype=np.int64)
            else:
                if name == "vertex":
                    codes = []
                    for p in props:
                        if p[0] == "list":
                            raise ParseError(path, line_no, "list property on vertex element")
                        codes.append((p[0], _PLY_TYPES[p[1]]))
                    rec = np.dtype([(n, "<" + c[0]) for n, c in codes])
                    data = np.frombuffer(fh.read(rec.itemsize * count), dtype=rec)
                    vertices = np.stack(
                        [data["x"].astype(np.float64), data["y"].astype(np.float64),
                         data["z"].astype(np.float64)], axis=1)
                elif name == "face":
                    faces = np.empty((count, 3), dtype=np.int64)
                    (count_code, count_size) = _PLY_TYPES[props[0][1]]
                    (item_code, item_size) = _PLY_TYPES[props[0][2]]
                    for i in range(count):
                        (n,) = struct.unpack("<" + count_code, fh.read(count_size))
                        if n != 3:
                            raise ParseError(path, 0, "only triangular faces are supported")
                        faces[i] = struct.unpack("<3" + item_code, fh.read(3 * item_size))
                else:
                    raise ParseError(path, line_no, f"cannot skip binary element {name!r}")
        if vertices is None:
            raise ParseError(path, line_no, "no vertex element")
        return vertices, faces, grid


def write_ply(path, vertices: np.ndarray, faces: np.ndarray = None,
              binary: bool = True, grid: tuple | None = None):
    """Write a PLY file (double-precision vertices round-trip bit-exactly)."""
    vertices = np.ascontiguousarray(vertices, dtype="<f8").reshape(-1, 3)
    with open(path, "wb") as fh:
        fh.write(b"ply\n")
        fh.write(b"format binary_little_endian 1.0\n" if binary else b"format ascii 1.0\n")
        if grid is not None:
            fh.write(f"comment grid {grid[0]} {grid[1]}\n".encode())
        fh.write(f"element vertex {len(vertices)}\n".encode())
        fh.write(b"property double x\nproperty double y\nproperty double z\n")
        if faces is not None:
            fh.write(f"element face {len(faces)}\n".encode())
            fh.write(b"property list uchar int vertex_indices\n")
        fh.write(b"end_header\n")
        if binary:
            fh.write(vertices.tobytes())
            if faces is not None:
                for f in faces:
                    fh.write(struct.pack("<B3i", 3, int(f[0]), int(f[1]), int(f[2])))
        else:
            for v in vertices:
                fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n".encode())
            if faces is not None:
                for f in faces:
                    fh.write(f"3 {f[0]} {f[1]} {f[2]}\n".encode())


def load_obj(path) -> tuple[np.ndarray, np.ndarray]:
    """OBJ -> (vertices, triangular faces); non-triangular faces are an error."""
    vertices = []
    faces = []
    with open(path, "r") as fh:
        for line_no, line in enumerate(fh, 1):
            tokens = line.split()
            if not tokens:
                continue
            if tokens[0] == "v":
                vertices.append(_parse_floats(tokens[1:], path, line_no, 3))
            elif tokens[0] == "f":
                refs = tokens[1:]
                if len(refs) != 3:
                    raise ParseError(path, line_no, "only triangular faces are supported")
                try:
                    faces.append([int(r.split("/")[0]) - 1 for r in refs])
                except ValueError as exc:
                    raise ParseError(path, line_no, str(exc)) from None
    return (np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
            np.asarray(faces, dtype=np.int64).reshape(-1, 3))


def load_cloud(path, format: str = None):
    """Load a cloud; returns (n, 3) for unorganized or (M, N, 3) for organized.

    ``format`` is "xyz", "grid", or "ply"; inferred from the extension when
    omitted (.xyz/.txt, .grid, .ply).  PLY files with a "comment grid M N"
    header line load as organized clouds.  Unorganized clouds drop invalid
    (non-finite) points at load time; organized clouds keep them as NaN
    placeholders.
    """
    path = Path(path)
    if format is None:
        format = {".xyz": "xyz", ".txt": "xyz", ".grid": "grid", ".ply": "ply"}.get(
            path.suffix.lower())
        if format is None:
            raise ParseError(path, 1, f"cannot infer format from suffix {path.suffix!r}")
    if format == "xyz":
        pts = load_xyz(path)
        return pts[np.all(np.isfinite(pts), axis=1)]
    if format == "grid":
        return load_grid(path)
    if format == "ply":
        vertices, _, grid = load_ply(path)
        if grid is not None:
            M, N = grid
            if M * N != len(vertices):
                raise ParseError(path, 1, f"grid {M}x{N} does not match {len(vertices)} vertices")
            return vertices.reshape(M, N, 3)
        return vertices[np.all(np.isfinite(vertices), axis=1)]
    raise ParseError(path, 1, f"unknown format {format!r}")


def load_mesh(path) -> HalfEdgeMesh:
    """Load a triangular PLY or OBJ mesh and build its half-edge structure."""
    path = Path(path)
    if path.suffix.lower() == ".obj":
        vertices, faces = load_obj(path)
    else:
        vertices, faces, _ = load_ply(path)
        if faces is None:
            raise ParseError(path, 1, "mesh file has no faces")
    return mesh_from_user(vertices, faces)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_ring(fh, tag, ring3, ring2):
    fh.write(f"  {tag} {len(ring3)}\n")
    for p3, p2 in zip(ring3, ring2):
        fh.write(f"    {_fmt(p3[0])} {_fmt(p3[1])} {_fmt(p3[2])} "
                 f"{_fmt(p2[0])} {_fmt(p2[1])}\n")


def write_polygons(polygons, path, stage_timings: dict = None):
    """Write extracted polygons as a structured text document.

    One record per polygon: the plane (normal, point), then each ring as a
    point count followed by per-point lines holding the 3D coordinates and
    the 2D plane projection.  Reals carry 17 significant digits so a parse
    reproduces them exactly.
    """
    with open(path, "w") as fh:
        fh.write(f"flatpoly-polygons 1 count {len(polygons)}\n")
        if stage_timings:
            for stage in sorted(stage_timings):
                fh.write(f"# timing_ms {stage} {stage_timings[stage]:.3f}\n")
        for i, poly in enumerate(polygons):
            n = poly.plane.normal
            p = poly.plane.point
            fh.write(f"polygon {i} holes {len(poly.holes)}\n")
            fh.write(f"  plane {_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])} "
                     f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
            shell3, holes3 = poly.lift()
            _write_ring(fh, "shell", shell3, poly.shell)
            for h3, h2 in zip(holes3, poly.holes):
                _write_ring(fh, "hole", h3, h2)


def read_polygons(path):
    """Parse a polygon document back into Polygon2D records (round-trip)."""
    from flatpoly.geometry import Polygon2D

    with open(path, "r") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    it = iter(enumerate(lines, 1))
    line_no, header = next(it)
    tokens = header.split()
    if tokens[:2] != ["flatpoly-polygons", "1"]:
        raise ParseError(path, line_no, "not a flatpoly polygon document")
    count = int(tokens[3])
    polys = []
    rows = [(no, ln) for no, ln in it if ln.strip() and not ln.lstrip().startswith("#")]
    pos = 0

    def read_ring():
        nonlocal pos
        no, ln = rows[pos]
        tok = ln.split()
        tag, n = tok[0], int(tok[1])
        pos += 1
        ring2 = np.empty((n, 2))
        for i in range(n):
            vals = rows[pos][1].split()
            ring2[i] = (float(vals[3]), float(vals[4]))
            pos += 1
        return tag, ring2

    for _ in range(count):
        no, ln = rows[pos]
        if not ln.startswith("polygon"):
            raise ParseError(path, no, f"expected polygon record, got {ln!r}")
        n_holes = int(ln.split()[3])
        pos += 1
        no, ln = rows[pos]
        vals = ln.split()
        if vals[0] != "plane":
            raise ParseError(path, no, "expected plane line")
        plane = Plane(normal=[float(v) for v in vals[1:4]],
                      point=[float(v) for v in vals[4:7]])
        pos += 1
        tag, shell = read_ring()
        if tag != "shell":
            raise ParseError(path, rows[pos - 1][0], "expected shell ring")
        holes = []
        for _ in range(n_holes):
            tag, ring = read_ring()
            holes.append(ring)
        polys.append(Polygon2D(shell=shell, holes=holes, plane=plane))
    return polys


def write_pgm(pixels: np.ndarray, path):
    """Write a [0, 255] image as an ASCII portable graymap (P2)."""
    img = np.clip(np.rint(np.asarray(pixels, dtype=np.float64)), 0, 255).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n255\n")
        for row in img:
            fh.write(" ".join(str(v) for v in row) + "\n")
