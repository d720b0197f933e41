"""Locality-preserving 64-bit ids for unit normals.

A normal is projected onto the face of the circumscribed cube it points at,
the face coordinates are warped by an area-equalizing tangent transform and
quantized to 30 bits per axis, and the resulting grid cell is mapped through a
Hilbert curve.  The face index (3 bits) is concatenated with the 60-bit curve
position, with faces ordered so consecutive faces share a cube edge.  Nearby
normals get nearby ids in the vast majority of cases; exactness of locality is
not required anywhere, only that the sorted-id order is a good spatial order.
"""

from __future__ import annotations

import numpy as np

HILBERT_ORDER = 30
_GRID = 1 << HILBERT_ORDER
_FACE_SHIFT = np.uint64(2 * HILBERT_ORDER)

# Face chain -y, +x, +z, -x, -z, +y: consecutive faces share a cube edge.
# Each entry: (dominant axis, sign, u axis, v axis, swap, neg_u, neg_v).
# The dihedral transform (swap/neg) orients each face's Hilbert curve so that
# one face's exit corner is the next face's entry corner, making the chained
# curve geometrically continuous everywhere except the two open ends.
_FACES = (
    (1, -1.0, 0, 2, False, False, False),  # -y: ( 1,-1,-1) -> ( 1,-1,-1)... entry (-1,-1,-1)
    (0, +1.0, 1, 2, True, False, False),   # +x: entry ( 1,-1,-1), exit ( 1,-1, 1)
    (2, +1.0, 0, 1, False, True, False),   # +z: entry ( 1,-1, 1), exit (-1,-1, 1)
    (0, -1.0, 1, 2, True, True, False),    # -x: entry (-1,-1, 1), exit (-1,-1,-1)
    (2, -1.0, 0, 1, True, False, False),   # -z: entry (-1,-1,-1), exit (-1, 1,-1)
    (1, +1.0, 0, 2, False, False, False),  # +y: entry (-1, 1,-1), exit ( 1, 1,-1)
)

# Axis/sign pair -> face index, as a 6-entry lookup (axis*2 + (sign<0)).
_FACE_LOOKUP = np.zeros(6, dtype=np.int64)
for _fi, (_ax, _sg, *_rest) in enumerate(_FACES):
    _FACE_LOOKUP[_ax * 2 + (1 if _sg < 0 else 0)] = _fi

_U_AXIS = np.array([f[2] for f in _FACES], dtype=np.int64)
_V_AXIS = np.array([f[3] for f in _FACES], dtype=np.int64)
_SWAP = np.array([f[4] for f in _FACES], dtype=bool)
_NEG_U = np.array([f[5] for f in _FACES], dtype=bool)
_NEG_V = np.array([f[6] for f in _FACES], dtype=bool)


def _hilbert_d(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Hilbert curve position for integer grid cells (vectorized xy -> d)."""
    x = x.astype(np.int64).copy()
    y = y.astype(np.int64).copy()
    d = np.zeros_like(x)
    s = _GRID >> 1
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += (s * s) * ((3 * rx) ^ ry)
        # Rotate the quadrant so the sub-curve is in canonical orientation.
        flip = (ry == 0) & (rx == 1)
        x_f = np.where(flip, s - 1 - x, x)
        y_f = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y_f, x_f), np.where(swap, x_f, y_f)
        s >>= 1
    return d


def _quantize(t: np.ndarray) -> np.ndarray:
    # tangent warp equalizes cell area between face center and corners
    t = np.arctan(t) * (4.0 / np.pi)
    i = np.floor((t + 1.0) * 0.5 * _GRID).astype(np.int64)
    return np.clip(i, 0, _GRID - 1)


def s2_id(normals: np.ndarray) -> np.ndarray:
    """Map unit normals (n, 3) to 64-bit unsigned locality-preserving ids.

    Non-unit inputs are normalized; a zero (or non-finite) vector raises.
    The result is a pure function of the input bits.
    """
    n = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    norms = np.linalg.norm(n, axis=1)
    if not np.all(np.isfinite(norms)) or np.any(norms == 0.0):
        raise ValueError("normals must be finite and nonzero")
    n = n / norms[:, None]

    ax = np.argmax(np.abs(n), axis=1)
    rows = np.arange(n.shape[0])
    dom = n[rows, ax]
    face = _FACE_LOOKUP[ax * 2 + (dom < 0).astype(np.int64)]

    u = n[rows, _U_AXIS[face]] / np.abs(dom)
    v = n[rows, _V_AXIS[face]] / np.abs(dom)
    iu = _quantize(u)
    iv = _quantize(v)
    swap = _SWAP[face]
    iu, iv = np.where(swap, iv, iu), np.where(swap, iu, iv)
    iu = np.where(_NEG_U[face], _GRID - 1 - iu, iu)
    iv = np.where(_NEG_V[face], _GRID - 1 - iv, iv)
    d = _hilbert_d(iu, iv)
    return (face.astype(np.uint64) << _FACE_SHIFT) | d.astype(np.uint64)


def s2_id_single(normal) -> int:
    """Scalar convenience wrapper around :func:`s2_id`."""
    return int(s2_id(np.asarray(normal, dtype=np.float64)[None, :])[0])
