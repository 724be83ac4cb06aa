"""Intersection of a plane ``a x + b y + c z = d`` with the unit cube.

The plane is clipped against the twelve cube edges; hits are deduplicated
and sorted by angle around their centroid, counterclockwise when viewed
from the +normal side. Integral normals with rational offsets are solved
in exact rational arithmetic; arbitrary float normals (fitted planes)
take a float path with small tolerances.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np

from .errors import EmptySlice
from .miller import MillerIndex, canonicalize
from .tolerances import EPS_MERGE

__all__ = [
    "CutPlane",
    "Polygon3",
    "Scene",
    "CUBE_VERTICES",
    "CUBE_EDGES",
    "offset_range",
    "slice_cube",
    "plane_patch_mesh",
    "in_plane_basis",
]

CUBE_VERTICES = np.array(list(itertools.product((0, 1), repeat=3)), dtype=float)


def _cube_edges():
    edges = []
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        for u, v in itertools.product((0, 1), repeat=2):
            p = [0, 0, 0]
            p[others[0]], p[others[1]] = u, v
            q = list(p)
            q[axis] = 1
            edges.append((tuple(p), tuple(q), axis))
    return edges


_EDGES = _cube_edges()
CUBE_EDGES = np.array([[p, q] for p, q, _ in _EDGES], dtype=float)


@dataclass(frozen=True)
class CutPlane:
    """Plane ``normal . x = offset`` in cube coordinates.

    ``normal`` is a :class:`MillerIndex` for lattice planes; a float
    3-vector is accepted for fitted planes.
    """

    normal: object
    offset: float

    def __post_init__(self):
        if isinstance(self.normal, MillerIndex) or (
            len(self.normal) == 3 and all(isinstance(c, Integral) for c in self.normal)
        ):
            raw = tuple(int(c) for c in self.normal)
            canon = canonicalize(raw)
            # rescale the offset with the normal so the plane itself is unchanged
            i = next(j for j, c in enumerate(canon) if c)
            ratio = raw[i] // canon[i]
            if ratio != 1:
                off = self.offset
                off = Fraction(off) / ratio if isinstance(off, Rational) else float(off) / ratio
                object.__setattr__(self, "offset", off)
            object.__setattr__(self, "normal", canon)
        else:
            n = np.asarray(self.normal, dtype=float)
            if n.shape != (3,) or not np.all(np.isfinite(n)) or not np.any(n):
                raise ValueError(f"bad plane normal {self.normal!r}")
            object.__setattr__(self, "normal", tuple(float(c) for c in n))
        if not math.isfinite(float(self.offset)):
            raise ValueError("plane offset must be finite")

    @property
    def is_lattice(self):
        return isinstance(self.normal, MillerIndex)

    def normal_array(self):
        return np.asarray(self.normal, dtype=float)

    def unit_normal(self):
        n = self.normal_array()
        return n / np.linalg.norm(n)

    def residual(self, points):
        """Signed values ``normal . x - offset`` for an ``(m, 3)`` array."""
        return np.asarray(points, dtype=float) @ self.normal_array() - float(self.offset)


@dataclass
class Polygon3:
    vertices: np.ndarray
    plane: CutPlane
    exact: tuple | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self):
        return 0.5 * float(np.linalg.norm(_cross(self.vertices, np.roll(self.vertices, -1, axis=0)).sum(axis=0)))


@dataclass
class Scene:
    """Cube wireframe plus the highlighted cross-section facet."""

    edges: np.ndarray  # (12, 2, 3)
    facet: Polygon3


def offset_range(normal):
    """Open interval of offsets ``d`` for which the plane cuts the cube interior."""
    vals = [sum(c * v for c, v in zip(normal, vert)) for vert in itertools.product((0, 1), repeat=3)]
    return min(vals), max(vals)


def _cross(a, b):
    # np.cross carries heavy per-call overhead for the tiny arrays used here
    return np.stack([
        a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
        a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
        a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
    ], axis=-1)


def in_plane_basis(normal):
    """Right-handed orthonormal ``(u, v, n)`` with ``n`` the unit normal."""
    return _basis(tuple(float(c) for c in normal))


@lru_cache(maxsize=1024)
def _basis(normal):
    n = np.array(normal)
    n = n / np.linalg.norm(n)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = _cross(helper, n)
    u /= np.linalg.norm(u)
    v = _cross(n, u)
    for a in (u, v, n):
        a.setflags(write=False)
    return u, v, n


def _order_ccw(points, normal):
    u, v, _ = in_plane_basis(normal)
    c = points.mean(axis=0)
    rel = points - c
    ang = np.arctan2(rel @ v, rel @ u)
    return np.argsort(ang, kind="stable")


def _exact_hits(normal, d):
    lo, hi = offset_range(normal)
    if not lo < d < hi:
        return None
    hits = set()
    for p, q, axis in _EDGES:
        base = sum(c * x for c, x in zip(normal, p))
        na = normal[axis]
        if na == 0:
            if base == d:
                hits.add(tuple(Fraction(x) for x in p))
                hits.add(tuple(Fraction(x) for x in q))
            continue
        t = (d - base) / na
        if 0 <= t <= 1:
            pt = [Fraction(x) for x in p]
            pt[axis] = t
            hits.add(tuple(pt))
    return sorted(hits)


_EDGE_START = CUBE_EDGES[:, 0]
_EDGE_AXIS = np.array([axis for _, _, axis in _EDGES])


def _float_hits(normal, d, eps):
    vals = CUBE_VERTICES @ normal
    scale = float(np.abs(normal).sum())
    if not (vals.min() + eps * scale < d < vals.max() - eps * scale):
        return None
    base = _EDGE_START @ normal
    na = normal[_EDGE_AXIS]
    flat = np.abs(na) <= 1e-15 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (d - base) / na
    hit = ~flat & (t >= -eps) & (t <= 1 + eps)
    pts = _EDGE_START[hit].copy()
    pts[np.arange(len(pts)), _EDGE_AXIS[hit]] = np.clip(t[hit], 0.0, 1.0)
    lying = flat & (np.abs(base - d) <= eps * scale)
    if lying.any():
        pts = np.vstack([pts, CUBE_EDGES[lying].reshape(-1, 3)])
    gap = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    dup = np.triu(gap <= EPS_MERGE, k=1).any(axis=0)
    return pts[~dup]


def slice_cube(p: CutPlane, exact=None):
    """Cross-section of the unit cube by ``p``.

    Parameters
    ----------
    p : CutPlane
    exact : bool, optional
        Force (True) or forbid (False) rational arithmetic. By default the
        exact path is used whenever the normal is a Miller index.

    Returns
    -------
    Polygon3 or None
        Convex polygon with 3 to 6 vertices wound counterclockwise about
        the normal. ``None`` when the plane misses the cube or only touches
        it along a vertex, edge or face.
    """
    if exact is None:
        exact = p.is_lattice
    if exact and not p.is_lattice:
        raise ValueError("exact slicing needs an integral normal")

    if exact:
        d = Fraction(p.offset) if isinstance(p.offset, Rational) else Fraction(float(p.offset))
        hits = _exact_hits(tuple(p.normal), d)
        if hits is None or len(hits) < 3:
            return None
        pts = np.array([[float(c) for c in h] for h in hits])
        order = _order_ccw(pts, p.normal_array())
        poly = Polygon3(pts[order], p, exact=tuple(hits[i] for i in order))
    else:
        n = p.normal_array()
        hits = _float_hits(n, float(p.offset), 1e-12)
        if hits is None or len(hits) < 3:
            return None
        pts = np.array(hits)
        poly = Polygon3(pts[_order_ccw(pts, n)], p)
    if poly.area <= 1e-14:
        return None
    return poly


def plane_patch_mesh(p: CutPlane, exact=None) -> Scene:
    """Drawable scene: the 12 cube edges plus the cross-section of ``p``."""
    facet = slice_cube(p, exact=exact)
    if facet is None:
        raise EmptySlice(f"plane {p} does not cut the cube")
    return Scene(CUBE_EDGES.copy(), facet)
