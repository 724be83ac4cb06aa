"""2D fragments: projection, similarity-invariant signatures, matching, labels.

A fragment is an ``(n, 2)`` float array of vertices. Its signature is
the pair of sequences (edge length / perimeter, interior angle), which is
invariant to translation, rotation and uniform scale. Matching aligns two
signatures over every cyclic shift and over reflection.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneratePolygon, NotCoplanar
from .slicing import CutPlane, Polygon3, in_plane_basis
from .tolerances import EPS_PLANE_FLOAT, EXACT, ToleranceProfile

__all__ = [
    "ShapeSignature",
    "MatchResult",
    "ShapeClass",
    "project",
    "signature",
    "match",
    "classify",
    "signed_area",
    "as_polygon2",
    "similarity_transform",
]


class ShapeClass(str, enum.Enum):
    TRIANGLE = "Triangle"
    SQUARE = "Square"
    RECTANGLE = "Rectangle"
    SKEW_QUADRILATERAL = "SkewQuadrilateral"
    PENTAGON = "Pentagon"
    HEXAGON = "Hexagon"
    REGULAR_HEXAGON = "RegularHexagon"
    IRREGULAR = "Irregular"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class ShapeSignature:
    edge_ratios: np.ndarray
    angles: np.ndarray

    @property
    def n(self):
        return len(self.edge_ratios)

    def as_pairs(self):
        """``(n, 2)`` array of (edge ratio, angle / pi) used by :func:`match`."""
        return np.column_stack([self.edge_ratios, self.angles / math.pi])

    def to_dict(self):
        return {"n": self.n, "edge_ratios": self.edge_ratios.tolist(), "angles": self.angles.tolist()}


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    distance: float


def as_polygon2(points):
    f = np.asarray(points, dtype=float)
    if f.ndim != 2 or f.shape[1] != 2 or len(f) < 3:
        raise DegeneratePolygon(f"a fragment needs at least 3 2D vertices, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise DegeneratePolygon("fragment vertices must be finite")
    return f


@lru_cache(maxsize=64)
def _cyc(n, step):
    idx = (np.arange(n) + step) % n
    idx.setflags(write=False)
    return idx


def signed_area(f):
    x, y = f[:, 0], f[:, 1]
    nxt = _cyc(len(f), 1)
    return 0.5 * float(np.dot(x, y[nxt]) - np.dot(y, x[nxt]))


def project(p: Polygon3, plane: CutPlane | None = None):
    """Express a planar 3D polygon in an orthonormal in-plane frame.

    The map is an isometry, so lengths and angles survive unchanged.
    Counterclockwise winding about the plane normal becomes
    counterclockwise winding in 2D.
    """
    plane = plane if plane is not None else p.plane
    v = np.asarray(p.vertices, dtype=float)
    n = plane.normal_array()
    resid = np.abs(plane.residual(v)) / np.linalg.norm(n)
    if resid.max(initial=0.0) > max(EPS_PLANE_FLOAT, 1e-9 * np.abs(v).max(initial=1.0)):
        raise NotCoplanar(f"vertices lie up to {resid.max():.3g} off the plane")
    u, w, _ = in_plane_basis(n)
    rel = v - v[0]
    return np.column_stack([rel @ u, rel @ w])


def signature(f) -> ShapeSignature:
    f = as_polygon2(f)
    if signed_area(f) < 0:
        f = f[::-1]
    edges = f[_cyc(len(f), 1)] - f
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    perimeter = lengths.sum()
    if perimeter <= 0 or abs(signed_area(f)) <= 1e-12 * perimeter**2:
        raise DegeneratePolygon("fragment has zero perimeter or zero area")
    incoming = edges[_cyc(len(f), -1)]
    cross = incoming[:, 0] * edges[:, 1] - incoming[:, 1] * edges[:, 0]
    dot = (incoming * edges).sum(axis=1)
    turn = np.arctan2(cross, dot)
    return ShapeSignature(lengths / perimeter, math.pi - turn)


@lru_cache(maxsize=64)
def _alignments(n):
    shifts = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    # mirrored polygon: edge j <- edge n-2-j, angle j <- angle n-1-j
    mirror_edges = (n - 2 - shifts) % n
    mirror_angles = (n - 1 - shifts) % n
    return shifts, mirror_edges, mirror_angles


def match(a: ShapeSignature, b: ShapeSignature, tol=EXACT.match) -> MatchResult:
    """Best L-infinity gap between two signatures over shifts and reflection.

    Signatures with different vertex counts never match; their distance
    is reported as ``inf``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.n != b.n:
        return MatchResult(False, math.inf)
    n = a.n
    shifts, me, ma = _alignments(n)
    ea, aa = a.edge_ratios, a.angles / math.pi
    eb, ab = b.edge_ratios, b.angles / math.pi
    direct = np.maximum(np.abs(ea[None, :] - eb[shifts]), np.abs(aa[None, :] - ab[shifts])).max(axis=1)
    mirror = np.maximum(np.abs(ea[None, :] - eb[me]), np.abs(aa[None, :] - ab[ma])).max(axis=1)
    dist = float(min(direct.min(), mirror.min()))
    return MatchResult(dist <= tol, dist)


def classify(f, profile: ToleranceProfile = EXACT) -> ShapeClass:
    """Shape label from vertex count and angle / edge-length bands."""
    sig = f if isinstance(f, ShapeSignature) else signature(f)
    n, ang, er = sig.n, sig.angles, sig.edge_ratios
    if np.any(ang >= math.pi - profile.angle):
        return ShapeClass.IRREGULAR
    equal_edges = er.max() / er.min() - 1.0 <= profile.edge
    if n == 3:
        return ShapeClass.TRIANGLE
    if n == 4:
        if np.all(np.abs(ang - math.pi / 2) <= profile.angle):
            return ShapeClass.SQUARE if equal_edges else ShapeClass.RECTANGLE
        return ShapeClass.SKEW_QUADRILATERAL
    if n == 5:
        return ShapeClass.PENTAGON
    if n == 6:
        if equal_edges and np.all(np.abs(ang - 2 * math.pi / 3) <= profile.angle):
            return ShapeClass.REGULAR_HEXAGON
        return ShapeClass.HEXAGON
    return ShapeClass.IRREGULAR


def similarity_transform(f, angle=0.0, scale=1.0, reflect=False, shift=(0.0, 0.0)):
    """Apply reflection (about the x axis), then rotation, scale and shift."""
    f = np.asarray(f, dtype=float)
    if reflect:
        f = f * np.array([1.0, -1.0])
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return scale * f @ rot.T + np.asarray(shift, dtype=float)
