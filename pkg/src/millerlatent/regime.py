"""Applicability of a plane-index description to a fracture surface mesh.

A triangle mesh is segmented into planar regions by greedy region growing.
The verdict has three modes: a single dominant plane (``Inference``),
a mixture of substantial planar facets (``Partial``), or no usable planar
structure (``Rejection``). All thresholds are relative to the mesh
diameter or to total area, so verdicts do not depend on units or pose.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import DegenerateCloud
from .miller import MillerIndex, canonicalize

__all__ = [
    "Mode",
    "FragmentSurface",
    "PlaneFit",
    "RegimeVerdict",
    "fit_plane",
    "segment_planes",
    "assess",
    "snap_to_miller",
    "DEFAULTS",
]

DEFAULTS = {
    "theta_single": 0.8,
    "theta_facet": 0.1,
    "rho_max": 0.01,
    "angle_tol": math.radians(3.0),
    "dist_rel": 0.02,
    # regions smaller than this fraction of area do not count as facets
    "min_region": 0.01,
}


class Mode(str, enum.Enum):
    INFERENCE = "Inference"
    PARTIAL = "Partial"
    REJECTION = "Rejection"

    def __str__(self):
        return self.value


@dataclass(eq=False)
class FragmentSurface:
    """Indexed triangle mesh; ``groups`` optionally labels each face."""

    vertices: np.ndarray
    faces: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.faces = np.asarray(self.faces, dtype=int)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be an (n, 3) array")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3 or len(self.faces) == 0:
            raise ValueError("faces must be a non-empty (m, 3) array")
        if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")
        if self.groups is not None:
            self.groups = np.asarray(self.groups)
            if len(self.groups) != len(self.faces):
                raise ValueError("groups must label every face")
        if np.any(self.face_areas <= 1e-14 * self.diameter**2):
            raise ValueError("mesh contains zero-area triangles")

    @classmethod
    def from_triangles(cls, triangles, groups=None):
        tri = np.asarray(triangles, dtype=float).reshape(-1, 3, 3)
        return cls(tri.reshape(-1, 3), np.arange(3 * len(tri)).reshape(-1, 3), groups)

    @cached_property
    def _cross(self):
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        return np.cross(b - a, c - a)

    @cached_property
    def face_areas(self):
        return 0.5 * np.linalg.norm(self._cross, axis=1)

    @cached_property
    def face_normals(self):
        return self._cross / np.linalg.norm(self._cross, axis=1)[:, None]

    @cached_property
    def face_centroids(self):
        return self.vertices[self.faces].mean(axis=1)

    @cached_property
    def diameter(self):
        v = np.unique(self.vertices[np.unique(self.faces)], axis=0)
        best = 0.0
        for start in range(0, len(v), 512):
            chunk = v[start:start + 512]
            d2 = ((chunk[:, None, :] - v[None, :, :]) ** 2).sum(axis=2)
            best = max(best, float(d2.max()))
        return math.sqrt(best)

    @cached_property
    def total_area(self):
        return float(self.face_areas.sum())

    def neighbors(self):
        """Face adjacency through shared (undirected) edges.

        Vertices closer than 1e-9 of the diameter are welded first, so
        triangle soups with duplicated corners are still connected.
        """
        quantum = 1e-9 * self.diameter
        _, weld = np.unique(np.round(self.vertices / quantum), axis=0, return_inverse=True)
        faces = weld.reshape(-1)[self.faces]
        owners = {}
        for fi, tri in enumerate(faces):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                owners.setdefault((min(a, b), max(a, b)), []).append(fi)
        adj = [set() for _ in range(len(self.faces))]
        for fs in owners.values():
            for f, g in itertools.permutations(fs, 2):
                adj[f].add(g)
        return [sorted(a) for a in adj]

    def transformed(self, matrix=None, scale=1.0, shift=(0.0, 0.0, 0.0)):
        m = np.eye(3) if matrix is None else np.asarray(matrix, dtype=float)
        v = scale * self.vertices @ m.T + np.asarray(shift, dtype=float)
        return FragmentSurface(v, self.faces.copy(), None if self.groups is None else self.groups.copy())


@dataclass
class PlaneFit:
    normal: np.ndarray
    offset: float
    rms_residual: float
    support_area: float = 1.0
    faces: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self):
        snapped = snap_to_miller(self.normal)
        return {
            "normal": [float(c) for c in self.normal],
            "offset": float(self.offset),
            "rms_residual": float(self.rms_residual),
            "support_area": float(self.support_area),
            "index": str(snapped) if snapped is not None else None,
        }


@dataclass
class RegimeVerdict:
    mode: Mode
    fits: list
    applicable: bool


def _orient(normal):
    i = int(np.argmax(np.abs(normal) > 1e-12))
    return -normal if normal[i] < 0 else normal


def fit_plane(points) -> PlaneFit:
    """Least-squares plane through a point cloud.

    The normal is the singular vector of the centered cloud with the
    smallest singular value; ``rms_residual`` is the root-mean-square
    orthogonal distance of the points to the plane.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
        raise DegenerateCloud("need at least 3 points in 3D")
    centroid = pts.mean(axis=0)
    rel = pts - centroid
    _, s, vt = np.linalg.svd(rel, full_matrices=False)
    if s[0] <= 1e-300 or s[1] <= 1e-10 * s[0]:
        raise DegenerateCloud("points are coincident or collinear")
    normal = _orient(vt[2])
    dist = rel @ normal
    return PlaneFit(normal, float(normal @ centroid), float(np.sqrt(np.mean(dist**2))))


def segment_planes(s: FragmentSurface, angle_tol=DEFAULTS["angle_tol"], dist_tol=None):
    """Split a mesh into planar regions by greedy region growing.

    Seeds are taken largest face first. A neighbouring face joins a region
    when its normal is within ``angle_tol`` of the region's area-weighted
    normal and its centroid lies within ``dist_tol`` of the region plane.
    Each region is refit with :func:`fit_plane`.

    Returns
    -------
    list of PlaneFit
        Sorted by ``support_area``, largest first.
    """
    if dist_tol is None:
        dist_tol = DEFAULTS["dist_rel"] * s.diameter
    cos_tol = math.cos(angle_tol)
    areas, normals, cents = s.face_areas, s.face_normals, s.face_centroids
    adj = s.neighbors()
    label = np.full(len(areas), -1)
    regions = []
    for seed in np.argsort(-areas, kind="stable"):
        if label[seed] >= 0:
            continue
        rid = len(regions)
        label[seed] = rid
        members = [seed]
        sum_n = areas[seed] * normals[seed]
        sum_c = areas[seed] * cents[seed]
        area = areas[seed]
        frontier = deque([seed])
        while frontier:
            f = frontier.popleft()
            for g in adj[f]:
                if label[g] >= 0:
                    continue
                n_r = sum_n / np.linalg.norm(sum_n)
                c_r = sum_c / area
                cos = float(normals[g] @ n_r)
                if abs(cos) < cos_tol or abs(n_r @ (cents[g] - c_r)) > dist_tol:
                    continue
                label[g] = rid
                members.append(g)
                sum_n = sum_n + areas[g] * math.copysign(1.0, cos) * normals[g]
                sum_c = sum_c + areas[g] * cents[g]
                area += areas[g]
                frontier.append(g)
        regions.append((np.array(sorted(members)), area))

    total = s.total_area
    fits = []
    for faces, area in regions:
        pts = s.vertices[np.unique(s.faces[faces])]
        fit = fit_plane(pts)
        fit.support_area = float(area / total)
        fit.faces = faces
        fits.append(fit)
    fits.sort(key=lambda f: -f.support_area)
    return fits


def assess(
    s: FragmentSurface,
    theta_single=DEFAULTS["theta_single"],
    theta_facet=DEFAULTS["theta_facet"],
    rho_max=DEFAULTS["rho_max"],
    angle_tol=DEFAULTS["angle_tol"],
    dist_tol=None,
    min_region=DEFAULTS["min_region"],
) -> RegimeVerdict:
    """Classify a surface as single-plane, multi-plane or non-planar.

    A region is planar when its rms residual is at most ``rho_max`` times
    the mesh diameter. ``Inference`` needs one planar region holding at
    least ``theta_single`` of the area. ``Partial`` needs two or more
    planar regions of at least ``theta_facet`` each, with planar regions
    of at least ``min_region`` jointly holding ``theta_single`` of the
    area. Anything else is ``Rejection``.
    """
    if not 0 < theta_facet <= theta_single <= 1:
        raise ValueError("need 0 < theta_facet <= theta_single <= 1")
    fits = segment_planes(s, angle_tol, dist_tol)
    rms_bound = rho_max * s.diameter
    facets = [f for f in fits if f.rms_residual <= rms_bound and f.support_area >= min_region]
    if fits[0].support_area >= theta_single and fits[0].rms_residual <= rms_bound:
        return RegimeVerdict(Mode.INFERENCE, facets, True)
    big = [f for f in facets if f.support_area >= theta_facet]
    if len(big) >= 2 and sum(f.support_area for f in facets) >= theta_single:
        return RegimeVerdict(Mode.PARTIAL, facets, True)
    return RegimeVerdict(Mode.REJECTION, facets, False)


@lru_cache(maxsize=8)
def _candidate_directions(max_index):
    rng = range(-max_index, max_index + 1)
    cands = sorted(
        {canonicalize(t) for t in itertools.product(rng, repeat=3) if any(t)},
        key=lambda m: (m.max_component, m),
    )
    dirs = np.array(cands, dtype=float)
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return cands, dirs


def snap_to_miller(normal, max_index=3, tol_deg=2.0) -> MillerIndex | None:
    """Nearest low-index lattice direction to ``normal`` within ``tol_deg``, else None."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    cands, dirs = _candidate_directions(max_index)
    cos = np.abs(dirs @ n)
    best = int(np.argmax(cos))  # first max, so ties favour lower index
    angle = math.degrees(math.acos(min(1.0, float(cos[best]))))
    return cands[best] if angle <= tol_deg else None
