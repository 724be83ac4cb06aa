"""Inverse inference from a 2D fragment to ranked plane families.

Every canonical family up to ``max_index`` is scored by the smallest
signature distance between the fragment and a cross-section of the
family representative, searched over the cut offset ``d``. The search
is a uniform grid over the open offset interval, golden-section
refinement around each grid-local minimum, and a final probe of the
offsets where the plane passes through a cube vertex. The prior over families is
uniform; the score is a distance, not a probability.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptySlice
from .miller import PlaneFamily, enumerate_families
from .shape import ShapeSignature, match, project, signature
from .slicing import CutPlane, offset_range, slice_cube
from .tolerances import EXACT

__all__ = [
    "LatentHypothesis",
    "ConsistencyVerdict",
    "AxisSummary",
    "plane_distance",
    "score_family",
    "infer_latent",
    "check_consistency",
    "qualitative_axes",
    "softmax_weights",
]

# scores closer than this are ranked as ties
SCORE_TIE_EPS = 1e-9
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class LatentHypothesis:
    family: PlaneFamily
    best_offset: float
    score: float

    def to_dict(self):
        return {
            "family": str(self.family),
            "score": self.score if math.isfinite(self.score) else None,
            "best_offset": self.best_offset,
        }


@dataclass(frozen=True)
class ConsistencyVerdict:
    consistent: bool
    residual: float
    threshold: float


@dataclass(frozen=True)
class AxisSummary:
    axes_cut: int
    symmetric: bool


def plane_distance(sig: ShapeSignature, plane: CutPlane) -> float:
    """Signature distance between a fragment and the cross-section of ``plane``.

    ``inf`` when the plane misses the cube or the vertex counts differ.
    Shared by the inference search and the consistency check.
    """
    section = slice_cube(plane, exact=False)
    if section is None:
        return math.inf
    return match(sig, signature(project(section))).distance


def _golden(fn, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def score_family(sig: ShapeSignature, family: PlaneFamily, offsets_per_plane=48, refine=3) -> LatentHypothesis:
    """Best match of ``sig`` against cross-sections of ``family``.

    Parameters
    ----------
    sig : ShapeSignature
    family : PlaneFamily
    offsets_per_plane : int
        Grid points over the open offset interval of the representative.
    refine : int
        How many grid-local minima get golden-section refinement.
    """
    if offsets_per_plane < 3:
        raise ValueError("offsets_per_plane must be >= 3")
    rep = family.representative
    lo, hi = offset_range(rep)
    grid = lo + (hi - lo) * np.arange(1, offsets_per_plane + 1) / (offsets_per_plane + 1)

    def f(d):
        return plane_distance(sig, CutPlane(rep, float(d)))

    vals = np.array([f(d) for d in grid])
    best_d, best = float(grid[int(np.argmin(vals))]), float(vals.min())
    padded = np.concatenate([[np.inf], vals, [np.inf]])
    local = [
        i for i in range(len(vals))
        if np.isfinite(vals[i]) and vals[i] <= padded[i] and vals[i] <= padded[i + 2]
        and (vals[i] < padded[i] or vals[i] < padded[i + 2] or vals[i] > 0)
    ]
    local.sort(key=lambda i: (vals[i], i))
    step = (hi - lo) / (offsets_per_plane + 1)
    tol = 1e-12 * (hi - lo)
    for i in local[:refine]:
        if vals[i] == 0.0:
            continue
        a = max(lo + tol, grid[i] - step)
        b = min(hi - tol, grid[i] + step)
        d, v = _golden(f, a, b, tol)
        if v < best:
            best_d, best = float(d), float(v)
    # offsets through a cube vertex can carry shapes that exist nowhere else
    for d in _vertex_offsets(rep):
        if lo < d < hi and best > 0.0:
            v = f(d)
            if v < best:
                best_d, best = float(d), float(v)
    return LatentHypothesis(family, best_d, best)


def _vertex_offsets(normal):
    return sorted({sum(c for c, bit in zip(normal, corner) if bit) for corner in itertools.product((0, 1), repeat=3)})


def _rank_key(h: LatentHypothesis):
    s = math.floor(h.score / SCORE_TIE_EPS) if math.isfinite(h.score) else math.inf
    return (s, h.family.max_component, tuple(h.family.representative))


def infer_latent(f, max_index=2, offsets_per_plane=48, top_k=5, workers=1):
    """Rank plane families by how well they reproduce fragment ``f``.

    Returns
    -------
    list of LatentHypothesis
        At most ``top_k`` hypotheses, best (lowest score) first. Ties go
        to the lower maximum index, then to the lexicographically smaller
        representative.
    """
    if max_index < 1:
        raise ValueError("max_index must be >= 1")
    sig = f if isinstance(f, ShapeSignature) else signature(f)
    families = enumerate_families(max_index)

    def run(fam):
        return score_family(sig, fam, offsets_per_plane)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hyps = list(pool.map(run, families))
    else:
        hyps = [run(fam) for fam in families]
    hyps.sort(key=_rank_key)
    return hyps[:top_k]


def check_consistency(f, p: CutPlane, threshold=EXACT.consistency) -> ConsistencyVerdict:
    """Is fragment ``f`` a (similarity-transformed) cross-section of plane ``p``?"""
    if slice_cube(p, exact=False) is None:
        raise EmptySlice(f"plane {p} does not cut the cube")
    sig = f if isinstance(f, ShapeSignature) else signature(f)
    residual = plane_distance(sig, p)
    return ConsistencyVerdict(residual <= threshold, residual, threshold)


def qualitative_axes(h) -> AxisSummary:
    """How many axes the representative plane meets, and whether it does so evenly."""
    fam = h.family if isinstance(h, LatentHypothesis) else h
    nonzero = [abs(c) for c in fam.representative if c]
    return AxisSummary(len(nonzero), len(set(nonzero)) == 1)


def softmax_weights(hyps, temperature=0.01):
    """Display-only weights from scores; not a calibrated probability."""
    s = np.array([h.score for h in hyps], dtype=float)
    s = np.where(np.isfinite(s), s, np.inf)
    if not np.isfinite(s).any():
        return np.full(len(s), 1.0 / len(s)) if len(s) else s
    z = -(s - s[np.isfinite(s)].min()) / temperature
    w = np.exp(z)
    return w / w.sum()
