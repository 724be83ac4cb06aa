"""Synthetic benchmark generation with ground-truth labels.

Four sample kinds are produced:

* ``Fragment2D``: a cube cross-section projected to 2D and augmented.
* ``Pair2D3D``: a fragment next to a cube scene with a highlighted plane,
  either generated from that plane (consistent) or from a mismatched one.
* ``PolycrystalMesh``: fracture facets of a Voronoi polycrystal, one
  low-index cleavage plane per grain.
* ``NonplanarMesh``: smooth curved surfaces with no planar latent.

Every sample draws from its own random stream, seeded from the master
seed and the sample id, so output does not depend on thread count.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

from . import __version__
from .errors import IoFailure
from .formats import fragment_svg, round_sig, scene_svg, write_obj
from .miller import PlaneFamily, family_of, format_family, parse_family
from .regime import FragmentSurface, Mode
from .shape import classify, match, project, signature, similarity_transform
from .slicing import CutPlane, offset_range, plane_patch_mesh, slice_cube

__all__ = [
    "AugmentationSpec",
    "DatasetConfig",
    "Sample",
    "derive_seed",
    "sample_offset",
    "gen_fragment",
    "gen_pair",
    "gen_polycrystal",
    "gen_nonplanar",
    "emit_dataset",
    "load_manifest",
    "DEFAULT_FAMILIES",
]

DEFAULT_FAMILIES = ("{100}", "{110}", "{111}")
KINDS = ("Fragment2D", "Pair2D3D", "PolycrystalMesh", "NonplanarMesh")
INCONSISTENT_GAP = 0.1
_MAX_RETRIES = 64


@dataclass(frozen=True)
class AugmentationSpec:
    rotation: tuple = (0.0, 2 * math.pi)
    scale: tuple = (0.5, 2.0)
    reflect_prob: float = 0.5
    jitter: float = 0.0  # vertex noise sigma as a fraction of the fragment diameter

    def __post_init__(self):
        if not 0 < self.scale[0] <= self.scale[1]:
            raise ValueError("scale range must be positive and ordered")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        if not 0 <= self.reflect_prob <= 1:
            raise ValueError("reflect_prob must lie in [0, 1]")


NO_AUGMENTATION = AugmentationSpec(rotation=(0.0, 0.0), scale=(1.0, 1.0), reflect_prob=0.0)


@dataclass
class DatasetConfig:
    fragments: int = 10
    pairs: int = 10
    polycrystals: int = 2
    nonplanar: int = 2
    families: tuple = DEFAULT_FAMILIES
    augmentation: AugmentationSpec = field(default_factory=AugmentationSpec)
    grains: tuple = (2, 12)
    consistent_fraction: float = 0.5

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "augmentation" in d and not isinstance(d["augmentation"], AugmentationSpec):
            aug = dict(d["augmentation"])
            for k in ("rotation", "scale"):
                if k in aug:
                    aug[k] = tuple(aug[k])
            d["augmentation"] = AugmentationSpec(**aug)
        for k in ("families", "grains"):
            if k in d:
                d[k] = tuple(d[k])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown dataset config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class Sample:
    id: str
    kind: str
    truth: dict
    seed: int
    assets: list = field(default_factory=list)
    # in-memory payload, never serialized
    fragment: np.ndarray | None = field(default=None, repr=False)
    surface: FragmentSurface | None = field(default=None, repr=False)
    scene: object = field(default=None, repr=False)

    def record(self):
        return {
            "id": self.id,
            "kind": self.kind,
            "truth": round_sig(self.truth),
            "assets": list(self.assets),
            "seed": self.seed,
            "generator_version": __version__,
        }


def derive_seed(master_seed, sample_id):
    """64-bit seed for one sample, independent of generation order."""
    h = hashlib.sha256(f"{int(master_seed)}:{sample_id}".encode()).digest()
    return int.from_bytes(h[:8], "little")


def _as_family(f):
    if isinstance(f, PlaneFamily):
        return f
    if isinstance(f, str):
        return parse_family(f)
    return family_of(f)


def sample_offset(normal, rng, middle=0.8):
    """Offset drawn uniformly from the central ``middle`` share of the valid interval."""
    lo, hi = offset_range(normal)
    margin = 0.5 * (1 - middle)
    return lo + (hi - lo) * (margin + middle * rng.random())


def _pick_plane(rng, families, offset_sampler=None):
    fam = _as_family(families[int(rng.integers(len(families)))])
    members = sorted(fam.members)
    member = members[int(rng.integers(len(members)))]
    sampler = offset_sampler or sample_offset
    for _ in range(_MAX_RETRIES):
        d = float(sampler(member, rng))
        section = slice_cube(CutPlane(member, d))
        if section is not None:
            return fam, member, d, section
    raise RuntimeError(f"could not find a non-empty slice for {member}")


def _augment(f, aug, rng):
    angle = float(rng.uniform(*aug.rotation))
    scale = float(rng.uniform(*aug.scale))
    reflect = bool(rng.random() < aug.reflect_prob)
    out = similarity_transform(f, angle, scale, reflect)
    if aug.jitter > 0:
        diam = float(np.linalg.norm(out[:, None] - out[None], axis=2).max())
        out = out + rng.normal(0.0, aug.jitter * diam, size=out.shape)
    return out, {"rotation": angle, "scale": scale, "reflected": reflect, "jitter": aug.jitter}


def _plane_truth(fam, member, d):
    return {"family": format_family(fam), "member": str(member), "offset": float(d)}


def gen_fragment(families=DEFAULT_FAMILIES, offset_sampler=None, aug=None, seed=0, sample_id=None):
    """One augmented 2D fragment with its generating plane as ground truth."""
    aug = aug or AugmentationSpec()
    rng = np.random.default_rng(seed)
    fam, member, d, section = _pick_plane(rng, list(families), offset_sampler)
    clean = project(section)
    frag, transform = _augment(clean, aug, rng)
    truth = {
        **_plane_truth(fam, member, d),
        "transform": transform,
        "n_vertices": len(clean),
        "shape_class": str(classify(clean)),
        "regime": str(Mode.INFERENCE),
        "applicable": True,
    }
    return Sample(sample_id or f"fragment-{seed}", "Fragment2D", truth, int(seed), fragment=frag)


def gen_pair(consistent, families=DEFAULT_FAMILIES, seed=0, aug=None, sample_id=None, offset_sampler=None):
    """Fragment plus cube scene; the fragment either comes from the shown plane or clearly does not.

    Inconsistent fragments are redrawn from other families until their
    vertex count differs from the shown section or their signature
    distance to it exceeds 0.1.
    """
    aug = aug or AugmentationSpec()
    rng = np.random.default_rng(seed)
    families = [_as_family(f) for f in families]
    fam, member, d, section = _pick_plane(rng, families, offset_sampler)
    scene = plane_patch_mesh(CutPlane(member, d))
    plane_sig = signature(project(section))
    if consistent:
        ffam, fmember, fd, fsection = fam, member, d, section
    else:
        others = [f for f in families if f != fam]
        if not others:
            raise ValueError("inconsistent pairs need at least two families")
        for _ in range(_MAX_RETRIES):
            ffam, fmember, fd, fsection = _pick_plane(rng, others, offset_sampler)
            gap = match(signature(project(fsection)), plane_sig).distance
            if gap > INCONSISTENT_GAP:
                break
        else:
            raise RuntimeError("could not draw a clearly inconsistent fragment")
    frag, transform = _augment(project(fsection), aug, rng)
    truth = {
        "consistent": bool(consistent),
        "plane": _plane_truth(fam, member, d),
        "fragment": {**_plane_truth(ffam, fmember, fd), "transform": transform},
        "regime": str(Mode.INFERENCE),
        "applicable": True,
    }
    return Sample(sample_id or f"pair-{seed}", "Pair2D3D", truth, int(seed), fragment=frag, scene=scene)


# --- convex polytopes as face lists -------------------------------------------------

_CUBE_FACES = [
    [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)],
    [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
    [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)],
    [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)],
    [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)],
    [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)],
]


def _unit_cube():
    return [np.array(f, dtype=float) for f in _CUBE_FACES]


def _order_on_plane(points, normal):
    if len(points) < 3:
        return None
    pts = np.array(points)
    keep = [0]
    for i in range(1, len(pts)):
        if np.min(np.linalg.norm(pts[keep] - pts[i], axis=1)) > 1e-10:
            keep.append(i)
    pts = pts[keep]
    if len(pts) < 3:
        return None
    n = normal / np.linalg.norm(normal)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(helper, n)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    rel = pts - pts.mean(axis=0)
    return pts[np.argsort(np.arctan2(rel @ v, rel @ u))]


def _clip(faces, normal, d):
    """Keep the part of a convex polytope with ``normal . x <= d``; also return the cut polygon."""
    out, cut = [], []
    for face in faces:
        s = face @ normal - d
        kept = []
        for i in range(len(face)):
            p, q = face[i], face[(i + 1) % len(face)]
            sp, sq = s[i], s[(i + 1) % len(face)]
            if sp <= 0:
                kept.append(p)
            if (sp < 0 < sq) or (sq < 0 < sp):
                x = p + (q - p) * (sp / (sp - sq))
                kept.append(x)
                cut.append(x)
            elif sp == 0:
                cut.append(p)
        if len(kept) >= 3:
            out.append(np.array(kept))
    cap = _order_on_plane(cut, normal)
    if cap is not None:
        # outward normal of the cap is +normal; _order_on_plane winds CCW about it
        out.append(cap)
    return out, cap


def _centroid(faces):
    pts = np.vstack(faces)
    apex = pts.mean(axis=0)
    vol, acc = 0.0, np.zeros(3)
    for f in faces:
        for i in range(1, len(f) - 1):
            a, b, c = f[0], f[i], f[i + 1]
            v = abs(np.dot(a - apex, np.cross(b - apex, c - apex))) / 6.0
            vol += v
            acc += v * (a + b + c + apex) / 4.0
    return acc / vol if vol > 0 else apex


def _polygon_area(poly):
    return 0.5 * float(np.linalg.norm(np.cross(poly, np.roll(poly, -1, axis=0)).sum(axis=0)))


def _triangulate(poly, levels=0):
    """Fan triangulation about the centroid, then ``levels`` rounds of midpoint subdivision."""
    c = poly.mean(axis=0)
    tris = [np.array([c, poly[i], poly[(i + 1) % len(poly)]]) for i in range(len(poly))]
    for _ in range(levels):
        nxt = []
        for a, b, cc in tris:
            ab, bc, ca = (a + b) / 2, (b + cc) / 2, (cc + a) / 2
            nxt += [np.array(t) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, cc), (ab, bc, ca))]
        tris = nxt
    return tris


def _mesh_from_triangles(tris, groups):
    """Indexed mesh with vertices shared inside each group (so faces are adjacent)."""
    verts, faces, lookup = [], [], {}
    for tri, g in zip(tris, groups):
        idx = []
        for p in tri:
            key = (g, *np.round(p, 12))
            if key not in lookup:
                lookup[key] = len(verts)
                verts.append(p)
            idx.append(lookup[key])
        faces.append(idx)
    return FragmentSurface(np.array(verts), np.array(faces), np.array(groups))


LOW_INDEX_FAMILIES = DEFAULT_FAMILIES


def gen_polycrystal(n_grains, seed=0, families=LOW_INDEX_FAMILIES, subdivisions=1, sample_id=None):
    """Voronoi polycrystal in the unit cube with one cleavage facet per grain.

    Each grain is cut by a random member of a random low-index family,
    passing through the grain centroid. The exposed facets form the
    fracture surface; faces are grouped by grain.
    """
    if n_grains < 1:
        raise ValueError("n_grains must be >= 1")
    rng = np.random.default_rng(seed)
    sites = rng.random((n_grains, 3))
    tris, groups, facets = [], [], []
    fams = [_as_family(f) for f in families]
    for i, site in enumerate(sites):
        cell = _unit_cube()
        for j, other in enumerate(sites):
            if i == j:
                continue
            n = other - site
            cell, _ = _clip(cell, n, float(n @ (site + other) / 2))
        center = _centroid(cell)
        fam = fams[int(rng.integers(len(fams)))]
        members = sorted(fam.members)
        member = members[int(rng.integers(len(members)))]
        normal = np.array(member, dtype=float)
        _, facet = _clip(cell, normal, float(normal @ center))
        start = len(tris)
        for t in _triangulate(facet, subdivisions):
            tris.append(t)
            groups.append(i)
        area = _polygon_area(facet)
        facets.append({
            "grain": i,
            "family": format_family(fam),
            "member": str(member),
            "offset": float(normal @ center),
            "area": area,
            "faces": [start, len(tris)],
        })
    surface = _mesh_from_triangles(tris, groups)
    total = sum(f["area"] for f in facets)
    for f in facets:
        f["support_area"] = f["area"] / total
    regime = Mode.PARTIAL if n_grains >= 2 else Mode.INFERENCE
    truth = {"regime": str(regime), "applicable": True, "n_grains": n_grains, "facets": facets}
    return Sample(sample_id or f"polycrystal-{seed}", "PolycrystalMesh", truth, int(seed), surface=surface)


def _random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def _disk_mesh(rings):
    """Concentric-ring points on the unit disk as (rho, phi), Delaunay triangulated."""
    pts = [(0.0, 0.0)]
    for k in range(1, rings + 1):
        pts += [(k / rings, 2 * math.pi * j / (6 * k)) for j in range(6 * k)]
    pts = np.array(pts)
    xy = np.column_stack([pts[:, 0] * np.cos(pts[:, 1]), pts[:, 0] * np.sin(pts[:, 1])])
    return pts, Delaunay(xy).simplices


def gen_nonplanar(kind="SphericalCap", seed=0, radius=1.0, cap_angle=math.radians(60.0),
                  amplitude=0.1, wavelength=0.5, resolution=24, sample_id=None):
    """Smooth curved surface (conchoidal-like cap or rippled sheet) with a random pose."""
    rng = np.random.default_rng(seed)
    if kind == "SphericalCap":
        disk, faces = _disk_mesh(resolution)
        theta = disk[:, 0] * cap_angle
        phi = disk[:, 1]
        verts = radius * np.column_stack([
            np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta),
        ])
        params = {"radius": radius, "cap_angle": cap_angle}
    elif kind == "RippledSheet":
        n = 2 * resolution
        xs = np.linspace(0.0, 1.0, n + 1)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        p1, p2 = rng.uniform(0, 2 * math.pi, size=2)
        gz = amplitude * np.sin(2 * math.pi * gx / wavelength + p1) * np.cos(2 * math.pi * gy / wavelength + p2)
        verts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
        idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
        a, b, c, d = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(), idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
        faces = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
        params = {"amplitude": amplitude, "wavelength": wavelength, "phase": [float(p1), float(p2)]}
    else:
        raise ValueError(f"unknown nonplanar kind {kind!r}")
    rot = _random_rotation(rng)
    verts = verts @ rot.T + rng.uniform(-1, 1, size=3)
    surface = FragmentSurface(verts, faces)
    truth = {"regime": str(Mode.REJECTION), "applicable": False, "surface": kind, **params}
    return Sample(sample_id or f"nonplanar-{seed}", "NonplanarMesh", truth, int(seed), surface=surface)


# --- dataset emission -----------------------------------------------------------------

def _plan(config: DatasetConfig):
    jobs = []
    for i in range(config.fragments):
        jobs.append(("Fragment2D", f"fragment-{i:04d}", {}))
    n_consistent = int(round(config.pairs * config.consistent_fraction))
    for i in range(config.pairs):
        # alternate when the split is even so any prefix stays balanced
        consistent = i % 2 == 0 if 2 * n_consistent == config.pairs else i < n_consistent
        jobs.append(("Pair2D3D", f"pair-{i:04d}", {"consistent": consistent}))
    for i in range(config.polycrystals):
        jobs.append(("PolycrystalMesh", f"polycrystal-{i:04d}", {}))
    for i in range(config.nonplanar):
        jobs.append(("NonplanarMesh", f"nonplanar-{i:04d}", {"kind": ("SphericalCap", "RippledSheet")[i % 2]}))
    return jobs


def _build(job, config, master_seed):
    kind, sid, extra = job
    seed = derive_seed(master_seed, sid)
    files = {}
    if kind == "Fragment2D":
        s = gen_fragment(config.families, aug=config.augmentation, seed=seed, sample_id=sid)
        files[f"assets/{sid}.svg"] = fragment_svg(s.fragment, label=sid)
    elif kind == "Pair2D3D":
        s = gen_pair(extra["consistent"], config.families, seed=seed, aug=config.augmentation, sample_id=sid)
        files[f"assets/{sid}-fragment.svg"] = fragment_svg(s.fragment, label=f"{sid} fragment")
        files[f"assets/{sid}-cube.svg"] = scene_svg(s.scene, label=f"{sid} cube")
        facet = FragmentSurface.from_triangles(_triangulate(s.scene.facet.vertices))
        files[f"assets/{sid}-facet.obj"] = write_obj(facet, comment=f"{sid} highlighted plane")
    elif kind == "PolycrystalMesh":
        lo, hi = config.grains
        n = int(np.random.default_rng(seed).integers(lo, hi + 1))
        s = gen_polycrystal(n, seed=seed, sample_id=sid)
        files[f"assets/{sid}.obj"] = write_obj(s.surface, comment=sid)
    else:
        s = gen_nonplanar(extra["kind"], seed=seed, sample_id=sid)
        files[f"assets/{sid}.obj"] = write_obj(s.surface, comment=sid)
    s.assets = sorted(files)
    return s, files


def generate(config: DatasetConfig, seed, threads=1):
    """All samples for ``config`` in manifest order, with their rendered asset files."""
    jobs = _plan(config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda j: _build(j, config, seed), jobs))
    return [_build(j, config, seed) for j in jobs]


def emit_dataset(config: DatasetConfig, out_dir, seed=0, threads=1):
    """Write ``manifest.jsonl`` and ``assets/`` under ``out_dir``; return the manifest records."""
    out = Path(out_dir)
    built = generate(config, seed, threads)
    records = []
    try:
        (out / "assets").mkdir(parents=True, exist_ok=True)
        for sample, files in built:
            for rel, text in files.items():
                (out / rel).write_text(text)
            records.append(sample.record())
        with open(out / "manifest.jsonl", "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write dataset to {out}: {exc}") from exc
    return records


def load_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
