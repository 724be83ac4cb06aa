"""Readers and writers for the on-disk formats: OBJ meshes, SVG assets,
plain-text vertex lists. Numbers are written with 12 significant digits.
"""
from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .errors import DegeneratePolygon, MeshFormatError
from .regime import FragmentSurface

__all__ = [
    "fmt",
    "round_sig",
    "write_obj",
    "read_obj",
    "parse_obj",
    "fragment_svg",
    "scene_svg",
    "read_fragment",
    "isometric",
]

SIG_DIGITS = 12
_SVG_NS = "http://www.w3.org/2000/svg"


def fmt(x):
    """Render a float with 12 significant digits; ``-0`` prints as ``0``."""
    s = format(float(x), f".{SIG_DIGITS}g")
    return "0" if s == "-0" else s


def round_sig(obj):
    """Recursively round floats in a JSON-able structure to 12 significant digits."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    if isinstance(obj, np.generic):
        return round_sig(obj.item())
    return obj


def write_obj(surface: FragmentSurface, comment=None):
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines += ["v " + " ".join(fmt(c) for c in v) for v in surface.vertices]
    lines += ["f " + " ".join(str(i + 1) for i in tri) for tri in surface.faces]
    return "\n".join(lines) + "\n"


def read_obj(path) -> FragmentSurface:
    return parse_obj(Path(path).read_text())


def parse_obj(text) -> FragmentSurface:
    """Parse the ``v``/``f`` subset of Wavefront OBJ.

    Polygonal faces are fan triangulated; other record types are ignored.
    """
    verts, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                verts.append([float(c) for c in parts[1:4]])
                if len(verts[-1]) != 3:
                    raise ValueError("vertex needs 3 coordinates")
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    i = int(tok.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise ValueError("face needs at least 3 vertices")
                faces += [[idx[0], idx[j], idx[j + 1]] for j in range(1, len(idx) - 1)]
        except ValueError as exc:
            raise MeshFormatError(f"line {lineno}: {exc}") from None
    if not verts or not faces:
        raise MeshFormatError("mesh has no vertices or no faces")
    try:
        return FragmentSurface(np.array(verts), np.array(faces))
    except ValueError as exc:
        raise MeshFormatError(str(exc)) from None


def _points_attr(pts):
    return " ".join(f"{fmt(x)},{fmt(y)}" for x, y in pts)


def _svg_root(lo, hi, margin):
    span = float(max(hi - lo)) or 1.0
    pad = margin * span
    vb = (lo[0] - pad, lo[1] - pad, hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad)
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="{_SVG_NS}" version="1.1" viewBox="{" ".join(fmt(v) for v in vb)}">\n'
    )
    return head, span


def fragment_svg(f, label=None):
    """SVG 1.1 document with the fragment as a single ``<polygon>``."""
    f = np.asarray(f, dtype=float)
    head, span = _svg_root(f.min(axis=0), f.max(axis=0), 0.05)
    body = ""
    if label:
        body += f"  <desc>{label}</desc>\n"
    body += (
        f'  <polygon points="{_points_attr(f)}" fill="#b0c4de" stroke="#203040" '
        f'stroke-width="{fmt(0.01 * span)}"/>\n'
    )
    return head + body + "</svg>\n"


def isometric(points):
    """Fixed isometric camera: 3D cube coordinates to 2D drawing coordinates (y down)."""
    p = np.asarray(points, dtype=float)
    c30, s30 = math.cos(math.pi / 6), 0.5
    u = (p[..., 0] - p[..., 1]) * c30
    v = p[..., 2] - (p[..., 0] + p[..., 1]) * s30
    return np.stack([u, -v], axis=-1)


def scene_svg(scene, label=None):
    """Cube wireframe as line paths plus the highlighted facet polygon."""
    edges2 = isometric(scene.edges)
    facet2 = isometric(scene.facet.vertices)
    allp = np.vstack([edges2.reshape(-1, 2), facet2])
    head, span = _svg_root(allp.min(axis=0), allp.max(axis=0), 0.05)
    sw = fmt(0.01 * span)
    body = ""
    if label:
        body += f"  <desc>{label}</desc>\n"
    body += (
        f'  <polygon points="{_points_attr(facet2)}" fill="#e07050" fill-opacity="0.6" '
        f'stroke="#802010" stroke-width="{sw}"/>\n'
    )
    for (a, b) in edges2:
        body += (
            f'  <path d="M {fmt(a[0])} {fmt(a[1])} L {fmt(b[0])} {fmt(b[1])}" '
            f'stroke="#000000" fill="none" stroke-width="{sw}"/>\n'
        )
    return head + body + "</svg>\n"


def _parse_points(attr):
    nums = [float(t) for t in attr.replace(",", " ").split()]
    if len(nums) % 2:
        raise DegeneratePolygon("odd number of coordinates in polygon points")
    return np.array(nums).reshape(-1, 2)


def read_fragment(path):
    """Load a 2D fragment from an SVG ``<polygon>``, a JSON list or an ``x y`` text list."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("<"):
        root = ET.fromstring(text)
        for el in root.iter():
            if el.tag.rsplit("}", 1)[-1] == "polygon" and el.get("points"):
                return _parse_points(el.get("points"))
        raise DegeneratePolygon(f"no <polygon> in {path}")
    if stripped.startswith("["):
        return np.array(json.loads(text), dtype=float)
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].replace(",", " ").split()
        if line:
            rows.append([float(c) for c in line[:2]])
    return np.array(rows, dtype=float)
