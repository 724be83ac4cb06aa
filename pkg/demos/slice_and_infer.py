"""Forward slicing and inverse inference on a few cube cross-sections.

Run with ``python3 demos/slice_and_infer.py``.
"""
from fractions import Fraction

from millerlatent.latent import check_consistency, infer_latent
from millerlatent.shape import classify, project, similarity_transform
from millerlatent.slicing import CutPlane, slice_cube

# %% Forward: a plane and the unit cube give a convex polygon.
for hkl, d in [((1, 0, 0), Fraction(1, 2)), ((1, 1, 0), Fraction(1)), ((1, 1, 1), Fraction(1, 2)),
               ((1, 1, 1), Fraction(3, 2)), ((2, 1, 1), Fraction(3, 2))]:
    poly = slice_cube(CutPlane(hkl, d))
    print(f"{hkl} d={d}: {len(poly)} vertices, {classify(project(poly))}, area {poly.area:.4f}")

# %% Inverse: rotate, scale and mirror a section, then ask which family made it.
fragment = similarity_transform(project(slice_cube(CutPlane((1, 1, 1), 1.2))), angle=0.9, scale=3.0, reflect=True)
for h in infer_latent(fragment, max_index=2, top_k=3):
    print(f"  {h.family}  score={h.score:.2e}  d*={h.best_offset:.4f}")

# %% Rectangles are ambiguous: a {210} section is also reproduced exactly by {110}.
rect = project(slice_cube(CutPlane((2, 1, 0), 1.0)))
print("rectangle from (210):", [str(h.family) for h in infer_latent(rect, top_k=6) if h.score < 1e-9])

# %% Consistency: is this triangle a section of the shown plane?
tri = project(slice_cube(CutPlane((1, 1, 1), 0.5)))
for plane in (CutPlane((1, 1, 1), Fraction(1, 2)), CutPlane((1, 0, 0), Fraction(1, 2))):
    v = check_consistency(tri, plane)
    print(f"triangle vs {plane.normal} d={plane.offset}: consistent={v.consistent} residual={v.residual:.3g}")
