"""Regime verdicts on single-plane, polycrystalline and curved surfaces.

Run with ``python3 demos/regimes.py``.
"""
from millerlatent.datagen import gen_nonplanar, gen_polycrystal
from millerlatent.regime import assess

cases = {
    "single grain": gen_polycrystal(1, seed=3),
    "6 grains": gen_polycrystal(6, seed=3),
    "spherical cap": gen_nonplanar("SphericalCap", seed=3),
    "rippled sheet": gen_nonplanar("RippledSheet", seed=3),
}

for name, sample in cases.items():
    v = assess(sample.surface)
    facets = ", ".join(f"{f.to_dict()['index'] or '?'}:{f.support_area:.2f}" for f in v.fits[:4])
    print(f"{name:14s} truth={sample.truth['regime']:9s} verdict={v.mode!s:9s} applicable={v.applicable}  {facets}")
