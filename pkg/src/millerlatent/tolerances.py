"""Tolerance profiles.

Two profiles are shared across modules: ``exact`` for clean synthetic
geometry and ``jittered`` for fragments with vertex noise.
"""
from dataclasses import dataclass

# vertex dedup distance used by the cube slicer
EPS_MERGE = 1e-9
# on-plane residual bounds
EPS_PLANE_EXACT = 1e-9
EPS_PLANE_FLOAT = 1e-7


@dataclass(frozen=True)
class ToleranceProfile:
    name: str
    match: float        # signature distance for a shape match
    angle: float        # radians, classification angle band
    edge: float         # relative edge-length band for classification
    consistency: float  # fragment/plane residual threshold


EXACT = ToleranceProfile("exact", match=1e-6, angle=1e-6, edge=1e-6, consistency=1e-6)
JITTERED = ToleranceProfile("jittered", match=0.02, angle=0.02, edge=0.02, consistency=0.02)

PROFILES = {p.name: p for p in (EXACT, JITTERED)}


def get_profile(name):
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown tolerance profile {name!r}; expected one of {sorted(PROFILES)}") from None
