"""Miller-index latent reasoning about idealized fracture geometry."""

__version__ = "0.1.0"

from .miller import (  # noqa: E402
    Intercepts,
    MillerIndex,
    PlaneFamily,
    canonicalize,
    enumerate_families,
    family_of,
    from_intercepts,
    parse_family,
    parse_index,
)
from .slicing import CutPlane, Polygon3, plane_patch_mesh, slice_cube  # noqa: E402
from .shape import ShapeClass, classify, match, project, signature  # noqa: E402
from .latent import check_consistency, infer_latent, qualitative_axes  # noqa: E402
from .regime import FragmentSurface, Mode, assess, fit_plane, segment_planes  # noqa: E402

__all__ = [
    "Intercepts",
    "MillerIndex",
    "PlaneFamily",
    "canonicalize",
    "enumerate_families",
    "family_of",
    "from_intercepts",
    "parse_family",
    "parse_index",
    "CutPlane",
    "Polygon3",
    "plane_patch_mesh",
    "slice_cube",
    "ShapeClass",
    "classify",
    "match",
    "project",
    "signature",
    "check_consistency",
    "infer_latent",
    "qualitative_axes",
    "FragmentSurface",
    "Mode",
    "assess",
    "fit_plane",
    "segment_planes",
]
