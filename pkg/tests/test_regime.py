import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from millerlatent.datagen import gen_nonplanar, gen_polycrystal
from millerlatent.errors import DegenerateCloud
from millerlatent.miller import MillerIndex, family_of
from millerlatent.regime import FragmentSurface, Mode, assess, fit_plane, segment_planes, snap_to_miller


def _grid(nx=8, ny=8, z=None):
    xs, ys = np.meshgrid(np.linspace(0, 1, nx + 1), np.linspace(0, 1, ny + 1), indexing="ij")
    zs = np.zeros_like(xs) if z is None else z(xs, ys)
    verts = np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])
    faces = []
    for i in range(nx):
        for j in range(ny):
            a, b = i * (ny + 1) + j, (i + 1) * (ny + 1) + j
            faces += [[a, b, b + 1], [a, b + 1, a + 1]]
    return FragmentSurface(verts, np.array(faces))


def test_fit_plane_exact():
    rng = np.random.default_rng(0)
    n = np.array([1.0, 2.0, 2.0]) / 3
    pts = rng.uniform(-1, 1, (50, 3))
    pts -= np.outer(pts @ n - 0.7, n)
    fit = fit_plane(pts)
    assert abs(fit.normal @ n) == pytest.approx(1.0, abs=1e-12)
    assert fit.offset == pytest.approx(0.7 * np.sign(fit.normal @ n))
    assert fit.rms_residual < 1e-12


def test_fit_plane_statistical_oracle():
    # noise of known sigma along the normal: rms residual -> sigma * sqrt((N-3)/N)
    rng = np.random.default_rng(1)
    sigma, N = 0.01, 20_000
    n = np.array([0.0, 0.6, 0.8])
    u, v = np.array([1.0, 0, 0]), np.array([0, 0.8, -0.6])
    pts = rng.uniform(-1, 1, (N, 1)) * u + rng.uniform(-1, 1, (N, 1)) * v + rng.normal(0, sigma, (N, 1)) * n
    fit = fit_plane(pts)
    assert fit.rms_residual == pytest.approx(sigma, rel=0.03)
    # angular error of the normal ~ sigma / (spread * sqrt(N)); allow a wide margin
    assert math.degrees(math.acos(min(1.0, abs(fit.normal @ n)))) < 0.05


def test_fit_plane_degenerate():
    with pytest.raises(DegenerateCloud):
        fit_plane([[0, 0, 0], [1, 1, 1], [2, 2, 2], [3, 3, 3]])
    with pytest.raises(DegenerateCloud):
        fit_plane([[0, 0, 0], [1, 0, 0]])


def test_surface_validation():
    with pytest.raises(ValueError):
        FragmentSurface(np.zeros((3, 3)), np.array([[0, 1, 2]]))
    with pytest.raises(ValueError):
        FragmentSurface(np.eye(3), np.array([[0, 1, 3]]))
    s = FragmentSurface.from_triangles([[[0, 0, 0], [1, 0, 0], [0, 1, 0]]])
    assert s.total_area == pytest.approx(0.5)
    assert s.diameter == pytest.approx(math.sqrt(2))


def test_flat_mesh_is_inference():
    v = assess(_grid())
    assert v.mode is Mode.INFERENCE and v.applicable
    assert len(v.fits) == 1 and v.fits[0].support_area == pytest.approx(1.0)


def test_two_faces_partial():
    # a folded sheet: two planes at 90 degrees
    s = _grid(12, 6, lambda x, y: np.where(x < 0.5, 0, x - 0.5))
    v = assess(s)
    assert v.mode is Mode.PARTIAL
    assert len(v.fits) == 2


def test_rippled_sheet_rejection():
    v = assess(_grid(24, 24, lambda x, y: 0.1 * np.sin(2 * math.pi * x / 0.5)))
    assert v.mode is Mode.REJECTION and not v.applicable


def test_cap_rejection_and_near_flat_cap_inference():
    assert assess(gen_nonplanar("SphericalCap", seed=3).surface).mode is Mode.REJECTION
    flat = gen_nonplanar("SphericalCap", seed=3, radius=1e3, cap_angle=1e-3).surface
    assert assess(flat).mode is Mode.INFERENCE


@pytest.mark.parametrize("n", [2, 5, 12])
def test_polycrystal_partial(n):
    s = gen_polycrystal(n, seed=10 + n)
    v = assess(s.surface)
    assert v.mode is Mode.PARTIAL and v.applicable


def test_single_grain_is_inference():
    assert assess(gen_polycrystal(1, seed=4).surface).mode is Mode.INFERENCE


def test_verdict_invariant_under_similarity():
    s = gen_polycrystal(4, seed=2).surface
    rot = Rotation.from_euler("xyz", [0.3, -1.1, 2.0]).as_matrix()
    base = assess(s)
    moved = assess(s.transformed(rot, scale=37.0, shift=(5, -3, 8)))
    assert base.mode is moved.mode
    assert [f.support_area for f in base.fits] == pytest.approx([f.support_area for f in moved.fits])


def test_segmentation_recovers_facet_families():
    s = gen_polycrystal(6, seed=21)
    fits = segment_planes(s.surface)
    truth = {f["family"] for f in s.truth["facets"]}
    snapped = {str(family_of(snap_to_miller(f.normal))) for f in fits if f.support_area > 0.02}
    assert snapped <= truth


def test_threshold_validation():
    with pytest.raises(ValueError):
        assess(_grid(), theta_single=0.1, theta_facet=0.5)


def test_snap_to_miller():
    assert snap_to_miller([1, 1, 0.001]) == MillerIndex(1, 1, 0)
    assert snap_to_miller([-1, 0, 0]) == MillerIndex(1, 0, 0)
    assert snap_to_miller([1, 0.3, 0.7]) is None


def test_triangle_soup_is_welded():
    quad = [[[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[1, 0, 0], [1, 1, 0], [0, 1, 0]]]
    v = assess(FragmentSurface.from_triangles(quad))
    assert v.mode is Mode.INFERENCE and v.fits[0].support_area == pytest.approx(1.0)
