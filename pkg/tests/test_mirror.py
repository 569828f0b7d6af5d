import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import mirrorforge as mf
from mirrorforge.errors import DomainError, FormatError

SQUARE = mf.DomainRect(-1.0, 1.0, -1.0, 1.0)


def poly_surface(entries, footprint=SQUARE, x_offset=0.0, degree=None):
    d = degree if degree is not None else max(i + j for i, j in entries)
    c = np.zeros((d + 1, d + 1))
    for (i, j), v in entries.items():
        c[i, j] = v
    return mf.PolySurface(c, footprint, x_offset)


# --- normals ------------------------------------------------------------------


def test_flat_surface_normal():
    flat = poly_surface({(1, 0): 0.0}, degree=1)
    assert np.allclose(mf.surface_normal(flat, 0.3, -0.4), [1, 0, 0], atol=1e-15)


def test_paraboloid_normal():
    bowl = poly_surface({(2, 0): 1.0, (0, 2): 1.0})
    assert np.allclose(mf.surface_normal(bowl, 1.0, 0.0), [1, -2, 0], atol=1e-14)


def test_normal_outside_footprint_raises():
    flat = poly_surface({(1, 0): 0.0}, degree=1)
    with pytest.raises(DomainError):
        mf.surface_normal(flat, 2.0, 0.0)


def test_fitted_normals_track_the_field(surface8, fit8, limit_field, panoramic):
    rng = np.random.default_rng(7)
    y = rng.uniform(panoramic.y0, panoramic.y1, 400)
    z = rng.uniform(panoramic.z0, panoramic.z1, 400)
    n = mf.surface_normal(surface8, y, z)
    w = limit_field(np.stack([np.zeros_like(y), y, z], axis=-1))
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    w /= np.linalg.norm(w, axis=-1, keepdims=True)
    cross = np.linalg.norm(np.cross(n, w), axis=-1)
    # no exact mirror exists, so perfect parallelism is impossible; the
    # misalignment is bounded by the residual objective of the fit
    assert float(cross.max()) < 10.0 * math.sqrt(fit8.objective / panoramic.area)


@given(y=st.floats(-3.1, 3.1), z=st.floats(-0.57, 0.57))
@settings(max_examples=60)
def test_polynomial_gradient_matches_central_difference(surface8, y, z):
    fy, fz = surface8.gradient(y, z)
    step = 1e-6
    fy_num = (surface8.height(y + step, z) - surface8.height(y - step, z)) / (2 * step)
    fz_num = (surface8.height(y, z + step) - surface8.height(y, z - step)) / (2 * step)
    assert fy == pytest.approx(fy_num, abs=1e-6)
    assert fz == pytest.approx(fz_num, abs=1e-6)


# --- grid surfaces ---------------------------------------------------------------


def test_grid_surface_interpolates_nodes():
    ys = np.linspace(-1, 1, 9)
    zs = np.linspace(-1, 1, 7)
    values = np.add.outer(ys**2, zs)
    grid = mf.GridSurface(ys, zs, values)
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    assert np.allclose(grid.height(yy, zz), values, atol=1e-14)


def test_grid_surface_gradient_of_bilinear_data():
    ys = np.linspace(0, 1, 5)
    zs = np.linspace(0, 2, 5)
    values = 3.0 * ys[:, None] + 0.5 * zs[None, :] + 2.0
    grid = mf.GridSurface(ys, zs, values)
    fy, fz = grid.gradient(0.4, 1.1)
    assert fy == pytest.approx(3.0, abs=1e-12)
    assert fz == pytest.approx(0.5, abs=1e-12)


def test_grid_surface_from_poisson(components, panoramic):
    result = mf.fit_poisson(components, panoramic, 16, 16)
    grid = mf.surface_from_grid(result)
    assert grid.footprint.width == pytest.approx(panoramic.width)
    assert np.isfinite(grid.height(0.1, 0.2))


# --- composite ("conquistador") ----------------------------------------------------


@pytest.fixture(scope="module")
def composite(surface8):
    return mf.make_conquistador(surface8)


def test_composite_footprint_proportions(composite):
    fp = composite.footprint
    assert fp.y0 == pytest.approx(-math.pi / 2)
    assert fp.y1 == pytest.approx(math.pi / 2)
    aspect = fp.width / fp.height
    assert aspect == pytest.approx(math.pi / (4 * math.tan(math.radians(30))), abs=1e-12)
    assert abs(aspect - 4.0 / 3.0) / (4.0 / 3.0) < 0.03


def test_composite_seam_continuity(composite, surface8):
    seam = composite.seam
    y = np.linspace(-1.5, 1.5, 11)
    eps = 1e-9
    below = composite.height(y, np.full_like(y, seam - eps))
    above = composite.height(y, np.full_like(y, seam + eps))
    assert np.max(np.abs(above - below)) < 1e-7


def test_composite_mirrors_the_base(composite, surface8):
    seam = composite.seam
    for t in np.linspace(0.0, composite.footprint.z1 - seam, 7):
        upper = composite.height(0.8, seam + t)
        lower = composite.height(0.8, seam - t)
        assert upper == pytest.approx(lower, abs=1e-14)
        assert composite.height(0.8, seam - t) == pytest.approx(
            surface8.height(0.8, seam - t), abs=1e-14
        )


def test_composite_gradient_flips_z_component(composite, surface8):
    seam = composite.seam
    fy0, fz0 = surface8.gradient(0.5, seam - 0.2)
    fy1, fz1 = composite.gradient(0.5, seam + 0.2)
    assert fy1 == pytest.approx(fy0, abs=1e-14)
    assert fz1 == pytest.approx(-fz0, abs=1e-14)


def test_composite_rear_half_target(composite):
    # the reflected half images the rear azimuths with reversed orientation
    az, el = composite.prescribed_target(0.4, composite.seam + 0.3)
    assert az == pytest.approx(math.pi - 0.4, abs=1e-12)
    assert el == pytest.approx(math.atan(composite.seam - 0.3), abs=1e-12)
    az_front, el_front = composite.prescribed_target(0.4, composite.seam - 0.3)
    assert az_front == pytest.approx(0.4, abs=1e-12)
    assert el_front == pytest.approx(math.atan(composite.seam - 0.3), abs=1e-12)


def test_composite_needs_wide_base():
    narrow = poly_surface({(1, 0): 0.1}, footprint=mf.DomainRect(-1.0, 1.0, -0.5, 0.5), degree=1)
    with pytest.raises(DomainError):
        mf.make_conquistador(narrow)


# --- tessellation -------------------------------------------------------------------


def test_tessellate_single_cell():
    flat = poly_surface({(1, 0): 0.0}, degree=1)
    mesh = mf.tessellate(flat, 1, 1)
    assert len(mesh.vertices) == 4
    assert len(mesh.faces) == 2


def test_tessellate_vertex_count_law(surface8):
    mesh = mf.tessellate(surface8, 32, 16)
    assert len(mesh.vertices) == 33 * 17 == 561
    assert len(mesh.faces) == 2 * 32 * 16 == 1024


def test_tessellate_rejects_empty_grid(surface8):
    with pytest.raises(DomainError):
        mf.tessellate(surface8, 0, 4)


def test_tessellation_is_watertight(surface8):
    mesh = mf.tessellate(surface8, 12, 5)
    edges = Counter()
    for a, b, c in mesh.faces:
        for u, v in ((a, b), (b, c), (c, a)):
            edges[frozenset((int(u), int(v)))] += 1
    counts = Counter(edges.values())
    # interior edges shared by exactly two faces, boundary edges by one
    assert set(counts) == {1, 2}
    assert counts[1] == 2 * (12 + 5)


def test_tessellation_faces_point_toward_camera(surface8):
    mesh = mf.tessellate(surface8, 24, 8)
    a = mesh.vertices[mesh.faces[:, 0]]
    cross = np.cross(mesh.vertices[mesh.faces[:, 1]] - a, mesh.vertices[mesh.faces[:, 2]] - a)
    assert np.all(cross[:, 0] > 0)


# --- OBJ export -----------------------------------------------------------------------


def test_obj_unit_quad_is_six_lines(tmp_path):
    flat = poly_surface({(1, 0): 0.0}, footprint=mf.DomainRect(0.0, 1.0, 0.0, 1.0), degree=1)
    path = tmp_path / "quad.obj"
    mf.export_obj(mf.tessellate(flat, 1, 1), path)
    lines = path.read_text().splitlines()
    assert len(lines) == 6
    assert sum(1 for l in lines if l.startswith("v ")) == 4
    assert sum(1 for l in lines if l.startswith("f ")) == 2
    assert path.read_bytes().endswith(b"\n")
    assert b"\r" not in path.read_bytes()


def test_obj_export_is_deterministic(surface8, tmp_path):
    mesh = mf.tessellate(surface8, 16, 8)
    p1, p2 = tmp_path / "a.obj", tmp_path / "b.obj"
    mf.export_obj(mesh, p1)
    mf.export_obj(mesh, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_obj_round_trip_preserves_heights(surface8, tmp_path):
    mesh = mf.tessellate(surface8, 16, 8)
    path = tmp_path / "m.obj"
    mf.export_obj(mesh, path)
    back = mf.read_obj(path)
    assert np.array_equal(back.faces, mesh.faces)
    assert np.array_equal(back.vertices, mesh.vertices)  # 17 significant digits round-trip
    heights = surface8.height(back.vertices[:, 1], back.vertices[:, 2])
    assert np.max(np.abs(heights - back.vertices[:, 0])) < 1e-12


def test_obj_reader_rejects_junk(tmp_path):
    path = tmp_path / "bad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nnot_a_line\n")
    with pytest.raises(FormatError, match="line 4"):
        mf.read_obj(path)
    path.write_text("v 0 0 0\nf 1 2 9\n")
    with pytest.raises(FormatError, match="out of range"):
        mf.read_obj(path)
