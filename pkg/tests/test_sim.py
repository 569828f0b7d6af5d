import hashlib
import math

import numpy as np
import pytest

import mirrorforge as mf
from mirrorforge.errors import DomainError, SolverError

import baselines


def flat_mirror():
    c = np.zeros((2, 2))
    return mf.PolySurface(c, mf.DomainRect(-1.0, 1.0, -1.0, 1.0))


# --- induced map -----------------------------------------------------------------


def test_flat_mirror_retroreflects_to_miss(scene100):
    sample = mf.induced_map(flat_mirror(), 0.3, 0.2, scene100)
    assert not sample.hit
    assert np.allclose(sample.direction, [1, 0, 0], atol=1e-15)
    assert sample.miss_reason == "reflected ray parallel to the scene axis"


def test_induced_map_outside_footprint(scene100):
    with pytest.raises(DomainError):
        mf.induced_map(flat_mirror(), 3.0, 0.0, scene100)


def test_induced_map_on_symmetry_line(surface8, scene100):
    for z in (-0.4, 0.0, 0.35):
        sample = mf.induced_map(surface8, 0.0, z, scene100)
        assert sample.hit
        assert abs(sample.azimuth) < 1e-9


def test_induced_map_hits_design_azimuth(surface8, scene100):
    sample = mf.induced_map(surface8, 1.0, 0.0, scene100)
    assert sample.hit
    assert abs(sample.azimuth - 1.0) < baselines.DELTA_AZ
    assert sample.target_azimuth == pytest.approx(1.0)
    assert sample.target_elevation == pytest.approx(0.0)


def test_induced_map_records_mirror_point(surface8, scene100):
    sample = mf.induced_map(surface8, 0.7, 0.1, scene100)
    assert sample.mirror_point[1] == pytest.approx(0.7)
    assert sample.mirror_point[2] == pytest.approx(0.1)
    assert sample.mirror_point[0] == pytest.approx(float(surface8.height(0.7, 0.1)))


# --- scoring ----------------------------------------------------------------------


def test_exact_mirror_scores_zero(radial_exact_surface):
    report = mf.score_projection(radial_exact_surface, mf.Scene(radius=50.0), 10, 10)
    assert report.azimuth_max < 1e-9
    assert report.elevation_max < 1e-9
    assert report.miss_fraction == 0.0


def test_score_rejects_small_grid(surface8, scene100):
    with pytest.raises(DomainError):
        mf.score_projection(surface8, scene100, 8, 8)


def test_all_miss_scoring_is_an_error(scene100):
    with pytest.raises(SolverError):
        mf.score_projection(flat_mirror(), scene100, 10, 10)


def test_degree8_matches_frozen_baselines(surface8, scene100):
    report = mf.score_projection(surface8, scene100, 100, 40)
    assert report.miss_fraction == 0.0
    assert abs(report.azimuth_rms - baselines.AZ_RMS_D8) < 0.10 * baselines.AZ_RMS_D8
    assert abs(report.elevation_rms - baselines.EL_RMS_D8) < 0.10 * baselines.EL_RMS_D8


def test_degree8_beats_degree4(surface8, surface4, scene100):
    high = mf.score_projection(surface8, scene100, 100, 40)
    low = mf.score_projection(surface4, scene100, 100, 40)
    assert high.azimuth_rms < low.azimuth_rms
    assert high.elevation_rms < low.elevation_rms


def test_trace_azimuth_is_odd_in_y(surface8, scene100):
    report = mf.score_projection(surface8, scene100, 40, 12)
    theta = report.azimuth.reshape(40, 12)
    assert np.max(np.abs(theta + theta[::-1, :])) < 1e-9


def test_equatorial_elevation_small(surface8, scene100):
    ys = np.linspace(-3.1, 3.1, 61)
    from mirrorforge.sim import _trace

    _, dirs, hit, _, _ = _trace(surface8, ys, np.zeros_like(ys), scene100)
    assert np.all(hit)
    elevation = np.arctan2(dirs[..., 0], np.hypot(dirs[..., 1], dirs[..., 2]))
    assert np.max(np.abs(elevation)) < baselines.DELTA_EL


def test_score_radius_insensitive(surface8, panoramic):
    extent = math.hypot(panoramic.y1, panoramic.z1)
    near = mf.score_projection(surface8, mf.Scene(radius=10 * extent), 100, 40)
    far = mf.score_projection(surface8, mf.Scene(radius=1000 * extent), 100, 40)
    assert abs(near.azimuth_rms - far.azimuth_rms) < 0.20 * far.azimuth_rms


def test_report_text_and_csv(surface8, scene100, tmp_path):
    report = mf.score_projection(surface8, scene100, 20, 10)
    text = report.to_text()
    assert text.startswith("samples = 200\n")
    assert "azimuth_rms = " in text and "miss_fraction = " in text

    csv_path = tmp_path / "rows.csv"
    report.write_csv(csv_path)
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "y,z,theta,x_hit,az_err,el_err,miss"
    assert len(rows) == 201
    assert rows[1].endswith(",0")


# --- rendering ---------------------------------------------------------------------


def test_uniform_texture_renders_uniformly(surface8):
    scene = mf.Scene(radius=100.0, color_a=(9, 9, 9), color_b=(9, 9, 9))
    result = mf.render_panorama(surface8, scene, 64, 32)
    assert result.miss_fraction == 0.0
    assert np.all(result.pixels == 9)


def test_flat_mirror_renders_background():
    scene = mf.Scene(radius=10.0)
    result = mf.render_panorama(flat_mirror(), scene, 16, 8)
    assert result.miss_fraction == 1.0
    assert np.all(result.pixels == np.array(scene.background, dtype=np.uint8))


def test_render_is_deterministic_across_threads(surface8, scene100):
    one = mf.render_panorama(surface8, scene100, 160, 120, threads=1)
    many = mf.render_panorama(surface8, scene100, 160, 120, threads=7)
    assert np.array_equal(one.pixels, many.pixels)
    assert one.miss_fraction == many.miss_fraction


def test_render_golden_checksums(surface8, scene100, tmp_path):
    strip = mf.render_panorama(surface8, scene100, 640, 480)
    assert strip.miss_fraction == 0.0
    path = tmp_path / "strip.ppm"
    mf.write_ppm(strip.pixels, path)
    assert hashlib.sha256(path.read_bytes()).hexdigest() == baselines.STRIP_PPM_SHA256

    conq = mf.render_panorama(mf.make_conquistador(surface8), scene100, 640, 480)
    assert conq.miss_fraction == 0.0
    path2 = tmp_path / "conq.ppm"
    mf.write_ppm(conq.pixels, path2)
    assert hashlib.sha256(path2.read_bytes()).hexdigest() == baselines.CONQ_PPM_SHA256


def test_scene_axial_extent_cuts_the_cylinder(surface8):
    bounded = mf.Scene(radius=100.0, axial_extent=10.0)
    result = mf.render_panorama(surface8, bounded, 64, 48)
    assert 0.0 < result.miss_fraction < 1.0


def test_ppm_layout(tmp_path):
    pixels = np.zeros((2, 3, 3), dtype=np.uint8)
    pixels[0, 0] = (1, 2, 3)
    path = tmp_path / "t.ppm"
    mf.write_ppm(pixels, path)
    data = path.read_bytes()
    assert data.startswith(b"P6\n3 2\n255\n")
    assert len(data) == len(b"P6\n3 2\n255\n") + 18
    assert data[11:14] == bytes((1, 2, 3))


def test_ppm_rejects_bad_array(tmp_path):
    with pytest.raises(DomainError):
        mf.write_ppm(np.zeros((4, 4), dtype=np.uint8), tmp_path / "x.ppm")


def test_render_row_zero_is_top(surface8, scene100):
    # paint by elevation sign: top half of the frame looks up (positive z)
    result = mf.render_panorama(surface8, scene100, 8, 8)
    fp = surface8.footprint
    z_top = fp.z1 - 0.5 * fp.height / 8
    sample = mf.induced_map(surface8, fp.y0 + 0.5 * fp.width / 8, z_top, scene100)
    parity = (
        math.floor(sample.azimuth / scene100.checker_azimuth)
        + math.floor(sample.axial / scene100.checker_axial)
    ) & 1
    expected = scene100.color_a if parity == 0 else scene100.color_b
    assert tuple(result.pixels[0, 0]) == expected


# --- frame arithmetic -----------------------------------------------------------------


def test_pixel_gain_for_video_frame():
    gain = mf.pixel_gain_ratio(640, 480)
    assert gain == pytest.approx(0.6977, abs=5e-5)
    assert round(100 * gain, 2) == 69.77


def test_pixel_gain_square_frame():
    assert mf.pixel_gain_ratio(512, 512) == pytest.approx(4 / math.pi - 1, abs=1e-12)


def test_pixel_gain_grows_with_aspect():
    gains = [mf.pixel_gain_ratio(640, h) for h in (640, 1280, 2560, 5120)]
    assert all(b > a for a, b in zip(gains, gains[1:]))


def test_pixel_gain_rejects_empty_frame():
    with pytest.raises(DomainError):
        mf.pixel_gain_ratio(0, 480)


def test_threads_env_parsing(monkeypatch):
    from mirrorforge.sim import resolve_threads

    monkeypatch.delenv("MIRRORFORGE_THREADS", raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv("MIRRORFORGE_THREADS", "3")
    assert resolve_threads() == 3
    monkeypatch.setenv("MIRRORFORGE_THREADS", "0")
    assert resolve_threads() >= 1
    monkeypatch.setenv("MIRRORFORGE_THREADS", "junk")
    with pytest.raises(DomainError):
        resolve_threads()
