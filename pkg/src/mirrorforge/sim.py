"""Ray-traced validation of mirror shapes against the prescribed panorama.

The camera is orthographic along x, so the ray through image point (y, z)
meets a height graph exactly at (x_offset + f(y, z), y, z); it reflects off
the graph normal and is intersected with a textured scene cylinder.
Scoring is directional: both the achieved azimuth and the achieved
elevation are angles of the displacement from the mirror point to the
scene hit (equivalently, of the reflected direction), so the error metrics
do not depend on the scene radius, matching the far-field design target.
Raw hit coordinates (cylinder azimuth and axial position) are still
recorded per sample for texturing and CSV export.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, SolverError
from .geom import intersect_cylinder_batch, reflect

#: environment variable capping render parallelism; 0 means one worker per CPU
THREADS_ENV = "MIRRORFORGE_THREADS"


@dataclass(frozen=True)
class Scene:
    """Checkerboard-textured cylinder about the x-axis enclosing the mirror.

    Tile periods default to pi/8 of azimuth and the matching arc length
    axially, so tiles are square at the equator.  axial_extent, when set,
    bounds the textured region at |x| <= axial_extent; rays beyond it count
    as misses and render as background.
    """

    radius: float
    checker_azimuth: float = math.pi / 8.0
    checker_axial: float | None = None
    color_a: tuple[int, int, int] = (235, 235, 235)
    color_b: tuple[int, int, int] = (25, 25, 25)
    background: tuple[int, int, int] = (70, 110, 180)
    axial_extent: float | None = None

    def __post_init__(self):
        if self.radius <= 0.0:
            raise DomainError(f"scene radius must be positive, got {self.radius}")
        if self.checker_azimuth <= 0.0:
            raise DomainError("checker azimuth period must be positive")
        if self.checker_axial is None:
            object.__setattr__(self, "checker_axial", self.radius * math.tan(math.pi / 8.0))
        if self.checker_axial <= 0.0:
            raise DomainError("checker axial period must be positive")


def _trace(surface, y, z, scene: Scene):
    """Reflect the orthographic camera rays at (y, z) off the surface.

    Returns (origins, directions, hit, azimuth, axial); rays reflected
    parallel to the cylinder axis (or beyond axial_extent) are misses.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    fy, fz = surface.gradient(y, z)
    fy = np.asarray(fy, dtype=float)
    fz = np.asarray(fz, dtype=float)
    origins = np.stack([surface.x_offset + np.asarray(surface.height(y, z), dtype=float), y, z], axis=-1)
    normals = np.stack([np.ones_like(fy), -fy, -fz], axis=-1)
    incoming = np.broadcast_to(np.array([-1.0, 0.0, 0.0]), normals.shape)
    directions = reflect(incoming, normals)
    hit, azimuth, axial, _ = intersect_cylinder_batch(origins, directions, scene.radius)
    if scene.axial_extent is not None:
        hit = hit & (np.abs(np.where(hit, axial, 0.0)) <= scene.axial_extent)
    return origins, directions, hit, azimuth, axial


@dataclass(frozen=True)
class TraceSample:
    """One image point followed through the mirror into the scene."""

    y: float
    z: float
    mirror_point: np.ndarray
    direction: np.ndarray
    hit: bool
    azimuth: float | None
    axial: float | None
    target_azimuth: float
    target_elevation: float
    miss_reason: str | None = None


def induced_map(surface, y: float, z: float, scene: Scene) -> TraceSample:
    """Scene point actually imaged at (y, z), with the design target alongside."""
    if not bool(np.all(surface.footprint.contains(y, z))):
        raise DomainError(f"image point ({y}, {z}) lies outside the mirror footprint")
    origins, directions, hit, azimuth, axial = _trace(surface, y, z, scene)
    taz, tel = surface.prescribed_target(y, z)
    got_hit = bool(hit)
    reason = None
    if not got_hit:
        lateral = math.hypot(float(directions[1]), float(directions[2]))
        reason = "reflected ray parallel to the scene axis" if lateral < 1e-12 else "no cylinder hit"
    return TraceSample(
        y=float(y),
        z=float(z),
        mirror_point=origins,
        direction=directions,
        hit=got_hit,
        azimuth=float(azimuth) if got_hit else None,
        axial=float(axial) if got_hit else None,
        target_azimuth=float(taz),
        target_elevation=float(tel),
        miss_reason=reason,
    )


def _wrap_angle(a):
    w = np.remainder(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass(frozen=True)
class TraceReport:
    """Aggregate projection errors over a sample grid.

    Angle metrics are radians and cover hit samples only; the miss fraction
    is reported separately.  Per-sample arrays keep the full trace for CSV
    export.
    """

    n_samples: int
    n_hits: int
    miss_fraction: float
    azimuth_rms: float
    azimuth_max: float
    elevation_rms: float
    elevation_max: float
    y: np.ndarray
    z: np.ndarray
    azimuth: np.ndarray
    axial: np.ndarray
    azimuth_error: np.ndarray
    elevation_error: np.ndarray
    hit: np.ndarray

    def to_text(self) -> str:
        lines = [
            f"samples = {self.n_samples}",
            f"hits = {self.n_hits}",
            f"miss_fraction = {self.miss_fraction!r}",
            f"azimuth_rms = {self.azimuth_rms!r}",
            f"azimuth_max = {self.azimuth_max!r}",
            f"elevation_rms = {self.elevation_rms!r}",
            f"elevation_max = {self.elevation_max!r}",
        ]
        return "\n".join(lines) + "\n"

    def write_text(self, path) -> None:
        Path(path).write_bytes(self.to_text().encode("ascii"))

    def write_csv(self, path) -> None:
        rows = ["y,z,theta,x_hit,az_err,el_err,miss"]
        for k in range(self.n_samples):
            if self.hit[k]:
                rows.append(
                    f"{self.y[k]!r},{self.z[k]!r},{self.azimuth[k]!r},{self.axial[k]!r},"
                    f"{self.azimuth_error[k]!r},{self.elevation_error[k]!r},0"
                )
            else:
                rows.append(f"{self.y[k]!r},{self.z[k]!r},,,,,1")
        Path(path).write_bytes(("\n".join(rows) + "\n").encode("ascii"))


def score_projection(surface, scene: Scene, ny: int = 100, nz: int = 40) -> TraceReport:
    """Projection fidelity over an ny x nz cell-center grid on the footprint.

    Achieved angles are those of the reflected direction: azimuth
    atan2(v_y, v_z) and elevation atan2(v_x, |v lateral|).  Errors are
    computed over hit samples only.
    """
    if ny < 10 or nz < 10:
        raise DomainError(f"score grid must be at least 10 x 10, got {ny} x {nz}")
    fp = surface.footprint
    ys = fp.y0 + (np.arange(ny) + 0.5) * (fp.width / ny)
    zs = fp.z0 + (np.arange(nz) + 0.5) * (fp.height / nz)
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    _, directions, hit, azimuth, axial = _trace(surface, yy, zz, scene)
    taz, tel = surface.prescribed_target(yy, zz)

    lateral = np.hypot(directions[..., 1], directions[..., 2])
    direction_azimuth = np.arctan2(directions[..., 1], directions[..., 2])
    elevation = np.arctan2(directions[..., 0], lateral)
    az_err = np.where(hit, _wrap_angle(direction_azimuth - taz), np.nan)
    el_err = np.where(hit, elevation - tel, np.nan)

    n_samples = int(hit.size)
    n_hits = int(np.count_nonzero(hit))
    if n_hits == 0:
        raise SolverError("every sample missed the scene cylinder; nothing to score")
    az = az_err[hit]
    el = el_err[hit]
    return TraceReport(
        n_samples=n_samples,
        n_hits=n_hits,
        miss_fraction=1.0 - n_hits / n_samples,
        azimuth_rms=float(np.sqrt(np.mean(az * az))),
        azimuth_max=float(np.max(np.abs(az))),
        elevation_rms=float(np.sqrt(np.mean(el * el))),
        elevation_max=float(np.max(np.abs(el))),
        y=yy.ravel(),
        z=zz.ravel(),
        azimuth=np.where(hit, azimuth, np.nan).ravel(),
        axial=np.where(hit, axial, np.nan).ravel(),
        azimuth_error=az_err.ravel(),
        elevation_error=el_err.ravel(),
        hit=hit.ravel(),
    )


def resolve_threads(threads: int | None = None) -> int:
    """Worker count for rendering; the environment variable caps it (0 = auto)."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "")
        if raw == "":
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 0:
        raise DomainError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


@dataclass(frozen=True)
class RenderResult:
    pixels: np.ndarray  # (height, width, 3) uint8
    miss_fraction: float


def render_panorama(surface, scene: Scene, width: int = 640, height: int = 480, threads: int | None = None) -> RenderResult:
    """Per-pixel induced map over the footprint, colored by the scene texture.

    Pixel centers map affinely onto the footprint with row 0 at maximum z.
    The output is byte-deterministic and independent of the worker count:
    pixels are independent and each worker writes a disjoint row block.
    """
    if width < 1 or height < 1:
        raise DomainError(f"render size must be positive, got {width} x {height}")
    fp = surface.footprint
    ys = fp.y0 + (np.arange(width) + 0.5) * (fp.width / width)
    zs = fp.z1 - (np.arange(height) + 0.5) * (fp.height / height)
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    hits = np.empty((height, width), dtype=bool)

    color_a = np.array(scene.color_a, dtype=np.uint8)
    color_b = np.array(scene.color_b, dtype=np.uint8)
    background = np.array(scene.background, dtype=np.uint8)

    def run_rows(r0: int, r1: int) -> None:
        zz, yy = np.meshgrid(zs[r0:r1], ys, indexing="ij")
        _, _, hit, azimuth, axial = _trace(surface, yy, zz, scene)
        az = np.where(hit, azimuth, 0.0)
        ax = np.where(hit, axial, 0.0)
        parity = (
            np.floor(az / scene.checker_azimuth).astype(np.int64)
            + np.floor(ax / scene.checker_axial).astype(np.int64)
        ) & 1
        block = np.where((parity == 0)[..., None], color_a, color_b)
        pixels[r0:r1] = np.where(hit[..., None], block, background)
        hits[r0:r1] = hit

    n_workers = resolve_threads(threads)
    if n_workers <= 1 or height == 1:
        run_rows(0, height)
    else:
        bounds = np.linspace(0, height, min(n_workers, height) + 1).astype(int)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(run_rows, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            for f in futures:
                f.result()
    return RenderResult(pixels=pixels, miss_fraction=1.0 - float(np.count_nonzero(hits)) / hits.size)


def pixel_gain_ratio(width: int, height: int) -> float:
    """Pixel-count gain of a full w x h frame over the inscribed disk.

    A rotationally symmetric mirror occupies at most the inscribed disk of
    the frame; a frame-filling mirror uses every pixel.
    """
    if width <= 0 or height <= 0:
        raise DomainError(f"frame size must be positive, got {width} x {height}")
    disk = math.pi * (min(width, height) / 2.0) ** 2
    return width * height / disk - 1.0


def write_ppm(pixels: np.ndarray, path) -> None:
    """Binary PPM (P6, maxval 255, LF-terminated header); bytes are deterministic."""
    a = np.asarray(pixels)
    if a.ndim != 3 or a.shape[2] != 3 or a.dtype != np.uint8:
        raise DomainError("PPM writer expects a (height, width, 3) uint8 array")
    height, width = a.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + a.tobytes())
