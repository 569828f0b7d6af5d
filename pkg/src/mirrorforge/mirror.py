"""Concrete mirror surfaces and mesh export.

A surface is a height graph x = x_offset + f(y, z) over a rectangular
footprint.  Two representations exist: polynomial coefficients and a node
grid with bilinear interpolation.  The composite surface stacks the central
half of a strip mirror with its reflection across the strip's top edge,
turning the wide strip into a frame-filling near-4:3 rectangle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError
from .projection import DomainRect

HALF_PI = 0.5 * math.pi


def _wrap_angle(a):
    """Wrap to (-pi, pi]."""
    w = np.remainder(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass(frozen=True)
class PolySurface:
    """Polynomial height graph; coeff_matrix[i, j] multiplies y^i z^j."""

    coeff_matrix: np.ndarray
    footprint: DomainRect
    x_offset: float = 0.0

    def height(self, y, z):
        return np.polynomial.polynomial.polyval2d(
            np.asarray(y, dtype=float), np.asarray(z, dtype=float), self.coeff_matrix
        )

    def gradient(self, y, z):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        cy = np.polynomial.polynomial.polyder(self.coeff_matrix, axis=0)
        cz = np.polynomial.polynomial.polyder(self.coeff_matrix, axis=1)
        return (
            np.polynomial.polynomial.polyval2d(y, z, cy),
            np.polynomial.polynomial.polyval2d(y, z, cz),
        )

    def prescribed_target(self, y, z):
        """(azimuth, elevation) the design assigns to the image point (y, z)."""
        return np.asarray(y, dtype=float), np.arctan(np.asarray(z, dtype=float))


def surface_from_coefficients(degree, exponents, coefficients, footprint, x_offset=0.0) -> PolySurface:
    c = np.zeros((degree + 1, degree + 1))
    for (i, j), v in zip(exponents, coefficients):
        c[i, j] = v
    return PolySurface(coeff_matrix=c, footprint=footprint, x_offset=x_offset)


def surface_from_fit(result, x_offset=0.0) -> PolySurface:
    """Build the mirror a fit describes; the fit's domain becomes the footprint."""
    return surface_from_coefficients(
        result.basis.degree, result.basis.exponents, result.coefficients, result.domain, x_offset
    )


@dataclass(frozen=True)
class GridSurface:
    """Node-grid height graph with bilinear interpolation between nodes."""

    y_nodes: np.ndarray
    z_nodes: np.ndarray
    values: np.ndarray  # shape (len(y_nodes), len(z_nodes))
    x_offset: float = 0.0

    @property
    def footprint(self) -> DomainRect:
        return DomainRect(
            float(self.y_nodes[0]), float(self.y_nodes[-1]), float(self.z_nodes[0]), float(self.z_nodes[-1])
        )

    def _locate(self, y, z):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        iy = np.clip(np.searchsorted(self.y_nodes, y, side="right") - 1, 0, self.y_nodes.size - 2)
        iz = np.clip(np.searchsorted(self.z_nodes, z, side="right") - 1, 0, self.z_nodes.size - 2)
        hy = self.y_nodes[iy + 1] - self.y_nodes[iy]
        hz = self.z_nodes[iz + 1] - self.z_nodes[iz]
        ty = (y - self.y_nodes[iy]) / hy
        tz = (z - self.z_nodes[iz]) / hz
        return iy, iz, ty, tz, hy, hz

    def height(self, y, z):
        iy, iz, ty, tz, _, _ = self._locate(y, z)
        v = self.values
        return (
            v[iy, iz] * (1 - ty) * (1 - tz)
            + v[iy + 1, iz] * ty * (1 - tz)
            + v[iy, iz + 1] * (1 - ty) * tz
            + v[iy + 1, iz + 1] * ty * tz
        )

    def gradient(self, y, z):
        # difference quotients of the node values across the containing cell
        iy, iz, ty, tz, hy, hz = self._locate(y, z)
        v = self.values
        fy = ((v[iy + 1, iz] - v[iy, iz]) * (1 - tz) + (v[iy + 1, iz + 1] - v[iy, iz + 1]) * tz) / hy
        fz = ((v[iy, iz + 1] - v[iy, iz]) * (1 - ty) + (v[iy + 1, iz + 1] - v[iy + 1, iz]) * ty) / hz
        return fy, fz

    def prescribed_target(self, y, z):
        return np.asarray(y, dtype=float), np.arctan(np.asarray(z, dtype=float))


def surface_from_grid(result, x_offset=0.0) -> GridSurface:
    """Wrap a grid fit (e.g. the Poisson route) as a renderable surface."""
    return GridSurface(
        y_nodes=np.asarray(result.y_nodes, dtype=float),
        z_nodes=np.asarray(result.z_nodes, dtype=float),
        values=np.asarray(result.values, dtype=float),
        x_offset=x_offset,
    )


@dataclass(frozen=True)
class CompositeSurface:
    """Central half-strip of a base mirror plus its reflection across z = seam.

    The lower half (z <= seam) is the base restricted to |y| <= pi/2; the
    upper half is its geometric reflection across the plane z = seam, so
    heights agree at the seam by construction.  The reflected half images
    the rear 180 degrees of azimuth with reversed orientation.
    """

    base: object
    seam: float
    footprint: DomainRect = dataclass_field(init=False)

    def __post_init__(self):
        fp = self.base.footprint
        object.__setattr__(
            self, "footprint", DomainRect(-HALF_PI, HALF_PI, fp.z0, 2.0 * self.seam - fp.z0)
        )

    @property
    def x_offset(self) -> float:
        return self.base.x_offset

    def _fold(self, z):
        z = np.asarray(z, dtype=float)
        upper = z > self.seam
        return np.where(upper, 2.0 * self.seam - z, z), upper

    def height(self, y, z):
        zf, _ = self._fold(z)
        return self.base.height(y, zf)

    def gradient(self, y, z):
        zf, upper = self._fold(z)
        fy, fz = self.base.gradient(y, zf)
        return fy, np.where(upper, -fz, fz)

    def prescribed_target(self, y, z):
        y = np.asarray(y, dtype=float)
        zf, upper = self._fold(z)
        azimuth = np.where(upper, _wrap_angle(np.pi - y), y)
        return azimuth, np.arctan(zf)


def make_conquistador(base) -> CompositeSurface:
    """Two-piece frame-filling mirror from a panoramic strip mirror."""
    fp = base.footprint
    if fp.y0 > -HALF_PI + 1e-12 or fp.y1 < HALF_PI - 1e-12:
        raise DomainError(
            f"base footprint y in [{fp.y0}, {fp.y1}] must cover [-pi/2, pi/2] to build the composite"
        )
    return CompositeSurface(base=base, seam=fp.z1)


def surface_normal(surface, y, z):
    """Un-normalized graph normal (1, -f_y, -f_z), oriented toward the camera."""
    inside = surface.footprint.contains(y, z)
    if not np.all(inside):
        raise DomainError("point outside the mirror footprint")
    fy, fz = surface.gradient(y, z)
    fy = np.asarray(fy, dtype=float)
    return np.stack([np.ones_like(fy), -fy, -np.asarray(fz, dtype=float)], axis=-1)


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh; faces index vertices 0-based (exported 1-based)."""

    vertices: np.ndarray  # (n, 3)
    faces: np.ndarray  # (m, 3) int


def tessellate(surface, ny: int, nz: int) -> Mesh:
    """Regular graph tessellation: (ny+1)(nz+1) vertices, 2*ny*nz triangles.

    Winding is chosen so every face normal has positive x component, which
    holds for any graph because faces project one-to-one onto the footprint.
    """
    if ny < 1 or nz < 1:
        raise DomainError(f"tessellation needs at least a 1 x 1 cell grid, got {ny} x {nz}")
    fp = surface.footprint
    ys = np.linspace(fp.y0, fp.y1, ny + 1)
    zs = np.linspace(fp.z0, fp.z1, nz + 1)
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    xx = surface.x_offset + surface.height(yy, zz)
    vertices = np.stack([xx, yy, zz], axis=-1).reshape(-1, 3)

    idx = np.arange((ny + 1) * (nz + 1)).reshape(ny + 1, nz + 1)
    v00 = idx[:-1, :-1].ravel()
    v10 = idx[1:, :-1].ravel()
    v01 = idx[:-1, 1:].ravel()
    v11 = idx[1:, 1:].ravel()
    faces = np.empty((2 * ny * nz, 3), dtype=np.int64)
    faces[0::2] = np.stack([v00, v10, v11], axis=1)
    faces[1::2] = np.stack([v00, v11, v01], axis=1)

    a = vertices[faces[:, 0]]
    cross = np.cross(vertices[faces[:, 1]] - a, vertices[faces[:, 2]] - a)
    area2 = np.linalg.norm(cross, axis=-1)
    if np.any(area2 <= 1e-12):
        raise DomainError("tessellation produced a degenerate face")
    if np.any(cross[:, 0] <= 0.0):
        raise DomainError("tessellation produced a face normal not facing the camera")
    return Mesh(vertices=vertices, faces=faces)


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def export_obj(mesh: Mesh, path) -> None:
    """ASCII Wavefront OBJ: v lines then f lines, LF endings, no normals/UVs.

    Output bytes are a pure function of the mesh.
    """
    lines = [f"v {_format_float(p[0])} {_format_float(p[1])} {_format_float(p[2])}" for p in mesh.vertices]
    lines += [f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}" for f in mesh.faces]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_obj(path) -> Mesh:
    """Parse the OBJ subset written by export_obj."""
    vertices = []
    faces = []
    for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if parts[0] == "v" and len(parts) == 4:
            try:
                vertices.append([float(t) for t in parts[1:]])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: malformed vertex {line!r}") from None
        elif parts[0] == "f" and len(parts) == 4:
            try:
                faces.append([int(t) - 1 for t in parts[1:]])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: malformed face {line!r}") from None
        else:
            raise FormatError(f"{path}: line {lineno}: unsupported OBJ line {line!r}")
    v = np.asarray(vertices, dtype=float).reshape(-1, 3)
    f = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if f.size and (f.min() < 0 or f.max() >= len(v)):
        raise FormatError(f"{path}: face index out of range")
    return Mesh(vertices=v, faces=f)
