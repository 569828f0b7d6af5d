"""Prescribed camera-to-scene maps for the cylindrical panorama target.

The camera is orthographic along the x-axis; the scene target is a cylinder
about the same axis.  Image coordinates double as scene coordinates: the
image y coordinate equals the target azimuth in radians and the image z
coordinate equals the tangent of the target elevation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DomainError
from .geom import Vec3

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CameraModel:
    """Orthographic camera on the image plane x = plane_offset, looking down -x."""

    plane_offset: float = 2.0

    def __post_init__(self):
        if self.plane_offset <= 0.0:
            raise DomainError(f"image plane offset must be positive, got {self.plane_offset}")

    def image_point(self, r: Vec3) -> Vec3:
        """Image-plane point whose camera ray passes through r."""
        q = np.array(np.broadcast_to(np.asarray(r, dtype=float), np.shape(r)))
        q[..., 0] = self.plane_offset
        return q


@dataclass(frozen=True)
class ProjectionSpec:
    """Target cylinder about the x-axis.

    radius may be math.inf, selecting the far-field limit in which only ray
    directions (not scene points) are prescribed.
    """

    radius: float = math.inf

    def __post_init__(self):
        if not self.radius > 0.0:
            raise DomainError(f"target radius must be positive or inf, got {self.radius}")

    @property
    def is_limit(self) -> bool:
        return math.isinf(self.radius)


@dataclass(frozen=True)
class DomainRect:
    """Design rectangle in the image plane: [y0, y1] x [z0, z1].

    y is azimuth-like (radians), z is the tangent of elevation.
    """

    y0: float
    y1: float
    z0: float
    z1: float

    def __post_init__(self):
        if not (self.y1 > self.y0 and self.z1 > self.z0):
            raise DomainError(
                f"degenerate domain rectangle [{self.y0}, {self.y1}] x [{self.z0}, {self.z1}]"
            )

    @property
    def width(self) -> float:
        return self.y1 - self.y0

    @property
    def height(self) -> float:
        return self.z1 - self.z0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def y_center(self) -> float:
        return 0.5 * (self.y0 + self.y1)

    @property
    def z_center(self) -> float:
        return 0.5 * (self.z0 + self.z1)

    @property
    def is_panoramic(self) -> bool:
        """True when the strip wraps a full turn of azimuth."""
        return self.width >= TWO_PI - 1e-9

    def contains(self, y, z, pad: float = 1e-12):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        return (
            (y >= self.y0 - pad)
            & (y <= self.y1 + pad)
            & (z >= self.z0 - pad)
            & (z <= self.z1 + pad)
        )


def prescribed_map(q: Vec3, spec: ProjectionSpec) -> Vec3:
    """Scene point prescribed for the image point q = (c, y, z).

    Lands on the cylinder of radius rho at azimuth y and axial position
    rho * z.  Only defined for a finite target radius.
    """
    if spec.is_limit:
        raise DomainError("prescribed_map needs a finite target radius; use target_direction in the limit")
    q = np.asarray(q, dtype=float)
    y = q[..., 1]
    z = q[..., 2]
    rho = spec.radius
    return np.stack([rho * z, rho * np.sin(y), rho * np.cos(y)], axis=-1)


def target_direction(r: Vec3, spec: ProjectionSpec) -> Vec3:
    """Unit direction a ray leaving the mirror point r should travel.

    Finite radius: points from r at the prescribed scene point.  Limit:
    (z, sin y, cos y) / sqrt(1 + z^2), independent of the x component of r.
    """
    r = np.asarray(r, dtype=float)
    y = r[..., 1]
    z = r[..., 2]
    if spec.is_limit:
        s = 1.0 / np.sqrt(1.0 + z * z)
        return np.stack([z * s, np.sin(y) * s, np.cos(y) * s], axis=-1)
    rho = spec.radius
    s = np.stack([rho * z, rho * np.sin(y), rho * np.cos(y)], axis=-1)
    v = s - r
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise DegenerateGeometryError("mirror point coincides with its prescribed scene point")
    return v / n


def domain_for_vfov(half_angle_deg: float) -> tuple[float, float]:
    """z interval giving a symmetric vertical field of view of +-half_angle_deg.

    The limit direction at image height z has elevation arctan(z), so the
    interval is +-tan(half angle).
    """
    if not 0.0 < half_angle_deg < 90.0:
        raise DomainError(f"vertical half-angle must lie strictly between 0 and 90 degrees, got {half_angle_deg}")
    t = math.tan(math.radians(half_angle_deg))
    return (-t, t)


def panoramic_domain(half_angle_deg: float = 30.0, y_width: float = TWO_PI) -> DomainRect:
    """Design rectangle centered on azimuth 0 for the given FOV settings."""
    z0, z1 = domain_for_vfov(half_angle_deg)
    return DomainRect(-0.5 * y_width, 0.5 * y_width, z0, z1)
