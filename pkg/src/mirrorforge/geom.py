"""3-D vector and ray primitives: reflection, cylinder intersection, derivatives.

Vectors are plain float64 numpy arrays whose last axis has length 3; every
operation broadcasts over leading axes so callers can trace whole pixel
grids in a single call. All functions are pure and thread-safe.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateGeometryError, DomainError

Vec3 = np.ndarray  # shape (..., 3)

#: minimum ray parameter accepted as a hit, guards against self-intersection
SELF_HIT_EPS = 1e-9


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=float)


def norm(v: Vec3) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


def normalize(v: Vec3) -> Vec3:
    """Scale v to unit length; raises on zero vectors."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise DegenerateGeometryError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class Ray:
    """Half-line origin + t * direction, t >= 0; direction stored unit length."""

    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        n = float(np.linalg.norm(d))
        if n == 0.0:
            raise DegenerateGeometryError("ray direction must be nonzero")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d / n)

    def at(self, t: float) -> Vec3:
        return self.origin + t * self.direction


def reflect(d: Vec3, n: Vec3) -> Vec3:
    """Specular reflection of direction d off a surface with normal n.

    n need not be unit length; only its direction matters.  The component
    of d along n flips sign, the tangential component is preserved, so
    unit inputs stay unit.  Broadcasts over stacked inputs.
    """
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(nn == 0.0):
        raise DegenerateGeometryError("degenerate normal")
    nh = n / nn
    return d - 2.0 * np.sum(d * nh, axis=-1, keepdims=True) * nh


@dataclass(frozen=True)
class CylinderHit:
    point: Vec3
    azimuth: float  # atan2(p_y, p_z), in (-pi, pi]
    axial: float  # x coordinate of the hit point
    t: float


def intersect_cylinder_batch(origins, directions, radius, eps=SELF_HIT_EPS):
    """Vectorized ray / cylinder intersection (cylinder y^2 + z^2 = radius^2).

    Returns (hit, azimuth, axial, t) arrays; entries of rays that miss hold
    NaN.  A ray parallel to the axis never hits (its lateral position is
    constant), and only roots with t > eps count, so a ray starting on the
    surface immediately leaves it.
    """
    if radius <= 0.0:
        raise DomainError(f"cylinder radius must be positive, got {radius}")
    o = np.asarray(origins, dtype=float)
    d = np.asarray(directions, dtype=float)
    oy, oz = o[..., 1], o[..., 2]
    dy, dz = d[..., 1], d[..., 2]
    a = dy * dy + dz * dz
    b = oy * dy + oz * dz
    c = oy * oy + oz * oz - radius * radius
    disc = b * b - a * c
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
        t_near = (-b - sq) / a
        t_far = (-b + sq) / a
        t = np.where(t_near > eps, t_near, t_far)
    hit = (a > 0.0) & (disc >= 0.0) & (t > eps)
    t = np.where(hit, t, np.nan)
    axial = o[..., 0] + t * d[..., 0]
    py = oy + t * dy
    pz = oz + t * dz
    azimuth = np.arctan2(py, pz)
    azimuth = np.where(azimuth <= -np.pi, azimuth + 2.0 * np.pi, azimuth)
    return hit, azimuth, axial, t


def intersect_cylinder(ray: Ray, radius: float, eps=SELF_HIT_EPS) -> CylinderHit | None:
    """Nearest intersection of a single ray with the cylinder about the x-axis."""
    hit, azimuth, axial, t = intersect_cylinder_batch(ray.origin, ray.direction, radius, eps)
    if not bool(hit):
        return None
    return CylinderHit(point=ray.at(float(t)), azimuth=float(azimuth), axial=float(axial), t=float(t))


def central_diff(field: Callable, at: Vec3, step: float = 1e-5):
    """Per-axis central differences of a scalar- or vector-valued field.

    Row i holds (field(at + step*e_i) - field(at - step*e_i)) / (2*step):
    shape (3,) for scalar fields, (3, k) for k-vector fields.  Accurate to
    O(step^2) on three-times-differentiable fields and exact, up to
    rounding, on quadratics.
    """
    if step <= 0.0:
        raise DomainError(f"step must be positive, got {step}")
    at = np.asarray(at, dtype=float)
    rows = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        hi = np.asarray(field(at + e), dtype=float)
        lo = np.asarray(field(at - e), dtype=float)
        rows.append((hi - lo) / (2.0 * step))
    return np.stack(rows, axis=0)
