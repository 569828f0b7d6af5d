"""Candidate mirror-normal fields and the integrability test.

A mirror realizing the prescribed projection must be orthogonal to the sum
of two unit vectors: one toward the camera, one toward the prescribed scene
point.  That sum defines a vector field on space; an exact mirror exists
precisely when the field admits integral surfaces, which the scalar
(curl W) . W detects.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .geom import central_diff, normalize
from .projection import CameraModel, DomainRect, ProjectionSpec, prescribed_map, target_direction


@dataclass(frozen=True)
class NormalField:
    """Vector field whose integral surfaces (if any) are valid mirror shapes.

    evaluate maps points of shape (..., 3) to field values of the same
    shape.  form is 'limit' for x-independent fields defined by image-plane
    coordinates alone, 'general' for fields that depend on all of space.
    """

    evaluate: Callable
    form: str

    def __call__(self, r):
        return self.evaluate(r)


@dataclass(frozen=True)
class PlanarComponents:
    """Slope targets (g, h) on the design rectangle.

    A mirror graph x = f(y, z) matches the field exactly when grad f equals
    (g, h); in general no such f exists and f is chosen by minimizing the
    squared slope mismatch.
    """

    g: Callable
    h: Callable


def build_field(camera: CameraModel, spec: ProjectionSpec) -> NormalField:
    """Normal field of the prescribed projection under the given camera.

    Finite target radius: sum of the unit vector from r toward its image
    point and the unit vector from r toward its prescribed scene point.
    Limit: the closed form (z/s + 1, sin(y)/s, cos(y)/s) with
    s = sqrt(1 + z^2), i.e. target direction plus the unit x vector.
    """
    if spec.is_limit:

        def w_limit(r):
            u = target_direction(r, spec)
            out = np.array(u)
            out[..., 0] += 1.0
            return out

        return NormalField(evaluate=w_limit, form="limit")

    def w_general(r):
        r = np.asarray(r, dtype=float)
        q = camera.image_point(r)
        s = prescribed_map(q, spec)
        return normalize(q - r) + normalize(s - r)

    return NormalField(evaluate=w_general, form="general")


def gradient_test_field() -> NormalField:
    """x-independent gradient field (1, 2y, 2z); integrable by construction.

    Used as the CLI's 'quadratic' target: its slope targets are (-2y, -2z),
    realized exactly by a degree-2 mirror.
    """

    def w(r):
        r = np.asarray(r, dtype=float)
        return np.stack([np.ones_like(r[..., 1]), 2.0 * r[..., 1], 2.0 * r[..., 2]], axis=-1)

    return NormalField(evaluate=w, form="limit")


def _plane_points(y, z):
    y, z = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(z, dtype=float))
    return np.stack([np.zeros_like(y), y, z], axis=-1)


def scaled_components(field: NormalField) -> PlanarComponents:
    """Slope targets obtained by scaling the field to unit first component.

    g = -W2/W1 and h = -W3/W1, so that the graph normal (1, -f_y, -f_z)
    is parallel to W whenever grad f = (g, h).  Only x-independent (limit
    form) fields define planar targets.
    """
    if field.form != "limit":
        raise DomainError("scaled components require an x-independent (limit-form) field")

    def component(y, z, index):
        w = field(_plane_points(y, z))
        w1 = w[..., 0]
        bad = np.abs(w1) < 1e-12
        if np.any(bad):
            yb = np.broadcast_to(np.asarray(y, dtype=float), bad.shape)[bad].flat[0]
            zb = np.broadcast_to(np.asarray(z, dtype=float), bad.shape)[bad].flat[0]
            raise DomainError(f"field first component vanishes at (y={yb}, z={zb}); cannot scale")
        return -w[..., index] / w1

    return PlanarComponents(
        g=lambda y, z: component(y, z, 1),
        h=lambda y, z: component(y, z, 2),
    )


def _curl_from_jacobian(jac):
    return np.stack(
        [
            jac[..., 1, 2] - jac[..., 2, 1],
            jac[..., 2, 0] - jac[..., 0, 2],
            jac[..., 0, 1] - jac[..., 1, 0],
        ],
        axis=-1,
    )


def integrability_residual(field: NormalField, at, step: float = 1e-5) -> float:
    """(curl W) . W at a point, curl taken by central differences.

    Vanishes identically exactly when some surface is orthogonal to W
    everywhere, i.e. when an exact mirror exists.
    """
    at = np.asarray(at, dtype=float)
    jac = central_diff(field.evaluate, at, step)  # jac[i] = dW/dx_i
    curl = np.array([jac[1, 2] - jac[2, 1], jac[2, 0] - jac[0, 2], jac[0, 1] - jac[1, 0]])
    return float(np.dot(curl, field.evaluate(at)))


def residual_grid(field: NormalField, y, z, step: float = 1e-5):
    """Vectorized residual at the plane points (0, y, z)."""
    pts = _plane_points(y, z)
    jac = np.empty(pts.shape[:-1] + (3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        jac[..., i, :] = (field(pts + e) - field(pts - e)) / (2.0 * step)
    curl = _curl_from_jacobian(jac)
    return np.sum(curl * field(pts), axis=-1)


def integrability_report(field: NormalField, domain: DomainRect, ny: int = 64, nz: int = 64, step: float = 1e-5):
    """Max |residual| over an ny x nz node grid on the domain.

    Returns (max_abs, (y, z) of the maximizer).  A small maximum supports,
    but does not by itself prove, the existence of an exact mirror; a large
    maximum certifies nonexistence.
    """
    if ny < 2 or nz < 2:
        raise DomainError(f"residual grid must be at least 2 x 2, got {ny} x {nz}")
    ys = np.linspace(domain.y0, domain.y1, ny)
    zs = np.linspace(domain.z0, domain.z1, nz)
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    res = np.abs(residual_grid(field, yy, zz, step))
    k = int(np.argmax(res))
    return float(res.flat[k]), (float(yy.flat[k]), float(zz.flat[k]))
