import numpy as np
import pytest

import mirrorforge as mf


@pytest.fixture(scope="session")
def panoramic():
    return mf.panoramic_domain()


@pytest.fixture(scope="session")
def limit_field():
    return mf.build_field(mf.CameraModel(), mf.ProjectionSpec())


@pytest.fixture(scope="session")
def components(limit_field):
    return mf.scaled_components(limit_field)


@pytest.fixture(scope="session")
def quad64():
    return mf.Quadrature(64, 64)


@pytest.fixture(scope="session")
def fit8(components, panoramic, quad64):
    return mf.fit_polynomial(components, panoramic, mf.PolyBasis(8), quad64)


@pytest.fixture(scope="session")
def fit4(components, panoramic, quad64):
    return mf.fit_polynomial(components, panoramic, mf.PolyBasis(4), quad64)


@pytest.fixture(scope="session")
def surface8(fit8):
    return mf.surface_from_fit(fit8)


@pytest.fixture(scope="session")
def surface4(fit4):
    return mf.surface_from_fit(fit4)


@pytest.fixture(scope="session")
def scene100():
    return mf.Scene(radius=100.0)


class PrescribedSurface:
    """Surface wrapper with a custom design target, for exact-mirror oracles."""

    def __init__(self, inner, target_fn):
        self._inner = inner
        self._target_fn = target_fn

    def __getattr__(self, name):
        return getattr(self._inner, name)

    def prescribed_target(self, y, z):
        return self._target_fn(y, z)


@pytest.fixture(scope="session")
def radial_exact_surface():
    """Paraboloid mirror that realizes its own radial projection exactly.

    f = -(y^2 + z^2)/4 reflects the orthographic rays into directions whose
    lateral part is parallel to the mirror point's lateral position, so hit
    azimuth equals atan2(y, z) with no scene-distance parallax and the
    elevation is atan2(1 - r^2/4, r), r = |(y, z)|.
    """
    c = np.zeros((3, 3))
    c[2, 0] = -0.25
    c[0, 2] = -0.25
    base = mf.PolySurface(c, mf.DomainRect(-1.0, 1.0, -1.0, 1.0))

    def target(y, z):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        r = np.hypot(y, z)
        return np.arctan2(y, z), np.arctan2(1.0 - 0.25 * r * r, r)

    return PrescribedSurface(base, target)
