#!/usr/bin/env python3
"""Recompute the frozen regression anchors and print a tests/baselines.py body.

Run after an intentional algorithm change, review the numeric drift, and
paste the output over the value block in tests/baselines.py.
"""
import hashlib
import math
import tempfile
from pathlib import Path

import mirrorforge as mf


def residual_closed_form(y: float, z: float) -> float:
    s = 1.0 / math.sqrt(1.0 + z * z)
    return -math.sin(y) * s * ((1.0 + z * s) * (1.0 - z * s * s) - s**3)


def main():
    domain = mf.panoramic_domain()
    components = mf.scaled_components(mf.build_field(mf.CameraModel(), mf.ProjectionSpec()))
    quad = mf.Quadrature(64, 64)
    fit8 = mf.fit_polynomial(components, domain, mf.PolyBasis(8), quad)
    fit12 = mf.fit_polynomial(components, domain, mf.PolyBasis(12), quad)
    grid = mf.fit_poisson(components, domain, 64, 64)
    surface = mf.surface_from_fit(fit8)
    scene = mf.Scene(radius=100.0)
    report = mf.score_projection(surface, scene, 100, 40)

    dense = mf.objective_eval(surface, components, domain, mf.Quadrature(256, 256))
    drift = abs(dense - fit8.objective) / fit8.objective
    assert drift < 0.01, f"quadrature drift {drift:.2%}; J8 is not trustworthy"

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        mf.write_coefficients(tmp / "m.coeffs", fit8)
        mf.export_obj(mf.tessellate(surface, 192, 48), tmp / "m.obj")
        mf.write_ppm(mf.render_panorama(surface, scene, 640, 480).pixels, tmp / "s.ppm")
        composite = mf.make_conquistador(surface)
        mf.write_ppm(mf.render_panorama(composite, scene, 640, 480).pixels, tmp / "c.ppm")
        digests = {
            name: hashlib.sha256((tmp / fname).read_bytes()).hexdigest()
            for name, fname in (
                ("COEFFS_SHA256", "m.coeffs"),
                ("OBJ_SHA256", "m.obj"),
                ("STRIP_PPM_SHA256", "s.ppm"),
                ("CONQ_PPM_SHA256", "c.ppm"),
            )
        }

    print(f"J8 = {fit8.objective!r}")
    print(f"J12 = {fit12.objective!r}")
    print(f"POISSON_J = {grid.objective!r}")
    print(f"AZ_RMS_D8 = {report.azimuth_rms!r}")
    print(f"EL_RMS_D8 = {report.elevation_rms!r}")
    print("DELTA_AZ = 0.02")
    print("DELTA_EL = 0.02")
    print(f"RESIDUAL_AT_1_03 = {residual_closed_form(1.0, 0.3)!r}")
    for name, digest in digests.items():
        print(f'{name} = "{digest}"')


if __name__ == "__main__":
    main()
