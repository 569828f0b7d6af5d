"""Command-line pipeline: design, check, fit, export-obj, render, score.

Every subcommand reads an optional `key = value` config file; flags given
on the command line win over the file.  Exit codes: 0 success, 2
validation, 3 solver, 4 I/O.  Errors print a single machine-parsable line
`E_TAG: message` on stderr.
"""
from __future__ import annotations

import argparse
import sys

from . import field as field_mod
from . import fit as fit_mod
from . import mirror as mirror_mod
from . import sim as sim_mod
from .config import RunConfig
from .errors import MirrorForgeError
from .projection import CameraModel, ProjectionSpec


def _parse_pair(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers in WxH, got {text!r}") from None


_OVERRIDES = (
    ("--vfov-half-deg", "vfov_half_deg", float, "vertical half field of view in degrees"),
    ("--y-width", "y_width", float, "azimuth width of the design strip in radians"),
    ("--degree", "degree", int, "polynomial degree of the fit"),
    ("--scene-radius", "scene_radius", float, "scene cylinder radius in world units"),
    ("--x-offset", "x_offset", float, "height offset of the mirror along the camera axis"),
    ("--camera-offset", "camera_offset", float, "image plane position on the camera axis"),
    ("--quad-rule", "quad_rule", str, "quadrature rule: midpoint or gauss"),
    ("--variant", "variant", str, "mirror variant: strip or conquistador"),
    ("--solver", "solver", str, "fit solver: polynomial or poisson"),
    ("--target", "target", str, "design target: panoramic or quadratic"),
    ("--coeffs", "coeffs_path", str, "coefficient file path"),
    ("--obj", "obj_path", str, "OBJ mesh output path"),
    ("--image", "image_path", str, "PPM render output path"),
    ("--report", "report_path", str, "score report output path"),
    ("--csv", "csv_path", str, "per-sample CSV output path (empty = skip)"),
)

_PAIR_OVERRIDES = (
    ("--quad", ("quad_ny", "quad_nz"), "quadrature grid, e.g. 64x64"),
    ("--size", ("render_width", "render_height"), "render size, e.g. 640x480"),
    ("--samples", ("score_ny", "score_nz"), "score sample grid, e.g. 100x40"),
    ("--mesh", ("mesh_ny", "mesh_nz"), "tessellation cell grid, e.g. 192x48"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirrorforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("design", "build the target field, fit the mirror, write coefficients"),
        ("check", "report the integrability residual of the target field"),
        ("fit", "run the height fit alone (polynomial or poisson solver)"),
        ("export-obj", "tessellate a fitted mirror and write a Wavefront OBJ"),
        ("render", "ray-trace the fitted mirror against the checkerboard scene"),
        ("score", "score the fitted mirror against the prescribed projection"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a key = value config file")
        for flag, dest, kind, help_str in _OVERRIDES:
            p.add_argument(flag, dest=dest, type=kind, default=None, help=help_str)
        for flag, dests, help_str in _PAIR_OVERRIDES:
            p.add_argument(flag, dest="__".join(dests), type=_parse_pair, default=None, help=help_str)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    for _, dest, _, _ in _OVERRIDES:
        value = getattr(args, dest, None)
        if value is not None:
            setattr(config, dest, value)
    for _, dests, _ in _PAIR_OVERRIDES:
        value = getattr(args, "__".join(dests), None)
        if value is not None:
            setattr(config, dests[0], value[0])
            setattr(config, dests[1], value[1])
    return config


def _target_field(config: RunConfig) -> field_mod.NormalField:
    if config.target == "quadratic":
        return field_mod.gradient_test_field()
    return field_mod.build_field(CameraModel(config.camera_offset), ProjectionSpec())


def _run_fit(config: RunConfig) -> int:
    domain = config.domain()
    components = field_mod.scaled_components(_target_field(config))
    print(f"target = {config.target}")
    print(f"domain = [{domain.y0!r}, {domain.y1!r}] x [{domain.z0!r}, {domain.z1!r}]")
    if config.solver == "poisson":
        result = fit_mod.fit_poisson(components, domain, config.quad_ny, config.quad_nz)
        print(f"solver = poisson")
        print(f"grid = {config.quad_ny} x {config.quad_nz}")
        print(f"J = {result.objective!r}")
        print(f"solve_residual = {result.residual_norm!r}")
        print("coefficients = none (grid solver; no coefficient file written)")
        return 0
    quad = fit_mod.Quadrature(config.quad_ny, config.quad_nz, config.quad_rule)
    result = fit_mod.fit_polynomial(components, domain, fit_mod.PolyBasis(config.degree), quad)
    fit_mod.write_coefficients(config.coeffs_path, result)
    print(f"solver = polynomial")
    print(f"degree = {config.degree}")
    print(f"J = {result.objective!r}")
    print(f"conditioning = {result.conditioning:.6e}")
    print(f"coefficients = {config.coeffs_path}")
    return 0


def cmd_design(config: RunConfig) -> int:
    config.validate(require_panoramic=True)
    return _run_fit(config)


def cmd_fit(config: RunConfig) -> int:
    config.validate()
    return _run_fit(config)


def cmd_check(config: RunConfig) -> int:
    config.validate()
    domain = config.domain()
    max_abs, (y, z) = field_mod.integrability_report(
        _target_field(config), domain, config.quad_ny, config.quad_nz
    )
    print(f"target = {config.target}")
    print(f"grid = {config.quad_ny} x {config.quad_nz}")
    print(f"max_residual = {max_abs!r}")
    print(f"argmax_y = {y!r}")
    print(f"argmax_z = {z!r}")
    return 0


def _load_surface(config: RunConfig):
    degree, exponents, coefficients = fit_mod.read_coefficients(config.coeffs_path)
    base = mirror_mod.surface_from_coefficients(
        degree, exponents, coefficients, config.domain(), config.x_offset
    )
    if config.variant == "conquistador":
        return mirror_mod.make_conquistador(base)
    return base


def cmd_export_obj(config: RunConfig) -> int:
    config.validate()
    mesh = mirror_mod.tessellate(_load_surface(config), config.mesh_ny, config.mesh_nz)
    mirror_mod.export_obj(mesh, config.obj_path)
    print(f"vertices = {len(mesh.vertices)}")
    print(f"faces = {len(mesh.faces)}")
    print(f"obj = {config.obj_path}")
    return 0


def cmd_render(config: RunConfig) -> int:
    config.validate()
    surface = _load_surface(config)
    scene = sim_mod.Scene(radius=config.scene_radius)
    result = sim_mod.render_panorama(surface, scene, config.render_width, config.render_height)
    sim_mod.write_ppm(result.pixels, config.image_path)
    print(f"size = {config.render_width} x {config.render_height}")
    print(f"variant = {config.variant}")
    print(f"miss_fraction = {result.miss_fraction!r}")
    print(f"image = {config.image_path}")
    return 0


def cmd_score(config: RunConfig) -> int:
    config.validate()
    surface = _load_surface(config)
    scene = sim_mod.Scene(radius=config.scene_radius)
    report = sim_mod.score_projection(surface, scene, config.score_ny, config.score_nz)
    report.write_text(config.report_path)
    if config.csv_path:
        report.write_csv(config.csv_path)
    sys.stdout.write(report.to_text())
    print(f"report = {config.report_path}")
    return 0


_COMMANDS = {
    "design": cmd_design,
    "check": cmd_check,
    "fit": cmd_fit,
    "export-obj": cmd_export_obj,
    "render": cmd_render,
    "score": cmd_score,
}


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        return _COMMANDS[args.command](config)
    except MirrorForgeError as exc:
        print(f"{exc.tag}: {_one_line(exc)}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"E_IO: {_one_line(exc)}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
