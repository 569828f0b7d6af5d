#!/usr/bin/env python3
"""Run the full design pipeline and drop every artifact into an output directory.

Produces: integrability report, coefficient file, strip and composite OBJ
meshes, strip and composite renders, and a score report with per-sample CSV.
"""
import argparse
import sys
from pathlib import Path

from mirrorforge.cli import main as forge


def run(args):
    code = forge(args)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out", help="output directory (default: out)")
    parser.add_argument("--degree", type=int, default=8)
    parser.add_argument("--size", default="640x480")
    args = parser.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    coeffs = str(out / "mirror.coeffs")
    degree = str(args.degree)

    run(["check", "--quad", "64x64"])
    run(["design", "--degree", degree, "--coeffs", coeffs])
    run(["export-obj", "--coeffs", coeffs, "--obj", str(out / "strip.obj")])
    run(
        [
            "export-obj",
            "--coeffs",
            coeffs,
            "--variant",
            "conquistador",
            "--obj",
            str(out / "conquistador.obj"),
        ]
    )
    run(["render", "--coeffs", coeffs, "--size", args.size, "--image", str(out / "strip.ppm")])
    run(
        [
            "render",
            "--coeffs",
            coeffs,
            "--variant",
            "conquistador",
            "--size",
            args.size,
            "--image",
            str(out / "conquistador.ppm"),
        ]
    )
    run(
        [
            "score",
            "--coeffs",
            coeffs,
            "--report",
            str(out / "score.txt"),
            "--csv",
            str(out / "score.csv"),
        ]
    )
    print(f"artifacts written to {out}/")


if __name__ == "__main__":
    main()
