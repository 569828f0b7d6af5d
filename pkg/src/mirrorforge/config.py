"""Flat `key = value` run configuration.

Defaults encode the reference panoramic design: a +-30 degree vertical
field of view over a full 2*pi of azimuth, degree-8 fit on a 64x64
midpoint quadrature, 640x480 renders.  Lines starting with '#' (or blank)
are ignored; parse -> serialize -> parse is a fixed point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import DomainError, FormatError
from .projection import DomainRect, domain_for_vfov

VARIANTS = ("strip", "conquistador")
SOLVERS = ("polynomial", "poisson")
TARGETS = ("panoramic", "quadratic")
QUAD_RULES = ("midpoint", "gauss")


@dataclass
class RunConfig:
    vfov_half_deg: float = 30.0
    y_width: float = 2.0 * math.pi
    degree: int = 8
    quad_ny: int = 64
    quad_nz: int = 64
    quad_rule: str = "midpoint"
    scene_radius: float = 100.0
    render_width: int = 640
    render_height: int = 480
    score_ny: int = 100
    score_nz: int = 40
    mesh_ny: int = 192
    mesh_nz: int = 48
    variant: str = "strip"
    solver: str = "polynomial"
    target: str = "panoramic"
    x_offset: float = 0.0
    camera_offset: float = 2.0
    coeffs_path: str = "mirror.coeffs"
    obj_path: str = "mirror.obj"
    image_path: str = "render.ppm"
    report_path: str = "score.txt"
    csv_path: str = ""

    def domain(self) -> DomainRect:
        z0, z1 = domain_for_vfov(self.vfov_half_deg)
        if self.y_width <= 0.0:
            raise DomainError(f"y width must be positive, got {self.y_width}")
        return DomainRect(-0.5 * self.y_width, 0.5 * self.y_width, z0, z1)

    def validate(self, require_panoramic: bool = False) -> None:
        """Check every field against the preconditions of the module it feeds."""
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.solver not in SOLVERS:
            raise DomainError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.target not in TARGETS:
            raise DomainError(f"target must be one of {TARGETS}, got {self.target!r}")
        if self.quad_rule not in QUAD_RULES:
            raise DomainError(f"quad_rule must be one of {QUAD_RULES}, got {self.quad_rule!r}")
        if self.degree < 1:
            raise DomainError(f"degree must be >= 1, got {self.degree}")
        for name in ("quad_ny", "quad_nz", "render_width", "render_height", "mesh_ny", "mesh_nz"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("score_ny", "score_nz"):
            if getattr(self, name) < 10:
                raise DomainError(f"{name} must be >= 10, got {getattr(self, name)}")
        if self.scene_radius <= 0.0:
            raise DomainError(f"scene_radius must be positive, got {self.scene_radius}")
        if self.camera_offset <= 0.0:
            raise DomainError(f"camera_offset must be positive, got {self.camera_offset}")
        domain = self.domain()  # validates vfov and y_width
        if require_panoramic and self.variant == "strip" and self.target == "panoramic":
            if not domain.is_panoramic:
                raise DomainError(
                    f"panoramic strip design needs y width >= 2*pi, got {self.y_width}"
                )
        if self.variant == "conquistador" and self.y_width < math.pi - 1e-12:
            raise DomainError(
                f"conquistador variant needs the base strip to cover [-pi/2, pi/2]; y width {self.y_width} is too narrow"
            )

    def serialize(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)!r}" if f.type == "float" else f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        known = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{source}: line {lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise FormatError(f"{source}: line {lineno}: unknown key {key!r}")
            kind = known[key]
            try:
                if kind == "int":
                    values[key] = int(value)
                elif kind == "float":
                    values[key] = float(value)
                else:
                    values[key] = value
            except ValueError:
                raise FormatError(
                    f"{source}: line {lineno}: cannot parse {value!r} as {kind} for key {key!r}"
                ) from None
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.parse(Path(path).read_text(encoding="utf-8"), source=str(path))
