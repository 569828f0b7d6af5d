"""Exception types shared across the toolkit.

Each error carries a short machine-parsable tag and the process exit code
the CLI maps it to (0 success, 2 validation, 3 solver, 4 I/O).
"""


class MirrorForgeError(Exception):
    tag = "E_INTERNAL"
    exit_code = 1


class DomainError(MirrorForgeError):
    """Invalid argument, out-of-range parameter, or point outside a domain."""

    tag = "E_DOMAIN"
    exit_code = 2


class DegenerateGeometryError(DomainError):
    """Zero-length normal, coincident points, or similar degenerate input."""


class SolverError(MirrorForgeError):
    """Numerical solve failed: singular or ill-conditioned system, all-miss score."""

    tag = "E_SOLVER"
    exit_code = 3


class FormatError(MirrorForgeError):
    """Malformed input file; the message names the file and line."""

    tag = "E_FORMAT"
    exit_code = 2
