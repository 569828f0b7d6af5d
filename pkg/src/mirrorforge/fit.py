"""Height fitting by slope matching: polynomial least squares and a grid route.

Both routes minimize the same convex functional, the integral over the
design rectangle of (f_y - g)^2 + (f_z - h)^2, and should agree on its
optimum up to discretization.  The polynomial route solves dense least
squares in a domain-scaled monomial basis; the grid route minimizes a
finite-difference discretization, which is the natural-boundary Poisson
problem for the divergence of the target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .errors import DomainError, FormatError, SolverError
from .field import PlanarComponents
from .projection import DomainRect

COEFF_HEADER = "mirrorforge-poly v1"

#: conditioning (of the normal equations) beyond which the fit refuses to answer
COND_LIMIT = 1e14


@dataclass(frozen=True)
class PolyBasis:
    """Bivariate monomials y^i z^j with 1 <= i + j <= degree.

    The constant term is excluded: the objective sees only gradients, so
    the constant is a null direction of the normal equations.  Exponents
    are ordered lexicographically by (i, j).
    """

    degree: int

    def __post_init__(self):
        if self.degree < 1:
            raise DomainError(f"polynomial degree must be >= 1, got {self.degree}")

    @property
    def exponents(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (i, j)
            for i in range(self.degree + 1)
            for j in range(self.degree + 1 - i)
            if (i, j) != (0, 0)
        )

    @property
    def size(self) -> int:
        return (self.degree + 1) * (self.degree + 2) // 2 - 1


@dataclass(frozen=True)
class Quadrature:
    """Tensor-product rule on an ny x nz cell grid over the design rectangle.

    rule 'midpoint' places one node per cell; 'gauss' places a
    points_per_cell^2 Gauss-Legendre sub-rule in each cell.  Weights are
    positive and sum to the rectangle area.
    """

    ny: int = 64
    nz: int = 64
    rule: str = "midpoint"
    points_per_cell: int = 2

    def __post_init__(self):
        if self.ny < 1 or self.nz < 1:
            raise DomainError(f"quadrature grid must be at least 1 x 1, got {self.ny} x {self.nz}")
        if self.rule not in ("midpoint", "gauss"):
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
        if self.rule == "gauss" and self.points_per_cell < 1:
            raise DomainError("gauss rule needs at least one point per cell")

    def _axis(self, a: float, b: float, n: int):
        h = (b - a) / n
        centers = a + (np.arange(n) + 0.5) * h
        if self.rule == "midpoint":
            return centers, np.full(n, h)
        x, w = np.polynomial.legendre.leggauss(self.points_per_cell)
        nodes = (centers[:, None] + 0.5 * h * x[None, :]).ravel()
        weights = np.tile(0.5 * h * w, n)
        return nodes, weights

    def nodes(self, domain: DomainRect):
        """Flat node coordinates and weights: (Y, Z, W)."""
        ys, wy = self._axis(domain.y0, domain.y1, self.ny)
        zs, wz = self._axis(domain.z0, domain.z1, self.nz)
        yy, zz = np.meshgrid(ys, zs, indexing="ij")
        ww = np.outer(wy, wz)
        return yy.ravel(), zz.ravel(), ww.ravel()


@dataclass(frozen=True)
class FitResult:
    """Minimizer of the slope-matching objective over a polynomial basis.

    coefficients are for the raw monomials y^i z^j, aligned with
    basis.exponents; objective is the quadrature value of the functional at
    the minimizer; conditioning is the condition number of the normal
    equations that were solved.
    """

    basis: PolyBasis
    domain: DomainRect
    coefficients: np.ndarray
    objective: float
    conditioning: float

    @property
    def coeff_matrix(self) -> np.ndarray:
        d = self.basis.degree
        c = np.zeros((d + 1, d + 1))
        for (i, j), v in zip(self.basis.exponents, self.coefficients):
            c[i, j] = v
        return c


def _monomial_powers(t, degree):
    p = np.empty((degree + 1,) + t.shape)
    p[0] = 1.0
    for i in range(1, degree + 1):
        p[i] = p[i - 1] * t
    return p


def _scaled_to_raw(coeffs_scaled, basis: PolyBasis, domain: DomainRect) -> np.ndarray:
    """Re-express a polynomial in scaled coordinates as raw y^i z^j coefficients.

    Scaling maps the rectangle onto [-1, 1]^2; undoing it is exact
    polynomial composition with the inverse affine map.  The constant that
    composition may introduce is dropped: it is a pure height offset.
    """
    d = basis.degree
    hy, hz = 0.5 * domain.width, 0.5 * domain.height
    uy = np.array([-domain.y_center / hy, 1.0 / hy])
    vz = np.array([-domain.z_center / hz, 1.0 / hz])
    upow = [np.array([1.0])]
    vpow = [np.array([1.0])]
    for _ in range(d):
        upow.append(np.polynomial.polynomial.polymul(upow[-1], uy))
        vpow.append(np.polynomial.polynomial.polymul(vpow[-1], vz))
    c = np.zeros((d + 1, d + 1))
    for coeff, (i, j) in zip(coeffs_scaled, basis.exponents):
        c[: i + 1, : j + 1] += coeff * np.outer(upow[i], vpow[j])
    c[0, 0] = 0.0
    return c


def _design_matrix(basis: PolyBasis, domain: DomainRect, y, z, w):
    """Rows are sqrt(weight)-scaled basis gradients at the nodes, y-part then z-part."""
    hy, hz = 0.5 * domain.width, 0.5 * domain.height
    u = (y - domain.y_center) / hy
    v = (z - domain.z_center) / hz
    pu = _monomial_powers(u, basis.degree)
    pv = _monomial_powers(v, basis.degree)
    sw = np.sqrt(w)
    n = y.size
    m = np.empty((2 * n, basis.size))
    for k, (i, j) in enumerate(basis.exponents):
        m[:n, k] = sw * (i / hy * pu[i - 1] * pv[j] if i else 0.0)
        m[n:, k] = sw * (j / hz * pu[i] * pv[j - 1] if j else 0.0)
    return m


def fit_polynomial(
    target: PlanarComponents,
    domain: DomainRect,
    basis: PolyBasis,
    quad: Quadrature = Quadrature(),
) -> FitResult:
    """Least-squares minimizer of the slope-matching objective.

    The objective is quadratic in the coefficients; the SVD-based solve is
    rank revealing and refuses outright singular or catastrophically
    conditioned systems.
    """
    y, z, w = quad.nodes(domain)
    if basis.size > y.size:
        raise DomainError(
            f"basis of size {basis.size} needs at least as many quadrature nodes, got {y.size}"
        )
    m = _design_matrix(basis, domain, y, z, w)
    sw = np.sqrt(w)
    b = np.concatenate(
        [sw * np.asarray(target.g(y, z), dtype=float), sw * np.asarray(target.h(y, z), dtype=float)]
    )
    coeffs_scaled, _, rank, sv = np.linalg.lstsq(m, b, rcond=None)
    cond2 = math.inf if sv[-1] == 0.0 else float((sv[0] / sv[-1]) ** 2)
    if rank < basis.size or not math.isfinite(cond2) or cond2 > COND_LIMIT:
        raise SolverError(
            f"normal equations are numerically singular (conditioning {cond2:.3e}); "
            "lower the polynomial degree or refine the quadrature"
        )
    resid = b - m @ coeffs_scaled
    objective = float(resid @ resid)
    craw = _scaled_to_raw(coeffs_scaled, basis, domain)
    coefficients = np.array([craw[i, j] for (i, j) in basis.exponents])
    return FitResult(
        basis=basis,
        domain=domain,
        coefficients=coefficients,
        objective=objective,
        conditioning=cond2,
    )


def objective_eval(surface_gradient, target: PlanarComponents, domain: DomainRect, quad: Quadrature = Quadrature()) -> float:
    """Quadrature value of the slope-matching objective for a given surface.

    surface_gradient is either a callable (y, z) -> (f_y, f_z) or an object
    with such a .gradient method.
    """
    grad = getattr(surface_gradient, "gradient", surface_gradient)
    y, z, w = quad.nodes(domain)
    fy, fz = grad(y, z)
    g = np.asarray(target.g(y, z), dtype=float)
    h = np.asarray(target.h(y, z), dtype=float)
    return float(np.sum(w * ((np.asarray(fy, dtype=float) - g) ** 2 + (np.asarray(fz, dtype=float) - h) ** 2)))


@dataclass(frozen=True)
class PoissonResult:
    """Grid minimizer of the slope-matching objective.

    values[i, j] is the height at (y_nodes[i], z_nodes[j]), zero-meaned;
    objective is the discrete functional at the minimizer and
    residual_norm the relative residual of the solved normal equations.
    """

    y_nodes: np.ndarray
    z_nodes: np.ndarray
    values: np.ndarray
    objective: float
    residual_norm: float


def _forward_difference(lo, hi, h, n_unknowns):
    """Sparse operator taking grid values to (value[hi] - value[lo]) / h."""
    lo = lo.ravel()
    hi = hi.ravel()
    rows = np.repeat(np.arange(lo.size), 2)
    cols = np.stack([lo, hi], axis=1).ravel()
    vals = np.tile(np.array([-1.0, 1.0]) / h, lo.size)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(lo.size, n_unknowns))


def fit_poisson(target: PlanarComponents, domain: DomainRect, ny: int = 64, nz: int = 64) -> PoissonResult:
    """Second-order grid solution of the slope-matching problem.

    Minimizes the discrete objective built from forward differences at cell
    midpoints with trapezoid weights across; its normal equations are the
    five-point Poisson system for div(g, h) with the Neumann condition
    grad f . n = (g, h) . n imposed naturally.  The constant null mode is
    pinned by zero-meaning the solution.
    """
    if ny < 8 or nz < 8:
        raise DomainError(f"grid must be at least 8 x 8, got {ny} x {nz}")
    ys = np.linspace(domain.y0, domain.y1, ny)
    zs = np.linspace(domain.z0, domain.z1, nz)
    hy = (domain.y1 - domain.y0) / (ny - 1)
    hz = (domain.z1 - domain.z0) / (nz - 1)

    ids = np.arange(ny * nz).reshape(ny, nz)
    dy = _forward_difference(ids[:-1, :], ids[1:, :], hy, ny * nz)
    dz = _forward_difference(ids[:, :-1], ids[:, 1:], hz, ny * nz)

    # trapezoid weight across nodes, full cell length along the differenced axis
    tz = np.full(nz, hz)
    tz[0] = tz[-1] = 0.5 * hz
    ty = np.full(ny, hy)
    ty[0] = ty[-1] = 0.5 * hy
    wy = (hy * np.ones((ny - 1, 1)) * tz[None, :]).ravel()
    wz = (ty[:, None] * (hz * np.ones((1, nz - 1)))).ravel()

    ymid = 0.5 * (ys[:-1] + ys[1:])
    gmid = np.broadcast_to(
        np.asarray(target.g(ymid[:, None], zs[None, :]), dtype=float), (ny - 1, nz)
    ).ravel()
    zmid = 0.5 * (zs[:-1] + zs[1:])
    hmid = np.broadcast_to(
        np.asarray(target.h(ys[:, None], zmid[None, :]), dtype=float), (ny, nz - 1)
    ).ravel()

    k = (dy.T @ sparse.diags(wy) @ dy + dz.T @ sparse.diags(wz) @ dz).tocsc()
    rhs = dy.T @ (wy * gmid) + dz.T @ (wz * hmid)

    # ground node 0 to remove the constant null space, then zero-mean
    kin = k[1:, 1:]
    f = np.zeros(ny * nz)
    f[1:] = spla.spsolve(kin, rhs[1:])
    scale = float(np.linalg.norm(rhs)) or 1.0
    residual_norm = float(np.linalg.norm(k @ f - rhs)) / scale
    if not np.all(np.isfinite(f)) or residual_norm > 1e-8:
        raise SolverError(
            f"grid solve did not converge: relative residual {residual_norm:.3e} on {ny}x{nz} nodes"
        )
    f -= f.mean()

    objective = float(np.sum(wy * (dy @ f - gmid) ** 2) + np.sum(wz * (dz @ f - hmid) ** 2))
    return PoissonResult(
        y_nodes=ys,
        z_nodes=zs,
        values=f.reshape(ny, nz),
        objective=objective,
        residual_norm=residual_norm,
    )


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_coefficients(path, result: FitResult) -> None:
    """Serialize a polynomial fit; the format round-trips bit exactly."""
    lines = [COEFF_HEADER, f"degree {result.basis.degree}"]
    for (i, j), c in zip(result.basis.exponents, result.coefficients):
        lines.append(f"{i} {j} {_format_float(c)}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_coefficients(path):
    """Parse a coefficient file; returns (degree, exponents, coefficients)."""
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines or lines[0] != COEFF_HEADER:
        raise FormatError(f"{path}: line 1: expected header {COEFF_HEADER!r}")
    if len(lines) < 2 or not lines[1].startswith("degree "):
        raise FormatError(f"{path}: line 2: expected 'degree <d>'")
    try:
        degree = int(lines[1].split()[1])
    except (IndexError, ValueError):
        raise FormatError(f"{path}: line 2: malformed degree line {lines[1]!r}") from None
    if degree < 1:
        raise FormatError(f"{path}: line 2: degree must be >= 1, got {degree}")
    basis = PolyBasis(degree)
    expected = basis.exponents
    body = lines[2:]
    if len(body) != len(expected):
        raise FormatError(
            f"{path}: expected {len(expected)} coefficient lines for degree {degree}, got {len(body)}"
        )
    coefficients = np.empty(len(expected))
    for k, line in enumerate(body):
        lineno = k + 3
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}: line {lineno}: expected 'i j value', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            value = float(parts[2])
        except ValueError:
            raise FormatError(f"{path}: line {lineno}: malformed numbers in {line!r}") from None
        if (i, j) != expected[k]:
            raise FormatError(
                f"{path}: line {lineno}: exponents {(i, j)} out of order, expected {expected[k]}"
            )
        coefficients[k] = value
    return degree, expected, coefficients
