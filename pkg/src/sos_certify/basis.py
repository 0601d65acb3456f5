"""Polynomial bases, interpolation nodes and Lagrange vectors.

Univariate bases live on the segment [0, 1]; the shifted Chebyshev family
satisfies ``T_i((cos t + 1) / 2) = cos(i t)``.  The bivariate monomial basis
is ordered graded-lexicographically: ``1, x, y, x^2, xy, y^2, ...``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as npcheb

from .errors import InvalidInput, NotUnisolvent

NODE_TOL = 1e-12
RCOND_MIN = 1e-14


class BasisFamily(str, enum.Enum):
    MONOMIAL_1D = "monomial"
    CHEBYSHEV_1D = "chebyshev"
    MONOMIAL_2D = "monomial2d"


class Domain(str, enum.Enum):
    SEGMENT = "segment01"
    TRIANGLE = "unit_triangle"


class NodeScheme(str, enum.Enum):
    EQUISPACED = "equispaced"
    CHEBYSHEV = "chebyshev"


@dataclass(frozen=True)
class BasisSpec:
    family: BasisFamily
    dimension: int = 0

    def __post_init__(self):
        family = BasisFamily(self.family)
        object.__setattr__(self, "family", family)
        expected = 2 if family is BasisFamily.MONOMIAL_2D else 1
        if self.dimension == 0:
            object.__setattr__(self, "dimension", expected)
        elif self.dimension != expected:
            raise InvalidInput(f"{family.value} basis requires dimension {expected}")

    def size(self, degree: int) -> int:
        """Number of basis functions of total degree <= ``degree``."""
        if degree < 0:
            return 0
        if self.dimension == 1:
            return degree + 1
        return (degree + 1) * (degree + 2) // 2


MONOMIAL_1D = BasisSpec(BasisFamily.MONOMIAL_1D)
CHEBYSHEV_1D = BasisSpec(BasisFamily.CHEBYSHEV_1D)
MONOMIAL_2D = BasisSpec(BasisFamily.MONOMIAL_2D)


def _as_points(spec: BasisSpec, x) -> np.ndarray:
    """Coerce ``x`` to shape (m,) in 1D or (m, 2) in 2D."""
    arr = np.asarray(x, dtype=float)
    if spec.dimension == 1:
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim > 1:
            raise InvalidInput("1D basis expects scalar points")
        return np.atleast_1d(arr)
    if arr.shape[-1:] != (2,) or arr.ndim > 2:
        raise InvalidInput("2D basis expects points of shape (2,) or (m, 2)")
    return np.atleast_2d(arr)


def graded_exponents(degree: int) -> list[tuple[int, int]]:
    """Exponent pairs (a, b) of x^a y^b, a + b <= degree, graded-lex order."""
    return [(d - b, b) for d in range(degree + 1) for b in range(d + 1)]


def basis_matrix(spec: BasisSpec, max_degree: int, points) -> np.ndarray:
    """Evaluate the basis at many points.

    Returns an array of shape (m, spec.size(max_degree)) whose row ``i`` holds
    the basis values at ``points[i]``.  A negative degree yields zero columns.
    """
    pts = _as_points(spec, points)
    m = pts.shape[0]
    if max_degree < 0:
        return np.zeros((m, 0))
    if spec.family is BasisFamily.MONOMIAL_1D:
        return np.vander(pts, max_degree + 1, increasing=True)
    if spec.family is BasisFamily.CHEBYSHEV_1D:
        return npcheb.chebvander(2.0 * pts - 1.0, max_degree)
    xs = np.vander(pts[:, 0], max_degree + 1, increasing=True)
    ys = np.vander(pts[:, 1], max_degree + 1, increasing=True)
    cols = [xs[:, a] * ys[:, b] for a, b in graded_exponents(max_degree)]
    return np.stack(cols, axis=1)


def eval_basis(spec: BasisSpec, max_degree: int, x) -> np.ndarray:
    """Basis values at a single point."""
    if max_degree < 0:
        raise InvalidInput("max_degree must be >= 0")
    arr = np.asarray(x, dtype=float)
    if spec.dimension == 1 and arr.ndim != 0 and arr.shape != (1,):
        raise InvalidInput("1D basis expects a scalar point")
    if spec.dimension == 2 and arr.shape != (2,):
        raise InvalidInput("2D basis expects a point of shape (2,)")
    return basis_matrix(spec, max_degree, arr)[0]


def eval_poly(coeffs, spec: BasisSpec, max_degree: int, x) -> float | np.ndarray:
    """Evaluate ``sum_a coeffs[a] * b_a(x)``; vectorized over an array of points."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (spec.size(max_degree),):
        raise InvalidInput(
            f"expected {spec.size(max_degree)} coefficients, got {c.shape}"
        )
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 if spec.dimension == 1 else arr.ndim == 1
    vals = basis_matrix(spec, max_degree, arr) @ c
    return float(vals[0]) if single else vals


def barycentric(x) -> tuple[float, float, float]:
    """Barycentric coordinates w.r.t. the vertices (0,0), (1,0), (0,1)."""
    px, py = (float(v) for v in x)
    return 1.0 - px - py, px, py


@dataclass(frozen=True)
class PointSet:
    """Ordered interpolation nodes inside the segment or the unit triangle."""

    nodes: np.ndarray
    domain: Domain
    degree: int

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        domain = Domain(self.domain)
        if domain is Domain.SEGMENT:
            if nodes.ndim != 1:
                raise InvalidInput("segment nodes must be a 1D array")
            expected = self.degree + 1
            inside = (nodes >= -NODE_TOL) & (nodes <= 1 + NODE_TOL)
        else:
            if nodes.ndim != 2 or nodes.shape[1] != 2:
                raise InvalidInput("triangle nodes must have shape (m, 2)")
            expected = (self.degree + 1) * (self.degree + 2) // 2
            mu = np.column_stack([1 - nodes.sum(axis=1), nodes])
            inside = np.all(mu >= -NODE_TOL, axis=1)
        if len(nodes) != expected:
            raise InvalidInput(f"expected {expected} nodes for degree {self.degree}")
        if not np.all(inside):
            raise InvalidInput("nodes must lie in the domain")
        flat = nodes.reshape(len(nodes), -1)
        if len(np.unique(flat, axis=0)) != len(flat):
            raise InvalidInput("nodes must be pairwise distinct")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "domain", domain)

    def __len__(self):
        return len(self.nodes)

    @property
    def dimension(self) -> int:
        return 1 if self.domain is Domain.SEGMENT else 2


def make_points_segment(n: int, scheme=NodeScheme.EQUISPACED) -> PointSet:
    """n + 1 distinct nodes in [0, 1]."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    scheme = NodeScheme(scheme)
    r = np.arange(n + 1)
    if scheme is NodeScheme.EQUISPACED:
        nodes = r / n
    else:
        nodes = (1 + np.cos((2 * r + 1) * np.pi / (2 * n + 2))) / 2
    return PointSet(nodes, Domain.SEGMENT, n)


def make_points_triangle(n: int) -> PointSet:
    """Grid points (i/n, j/n) with i + j <= n, x varying fastest."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    nodes = [(i / n, j / n) for j in range(n + 1) for i in range(n + 1 - j)]
    return PointSet(np.array(nodes), Domain.TRIANGLE, n)


class LagrangeBasis:
    """Factored generalized Vandermonde system for repeated Lagrange solves.

    ``V[r, s] = b_s(x_r)``; the Lagrange vector at ``x`` solves ``V^t L = b(x)``.
    """

    def __init__(self, points: PointSet, spec: BasisSpec, n: int):
        if spec.dimension != points.dimension:
            raise InvalidInput("basis and point set dimensions differ")
        if spec.size(n) != len(points):
            raise InvalidInput("point count does not match basis size")
        self.points, self.spec, self.n = points, spec, n
        V = basis_matrix(spec, n, points.nodes)
        with warnings.catch_warnings():
            # exact singularity is reported below through the condition estimate
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(V)
        anorm = np.linalg.norm(V, 1)
        rcond = sla.lapack.dgecon(lu, anorm, norm="1")[0]
        if not np.isfinite(rcond) or rcond < RCOND_MIN:
            raise NotUnisolvent(f"Vandermonde reciprocal condition {rcond:.3e}")
        self.rcond = rcond
        self._lu = (lu, piv)

    def __call__(self, x) -> np.ndarray:
        """Lagrange vector(s); shape (r*,) for one point, (m, r*) for many."""
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 0 if self.spec.dimension == 1 else arr.ndim == 1
        b = basis_matrix(self.spec, self.n, arr)
        L = sla.lu_solve(self._lu, b.T, trans=1).T
        return L[0] if single else L


def lagrange_vector(points: PointSet, spec: BasisSpec, n: int, x) -> np.ndarray:
    """``(l_r(x))_r`` with ``l_r(x_s) = delta_rs``."""
    return LagrangeBasis(points, spec, n)(x)
