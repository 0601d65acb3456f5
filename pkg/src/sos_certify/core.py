"""Localizing matrices, the dual barrier G and SOS certificate extraction.

For a multiplier ``lam`` (one entry per interpolation node) the matrix

    M(lam) = I + sum_r lam_r B_r

is block diagonal, block ``j`` being ``I + W_j^t diag(lam * g_j) W_j`` where
``W_j[r, :]`` holds the degree-``n_j`` basis at node ``r`` and ``g_j`` the
weight values at the nodes.  The dual function is

    G(lam) = tr(M(lam)^-1) + <lam, y>   on {M(lam) > 0},  +inf elsewhere.

All routines work block by block; each ``B_r`` block is the rank-one matrix
``g_j(x_r) w_j(x_r) w_j(x_r)^t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .basis import BasisSpec, PointSet, _as_points, basis_matrix
from .errors import InvalidInput, OutOfDomain, WeightDegreeMismatch

PIVOT_REL = 1e-13


@dataclass(frozen=True)
class Weight:
    """A polynomial weight g_j, evaluable on arrays of points."""

    name: str
    degree: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    def __call__(self, pts) -> np.ndarray:
        return np.asarray(self.func(pts), dtype=float) * np.ones(len(pts))


def _mu(pts):
    return 1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]


WEIGHTS: dict[str, Weight] = {
    w.name: w
    for w in [
        Weight("1", 0, lambda p: np.ones(len(p))),
        Weight("x", 1, lambda p: p),
        Weight("1-x", 1, lambda p: 1.0 - p),
        Weight("x(1-x)", 2, lambda p: p * (1.0 - p)),
        Weight("mu1", 1, lambda p: _mu(p)[0]),
        Weight("mu2", 1, lambda p: _mu(p)[1]),
        Weight("mu3", 1, lambda p: _mu(p)[2]),
        Weight("mu2*mu3", 2, lambda p: _mu(p)[1] * _mu(p)[2]),
        Weight("mu3*mu1", 2, lambda p: _mu(p)[2] * _mu(p)[0]),
        Weight("mu1*mu2", 2, lambda p: _mu(p)[0] * _mu(p)[1]),
        Weight("mu1*mu2*mu3", 3, lambda p: np.prod(_mu(p), axis=0)),
    ]
}


def get_weight(name: str) -> Weight:
    try:
        return WEIGHTS[name]
    except KeyError:
        raise InvalidInput(f"unknown weight {name!r}") from None


class SosProblem:
    """Immutable problem instance: weights, nodes, data and cached B_r blocks.

    Parameters
    ----------
    n : int
        Total degree of the interpolated polynomial.
    weights : sequence of Weight
        The weights g_j; block ``j`` uses basis degree ``(n - deg g_j) // 2``.
    basis : BasisSpec
    points : PointSet
        Interpolation nodes; their count fixes the length of the multiplier.
    y : array_like
        Data at the nodes.
    label : str
    epsilon : float
        Regularization already folded into ``y`` (informational).
    waive_dimension_check : bool
        Accept ``sum_j r_j != len(points)``.  Only the unweighted triangle
        experiment needs this.
    """

    def __init__(
        self,
        n: int,
        weights: Sequence[Weight],
        basis: BasisSpec,
        points: PointSet,
        y,
        label: str = "",
        epsilon: float = 0.0,
        waive_dimension_check: bool = False,
    ):
        if basis.dimension != points.dimension:
            raise InvalidInput("basis and points have different dimensions")
        y = np.array(y, dtype=float)
        if y.shape != (len(points),):
            raise InvalidInput(f"y must have length {len(points)}")
        if not weights:
            raise InvalidInput("at least one weight is required")
        self.n = int(n)
        self.weights = tuple(weights)
        self.basis = basis
        self.points = points
        self.label = label
        self.epsilon = float(epsilon)
        self.block_degrees = tuple((self.n - w.degree) // 2 for w in self.weights)
        if min(self.block_degrees) < 0:
            raise InvalidInput("degree too small for some weight block")
        self.block_sizes = tuple(basis.size(k) for k in self.block_degrees)
        self.dimension_waived = sum(self.block_sizes) != len(points)
        if self.dimension_waived and not waive_dimension_check:
            raise WeightDegreeMismatch(
                f"block sizes {self.block_sizes} sum to {sum(self.block_sizes)}, "
                f"expected {len(points)}"
            )
        y.setflags(write=False)
        self.y = y
        nodes = points.nodes
        # per-block basis values at nodes, shape (r*, r_j), and weight values (j*, r*)
        self.W = tuple(basis_matrix(basis, k, nodes) for k in self.block_degrees)
        self.g = np.array([w(nodes) for w in self.weights])
        for arr in self.W + (self.g,):
            arr.setflags(write=False)
        self.offsets = tuple(np.concatenate([[0], np.cumsum(self.block_sizes)]))
        # spectral norm of each B_r: max over blocks of |g_j(x_r)| ||w_j(x_r)||^2
        sq = np.array([np.sum(Wj**2, axis=1) for Wj in self.W])
        self.B_norms = np.max(np.abs(self.g) * sq, axis=0)
        self._B_dense = None

    @property
    def r_star(self) -> int:
        """Number of nodes, i.e. length of the multiplier."""
        return len(self.points)

    @property
    def size(self) -> int:
        """Order of the matrices B_r and M(lam)."""
        return int(self.offsets[-1])

    @property
    def j_star(self) -> int:
        return len(self.weights)

    def block_slices(self):
        return [slice(a, b) for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    @property
    def B(self) -> np.ndarray:
        """Dense stack of the B_r, shape (r*, N, N).  Built on first access."""
        if self._B_dense is None:
            B = np.zeros((self.r_star, self.size, self.size))
            for j, sl in enumerate(self.block_slices()):
                Wj = self.W[j]
                B[:, sl, sl] = self.g[j][:, None, None] * Wj[:, :, None] * Wj[:, None, :]
            B.setflags(write=False)
            self._B_dense = B
        return self._B_dense

    def with_y(self, y, epsilon: float | None = None, label: str | None = None):
        """Copy with new data (the cached blocks are shared)."""
        new = object.__new__(SosProblem)
        new.__dict__.update(self.__dict__)
        y = np.array(y, dtype=float)
        if y.shape != self.y.shape:
            raise InvalidInput("y has the wrong length")
        y.setflags(write=False)
        new.y = y
        if epsilon is not None:
            new.epsilon = float(epsilon)
        if label is not None:
            new.label = label
        return new

    def __repr__(self):
        return (
            f"SosProblem(label={self.label!r}, n={self.n}, r*={self.r_star}, "
            f"blocks={self.block_sizes})"
        )


def assemble_problem(n, weights, basis, points, y, label="", **kwargs) -> SosProblem:
    return SosProblem(n, weights, basis, points, y, label=label, **kwargs)


def weight_values(problem: SosProblem, pts) -> np.ndarray:
    """Weights at arbitrary points, shape (j*, m)."""
    pts = _as_points(problem.basis, pts)
    return np.array([w(pts) for w in problem.weights])


def assemble_B(problem: SosProblem, x) -> np.ndarray:
    """Localizing matrix B(x): block j is g_j(x) w_j(x) w_j(x)^t."""
    pts = _as_points(problem.basis, x)[:1]
    gx = weight_values(problem, pts)[:, 0]
    B = np.zeros((problem.size, problem.size))
    for j, sl in enumerate(problem.block_slices()):
        w = basis_matrix(problem.basis, problem.block_degrees[j], pts)[0]
        B[sl, sl] = gx[j] * np.outer(w, w)
    return B


def _check_lambda(problem: SosProblem, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (problem.r_star,):
        raise InvalidInput(f"multiplier must have length {problem.r_star}")
    return lam


def lambda_blocks(problem: SosProblem, lam) -> list[np.ndarray]:
    """Diagonal blocks of sum_r lam_r B_r."""
    lam = _check_lambda(problem, lam)
    blocks = []
    for Wj, gj in zip(problem.W, problem.g):
        A = Wj.T @ ((lam * gj)[:, None] * Wj)
        blocks.append(0.5 * (A + A.T))  # exact symmetry despite rounding
    return blocks


def M_blocks(problem: SosProblem, lam) -> list[np.ndarray]:
    blocks = lambda_blocks(problem, lam)
    for A in blocks:
        A[np.diag_indices_from(A)] += 1.0
    return blocks


def M_of_lambda(problem: SosProblem, lam) -> np.ndarray:
    """Dense M(lam) = I + sum_r lam_r B_r."""
    return sla.block_diag(*M_blocks(problem, lam))


def pivot_floor(problem: SosProblem, lam) -> float:
    return PIVOT_REL * (1.0 + np.abs(lam).sum() * problem.B_norms.max())


def _cholesky_blocks(problem: SosProblem, lam):
    """Lower Cholesky factors of the blocks of M(lam), or None if not PD."""
    floor = pivot_floor(problem, lam)
    factors = []
    for Mj in M_blocks(problem, lam):
        if Mj.shape[0] == 0:
            factors.append(Mj)
            continue
        try:
            L = np.linalg.cholesky(Mj)
        except np.linalg.LinAlgError:
            return None
        d = np.diag(L)
        if not np.all(np.isfinite(d)) or np.min(d) ** 2 <= floor:
            return None
        factors.append(L)
    return factors


def in_domain(problem: SosProblem, lam) -> bool:
    lam = _check_lambda(problem, lam)
    if not np.all(np.isfinite(lam)):
        return False
    return _cholesky_blocks(problem, lam) is not None


@dataclass
class DualEvaluation:
    """Value, derivatives and factorization of G at one multiplier."""

    lam: np.ndarray
    value: float
    in_domain: bool
    gradient: np.ndarray | None = None
    hessian: np.ndarray | None = None
    chol_M: list[np.ndarray] | None = None
    M_inv: list[np.ndarray] | None = None
    p_nodes: np.ndarray | None = None

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


def evaluate(problem: SosProblem, lam, order: int = 0) -> DualEvaluation:
    """Evaluate G and, for ``order`` >= 1 / >= 2, its gradient / Hessian.

    Outside the domain the value is ``+inf`` and no derivative is attached.
    """
    lam = _check_lambda(problem, lam)
    factors = _cholesky_blocks(problem, lam) if np.all(np.isfinite(lam)) else None
    if factors is None:
        return DualEvaluation(lam=lam, value=np.inf, in_domain=False)
    trace = 0.0
    for L in factors:
        if L.shape[0]:
            Linv = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
            trace += np.sum(Linv**2)
    ev = DualEvaluation(
        lam=lam, value=float(trace + lam @ problem.y), in_domain=True, chol_M=factors
    )
    if order < 1:
        return ev
    Minv, Z = [], []
    p_nodes = np.zeros(problem.r_star)
    for L, Wj, gj in zip(factors, problem.W, problem.g):
        inv = sla.cho_solve((L, True), np.eye(L.shape[0])) if L.shape[0] else L
        inv = 0.5 * (inv + inv.T)
        Zj = inv @ Wj.T
        Minv.append(inv)
        Z.append(Zj)
        p_nodes += gj * np.sum(Zj**2, axis=0)
    ev.M_inv = Minv
    ev.p_nodes = p_nodes
    ev.gradient = problem.y - p_nodes
    if order >= 2:
        H = np.zeros((problem.r_star, problem.r_star))
        for Wj, gj, Zj in zip(problem.W, problem.g, Z):
            K1 = Wj @ Zj  # W M^-1 W^t
            K2 = Zj.T @ Zj  # W M^-2 W^t
            H += np.outer(gj, gj) * K1 * K2
        H = H + H.T  # 2 * symmetric part
        ev.hessian = H
    return ev


def eval_G(problem: SosProblem, lam) -> float:
    return evaluate(problem, lam, 0).value


def eval_G_V(problem: SosProblem, lam, V) -> float:
    """sum_i <V_i, M(lam)^-1 V_i> + <lam, y> for an arbitrary family of vectors."""
    ev = evaluate(problem, lam, 0)
    if not ev.in_domain:
        return np.inf
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[1] != problem.size:
        raise InvalidInput(f"vectors must have length {problem.size}")
    quad = 0.0
    for L, sl in zip(ev.chol_M, problem.block_slices()):
        if L.shape[0]:
            S = sla.solve_triangular(L, V[:, sl].T, lower=True)
            quad += np.sum(S**2)
    return float(quad + ev.lam @ problem.y)


def grad_G(problem: SosProblem, lam) -> np.ndarray:
    ev = evaluate(problem, lam, 1)
    if not ev.in_domain:
        raise OutOfDomain("gradient requested outside the domain")
    return ev.gradient


def hess_G(problem: SosProblem, lam) -> np.ndarray:
    ev = evaluate(problem, lam, 2)
    if not ev.in_domain:
        raise OutOfDomain("Hessian requested outside the domain")
    return ev.hessian


def min_eig_M(problem: SosProblem, lam) -> float:
    return min(np.linalg.eigvalsh(Mj)[0] for Mj in M_blocks(problem, lam) if Mj.size)


@dataclass
class Certificate:
    """Weighted SOS produced by a multiplier.

    ``q_coeffs[j]`` is an ``(r_j, r_j)`` array whose columns are the
    coefficient vectors of the polynomials q_ij multiplying weight ``j``;
    these are the columns of the j-th diagonal block of M(lam)^-1.
    """

    q_coeffs: list[np.ndarray]
    lambda_star: np.ndarray
    residual: np.ndarray
    status: str = "unknown"

    def nonzero_counts(self, rel_tol: float = 0.0) -> list[int]:
        counts = []
        for Q in self.q_coeffs:
            if Q.size == 0:
                counts.append(0)
                continue
            norms = np.linalg.norm(Q, axis=0)
            counts.append(int(np.sum(norms > rel_tol * norms.max())))
        return counts


def extract_certificate(problem: SosProblem, lam, status: str = "unknown") -> Certificate:
    ev = evaluate(problem, lam, 1)
    if not ev.in_domain:
        raise OutOfDomain("certificate requested outside the domain")
    return certificate_from_evaluation(ev, status)


def certificate_from_evaluation(ev: DualEvaluation, status: str = "unknown") -> Certificate:
    return Certificate(
        q_coeffs=[U.copy() for U in ev.M_inv],
        lambda_star=ev.lam.copy(),
        residual=ev.gradient.copy(),
        status=status,
    )


def eval_p_lambda(certificate: Certificate, problem: SosProblem, x) -> float | np.ndarray:
    """sum_j g_j(x) sum_i q_ij(x)^2; vectorized over arrays of points."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 if problem.basis.dimension == 1 else arr.ndim == 1
    pts = _as_points(problem.basis, arr)
    gx = weight_values(problem, pts)
    total = np.zeros(len(pts))
    for j, Q in enumerate(certificate.q_coeffs):
        w = basis_matrix(problem.basis, problem.block_degrees[j], pts)
        total += gx[j] * np.sum((w @ Q) ** 2, axis=1)
    return float(total[0]) if single else total


def eval_p_B(problem: SosProblem, x) -> float | np.ndarray:
    """Trace polynomial p_B(x) = tr B(x) = sum_j g_j(x) ||w_j(x)||^2."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 if problem.basis.dimension == 1 else arr.ndim == 1
    pts = _as_points(problem.basis, arr)
    gx = weight_values(problem, pts)
    total = sum(
        gx[j] * np.sum(basis_matrix(problem.basis, k, pts) ** 2, axis=1)
        for j, k in enumerate(problem.block_degrees)
    )
    return float(total[0]) if single else total


def p_B_nodes(problem: SosProblem) -> np.ndarray:
    """p_B at the nodes, i.e. tr(B_r)."""
    return sum(gj * np.sum(Wj**2, axis=1) for Wj, gj in zip(problem.W, problem.g))


def in_asymptotic_cone(problem: SosProblem, lam, tol: float = 1e-10) -> bool:
    """True iff sum_r lam_r B_r is positive semidefinite (relative tolerance)."""
    eigs = [np.linalg.eigvalsh(A) for A in lambda_blocks(problem, lam) if A.size]
    scale = max(np.abs(e).max() for e in eigs)
    return min(e[0] for e in eigs) >= -tol * scale
