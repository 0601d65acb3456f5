"""Independent checks of the dual barrier and of produced certificates.

Everything here deliberately avoids the blockwise fast paths of ``core``:
derivatives are compared against central differences and against a dense
evaluation that works with the full matrices ``B_r``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .basis import BasisFamily, Domain, LagrangeBasis
from .core import (
    Certificate,
    SosProblem,
    assemble_B,
    eval_G,
    eval_p_lambda,
    evaluate,
    in_asymptotic_cone,
    in_domain,
    lambda_blocks,
)
from .errors import InsufficientMargin, InvalidInput

GRAD_TOL = 1e-6
HESS_TOL = 1e-5
RESIDUAL_TOL = 1e-6
POSITIVITY_TOL = 1e-10
INDEPENDENCE_TOL = 1e-10
LAGRANGE_TOL = 1e-10
HANKEL_TOL = 1e-12
GRID_1D = 10_000
GRID_2D = 200
MAX_SHRINK = 3


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``passed`` is true exactly when ``metric <= tolerance``; composite reports
    list their parts in ``parts`` and pass when every part passes.
    """

    name: str
    passed: bool
    metric: float
    tolerance: float
    location: Any = None
    seed: int | None = None
    details: dict = field(default_factory=dict)
    parts: list["VerificationReport"] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["location"] = _jsonable(self.location)
        out["details"] = _jsonable(self.details)
        out["parts"] = [p.to_dict() for p in self.parts]
        return out


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _report(name, metric, tol, **kw) -> VerificationReport:
    metric = float(metric)
    return VerificationReport(name, bool(metric <= tol), metric, tol, **kw)


def _composite(name, parts, **kw) -> VerificationReport:
    worst = max(parts, key=lambda p: p.metric / p.tolerance if p.tolerance else p.metric)
    return VerificationReport(
        name,
        all(p.passed for p in parts),
        worst.metric,
        worst.tolerance,
        location=worst.name,
        parts=list(parts),
        **kw,
    )


# --------------------------------------------------------------------------
# dense reference evaluation


def dense_derivatives(problem: SosProblem, lam):
    """G, gradient and Hessian from the full matrices.

    Uses ``grad_r = y_r - tr(M^-1 B_r M^-1)`` and
    ``H_rs = 2 tr(M^-1 B_r M^-1 B_s M^-1)`` with explicit inverses, which
    is slow but shares no code with the blockwise evaluation.

    Returns
    -------
    (G, grad, hess) or (inf, None, None) outside the domain.
    """
    lam = np.asarray(lam, dtype=float)
    B = problem.B
    M = np.eye(problem.size) + np.tensordot(lam, B, axes=1)
    eig = np.linalg.eigvalsh(M)
    if eig[0] <= 0:
        return np.inf, None, None
    Minv = np.linalg.inv(M)
    G = np.trace(Minv) + lam @ problem.y
    Minv2 = Minv @ Minv
    grad = problem.y - np.einsum("ij,rji->r", Minv2, B)
    C = np.einsum("ij,rjk->rik", Minv, B)  # M^-1 B_r
    D = np.einsum("rij,jk->rik", C, Minv)  # M^-1 B_r M^-1
    hess = 2.0 * np.einsum("rij,sji->rs", D, C)
    return float(G), grad, 0.5 * (hess + hess.T)


def random_in_domain(problem: SosProblem, count: int, seed: int = 0, max_tries: int = 10_000):
    """Seeded rejection sampling of multipliers inside the domain.

    Draws centered Gaussians with scale ``0.5 / max_r ||B_r||`` and keeps
    the in-domain ones.
    """
    rng = np.random.default_rng(seed)
    scale = 0.5 / float(np.max(problem.B_norms))
    out = []
    for _ in range(max_tries):
        lam = rng.normal(scale=scale, size=problem.r_star)
        if in_domain(problem, lam):
            out.append(lam)
            if len(out) == count:
                return out
    raise InsufficientMargin(f"only {len(out)} of {count} samples landed in the domain")


def _margin_step(problem: SosProblem, lam, h: float) -> float:
    """Largest admissible step among h, h/10, ... (at most three shrinks)."""
    eye = np.eye(problem.r_star)
    for _ in range(MAX_SHRINK + 1):
        if all(in_domain(problem, lam + s * h * e) for e in eye for s in (1, -1)):
            return h
        h /= 10
    raise InsufficientMargin("no finite-difference stencil fits inside the domain")


# --------------------------------------------------------------------------
# derivative checks


def fd_gradient_check(problem: SosProblem, lam, h: float = 1e-6, tol: float = GRAD_TOL):
    """Central differences of G against the analytic gradient.

    The metric is ``max_r |fd_r - grad_r| / (1 + ||grad||_inf)``.
    """
    lam = np.asarray(lam, dtype=float)
    h = _margin_step(problem, lam, h)
    grad = evaluate(problem, lam, 1).gradient
    fd = np.empty_like(grad)
    for r in range(problem.r_star):
        e = np.zeros_like(lam)
        e[r] = h
        fd[r] = (eval_G(problem, lam + e) - eval_G(problem, lam - e)) / (2 * h)
    err = np.abs(fd - grad)
    metric = err.max() / (1.0 + np.abs(grad).max())
    return _report(
        "fd_gradient", metric, tol, location=lam, details={"h": h, "worst_index": int(err.argmax())}
    )


def fd_hessian_check(problem: SosProblem, lam, h: float = 1e-5, tol: float = HESS_TOL):
    """Central differences of the gradient against the analytic Hessian."""
    lam = np.asarray(lam, dtype=float)
    h = _margin_step(problem, lam, h)
    hess = evaluate(problem, lam, 2).hessian
    fd = np.empty_like(hess)
    for r in range(problem.r_star):
        e = np.zeros_like(lam)
        e[r] = h
        gp = evaluate(problem, lam + e, 1).gradient
        gm = evaluate(problem, lam - e, 1).gradient
        fd[:, r] = (gp - gm) / (2 * h)
    fd = 0.5 * (fd + fd.T)
    err = np.abs(fd - hess)
    metric = err.max() / (1.0 + np.abs(hess).max())
    worst = np.unravel_index(err.argmax(), err.shape)
    asym = np.linalg.norm(hess - hess.T) / max(np.linalg.norm(hess), 1e-300)
    return _report(
        "fd_hessian",
        metric,
        tol,
        location=lam,
        details={"h": h, "worst_entry": [int(i) for i in worst], "asymmetry": asym},
    )


def dense_agreement_check(problem: SosProblem, lam, tol: float = 1e-9):
    """Blockwise evaluation against :func:`dense_derivatives` (relative max error)."""
    G, grad, hess = dense_derivatives(problem, lam)
    ev = evaluate(problem, lam, 2)
    if grad is None or not ev.in_domain:
        same = (grad is None) == (not ev.in_domain)
        return _report("dense_agreement", 0.0 if same else np.inf, tol, location=lam)
    errs = [
        abs(G - ev.value) / (1 + abs(G)),
        np.abs(grad - ev.gradient).max() / (1 + np.abs(grad).max()),
        np.abs(hess - ev.hessian).max() / (1 + np.abs(hess).max()),
    ]
    return _report("dense_agreement", max(errs), tol, location=lam, details={"errors": errs})


# --------------------------------------------------------------------------
# certificates


def evaluation_grid(problem: SosProblem, density: int | None = None) -> np.ndarray:
    """Sampling grid of the domain: uniform in 1D, barycentric lattice in 2D."""
    if problem.points.domain is Domain.SEGMENT:
        return np.linspace(0.0, 1.0, density or GRID_1D)
    N = density or GRID_2D
    return np.array([(i / N, j / N) for j in range(N + 1) for i in range(N + 1 - j)])


PROFILES = {
    "full": ("interpolation", "positivity", "sparsity"),
    "interpolation": ("interpolation", "sparsity"),
    "positivity": ("positivity", "sparsity"),
}


def verify_certificate(
    problem: SosProblem,
    certificate: Certificate,
    grid_density: int | None = None,
    profile: str = "full",
) -> VerificationReport:
    """Check that a certificate interpolates the data and is nonnegative.

    Parameters
    ----------
    grid_density : int, optional
        Number of grid points in 1D, lattice order in 2D.
    profile : {"full", "interpolation", "positivity"}
        Which parts to include; the block sparsity bound is always checked.
    """
    if profile not in PROFILES:
        raise InvalidInput(f"unknown profile {profile!r}")
    scale = 1.0 + float(np.max(np.abs(problem.y)))
    parts = []
    wanted = PROFILES[profile]
    if "interpolation" in wanted:
        fit = eval_p_lambda(certificate, problem, problem.points.nodes)
        res = np.abs(problem.y - fit)
        parts.append(
            _report(
                "interpolation", res.max() / scale, RESIDUAL_TOL,
                location=problem.points.nodes[int(res.argmax())],
            )
        )
    if "positivity" in wanted:
        grid = evaluation_grid(problem, grid_density)
        vals = eval_p_lambda(certificate, problem, grid)
        k = int(vals.argmin())
        parts.append(
            _report(
                "positivity", max(0.0, -vals[k]) / scale, POSITIVITY_TOL,
                location=grid[k], details={"grid_min": float(vals[k]), "grid_size": len(grid)},
            )
        )
    counts = certificate.nonzero_counts()
    excess = max(c - r for c, r in zip(counts, problem.block_sizes))
    parts.append(
        _report("sparsity", max(0, excess), 0, details={"nonzero": counts, "bound": problem.block_sizes})
    )
    return _composite("certificate", parts, details={"profile": profile})


# --------------------------------------------------------------------------
# structural checks


def check_linear_independence(problem_or_B, tol: float = INDEPENDENCE_TOL) -> VerificationReport:
    """Numerical rank of the family B_r.

    Accepts a problem or a raw stack of shape (r*, N, N).  The metric is
    ``1 - sigma_min / sigma_max`` so that failure means a ratio below ``tol``.
    """
    B = problem_or_B.B if isinstance(problem_or_B, SosProblem) else np.asarray(problem_or_B)
    A = B.reshape(B.shape[0], -1)
    s = np.linalg.svd(A, compute_uv=False)
    ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    rep = VerificationReport(
        "linear_independence", ratio > tol, ratio, tol, details={"sigma_max": float(s[0])}
    )
    return rep


def random_domain_points(domain: Domain, count: int, rng) -> np.ndarray:
    if domain is Domain.SEGMENT:
        return rng.uniform(0.0, 1.0, count)
    u = rng.uniform(size=(count, 2))
    flip = u.sum(axis=1) > 1
    u[flip] = 1 - u[flip]
    return u


def lagrange_identity_check(problem: SosProblem, samples: int = 50, seed: int = 0):
    """``B(x) = sum_r l_r(x) B_r`` at random points of the domain."""
    rng = np.random.default_rng(seed)
    lag = LagrangeBasis(problem.points, problem.basis, problem.n)
    xs = random_domain_points(problem.points.domain, samples, rng)
    L = lag(xs)
    scale = float(np.max(problem.B_norms))
    worst, where = 0.0, None
    for x, l in zip(xs, L):
        gap = np.linalg.norm(assemble_B(problem, x) - np.tensordot(l, problem.B, axes=1), 2)
        if gap >= worst:
            worst, where = gap, x
    return _report("lagrange_identity", worst / scale, LAGRANGE_TOL, location=where, seed=seed)


def lagrange_cone_membership(
    problem: SosProblem, samples: int = 50, seed: int = 0, target=None, mix: int = 4
) -> VerificationReport:
    """Lagrange vectors at points of the domain lie in the recession cone.

    Also checks random convex combinations of ``mix`` such vectors and the
    growth bound ``G(t L(x)) <= N + t p(x)`` for t in {1, 10, 100}, where
    ``p`` is ``target`` if given and the interpolant of the data otherwise.
    """
    rng = np.random.default_rng(seed)
    lag = LagrangeBasis(problem.points, problem.basis, problem.n)
    xs = random_domain_points(problem.points.domain, samples, rng)
    L = lag(xs)
    failures = 0
    for l in L:
        failures += not in_asymptotic_cone(problem, l)
    for _ in range(samples):
        idx = rng.choice(samples, size=min(mix, samples), replace=False)
        w = rng.dirichlet(np.ones(len(idx)))
        failures += not in_asymptotic_cone(problem, w @ L[idx])
    worst_excess = 0.0
    for x, l in zip(xs, L):
        px = float(target(np.atleast_1d(x) if problem.basis.dimension == 1 else x[None])[0]) \
            if target is not None else float(l @ problem.y)
        for t in (1.0, 10.0, 100.0):
            excess = eval_G(problem, t * l) - (problem.size + t * px)
            worst_excess = max(worst_excess, excess)
    parts = [
        _report("cone_membership", failures, 0, details={"samples": 2 * samples}),
        _report("growth_bound", max(worst_excess, 0.0), 1e-8),
    ]
    return _composite("lagrange_cone", parts, seed=seed)


def hankel_structure_check(problem: SosProblem, lam, tol: float = HANKEL_TOL) -> VerificationReport:
    """Blocks of ``sum_r lam_r B_r`` are Hankel in the monomial basis."""
    if problem.basis.family is not BasisFamily.MONOMIAL_1D:
        raise InvalidInput("the Hankel structure only holds for the 1D monomial basis")
    worst = 0.0
    for A in lambda_blocks(problem, lam):
        k = A.shape[0]
        if k == 0:
            continue
        norm = max(np.linalg.norm(A, 2), 1e-300)
        idx = np.add.outer(np.arange(k), np.arange(k))
        for s in range(2 * k - 1):
            vals = A[idx == s]
            worst = max(worst, (vals.max() - vals.min()) / norm)
    return _report("hankel_structure", worst, tol, location=np.asarray(lam, dtype=float))


# --------------------------------------------------------------------------
# bundle


def run_suite(
    problem: SosProblem,
    certificate: Certificate | None = None,
    profile: str = "full",
    seed: int = 0,
    samples: int = 3,
) -> list[VerificationReport]:
    """Checks run by the ``verify`` command.

    The derivative checks use a few seeded random multipliers near zero,
    where the finite-difference stencils have room.
    """
    reports = []
    if certificate is not None:
        reports.append(verify_certificate(problem, certificate, profile=profile))
    if profile == "full":
        reports.append(check_linear_independence(problem))
        for lam in random_in_domain(problem, samples, seed):
            reports.append(fd_gradient_check(problem, lam))
            reports.append(fd_hessian_check(problem, lam))
        for r in reports[-2 * samples:]:
            r.seed = seed
    return reports
