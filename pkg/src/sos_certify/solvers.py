"""Descent and Newton-type iterations for minimizing G.

Every method fits ``lam <- lam - tau * H^-1 grad G(lam)`` starting from
``lam = 0``; the methods differ by ``H`` and by the step-size rule.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import (
    Certificate,
    DualEvaluation,
    SosProblem,
    certificate_from_evaluation,
    evaluate,
    lambda_blocks,
)
from .errors import InvalidInput, OutOfDomain, SolveError

logger = logging.getLogger(__name__)

K_LIMIT = 60
BB_SAFETY = 0.99
H_PIVOT_REL = 1e-20
H_REG_REL = 1e-12
H_REG_ATTEMPTS = 6


class Method(str, enum.Enum):
    GRADIENT_DESCENT = "gd"
    IMPLICIT_EULER = "euler"
    NEWTON = "newton"
    MODIFIED_NEWTON = "mnewton"
    BB1 = "bb1"
    BB2 = "bb2"

    @classmethod
    def parse(cls, value) -> "Method":
        aliases = {
            "gradient-descent": "gd",
            "implicit-euler": "euler",
            "modified-newton": "mnewton",
        }
        if isinstance(value, cls):
            return value
        return cls(aliases.get(str(value).lower(), str(value).lower()))

    @property
    def newton_type(self) -> bool:
        return self in (Method.NEWTON, Method.MODIFIED_NEWTON)

    @property
    def barzilai_borwein(self) -> bool:
        return self in (Method.BB1, Method.BB2)

    @property
    def uses_hessian(self) -> bool:
        return self in (Method.IMPLICIT_EULER, Method.NEWTON, Method.MODIFIED_NEWTON)


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIterReached"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass
class SolverConfig:
    method: Method = Method.MODIFIED_NEWTON
    tol_grad: float = 1e-8
    max_iter: int = 100_000
    tau0: float = 1.0
    tau_min: float = 1e-16
    tau_cap: float | None = None
    record_hessian_cond: bool = True
    continue_on_underflow: bool = False

    def __post_init__(self):
        self.method = Method.parse(self.method)
        if self.tau_cap is None:
            self.tau_cap = 1.0 if self.method.newton_type else math.inf
        if not (0 < self.tau_min <= self.tau0):
            raise InvalidInput("need 0 < tau_min <= tau0")
        if not self.tol_grad > 0:
            raise InvalidInput("tol_grad must be positive")
        if self.max_iter < 0:
            raise InvalidInput("max_iter must be >= 0")


@dataclass
class TraceRow:
    iter: int
    G: float
    grad_norm: float
    tau: float
    cond_H: float | None
    min_eig_M: float


@dataclass
class IterationTrace:
    rows: list[TraceRow] = field(default_factory=list)
    status: Status | None = None
    regularizations: int = 0
    elapsed: float = 0.0
    lambda_norm: float = 0.0

    @property
    def iterations(self) -> int:
        """Number of accepted steps."""
        return self.rows[-1].iter if self.rows else 0

    @property
    def final_grad_norm(self) -> float:
        return self.rows[-1].grad_norm

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def column(self, name: str) -> np.ndarray:
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.rows]
        )

    def plateau(self, window: int = 10) -> float:
        """Mean gradient norm over the last ``window`` rows."""
        return float(np.mean(self.column("grad_norm")[-window:]))

    def summary(self) -> dict:
        last = self.rows[-1]
        return {
            "status": self.status.value if self.status else None,
            "iterations": self.iterations,
            "final_grad_norm": last.grad_norm,
            "final_G": last.G,
            "cond_H": last.cond_H,
            "lambda_norm": self.lambda_norm,
            "plateau": self.plateau(),
            "regularizations": self.regularizations,
            "elapsed": self.elapsed,
        }


def _factor_spd(H: np.ndarray):
    """Cholesky factor of H, or None if a pivot falls below the floor."""
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(L)
    floor = H_PIVOT_REL * max(np.max(np.abs(np.diag(H))), np.finfo(float).tiny)
    if not np.all(np.isfinite(L)) or np.min(d) ** 2 <= floor:
        return None
    return L


def iteration_matrix(method: Method, ev: DualEvaluation, tau: float, grad0_norm: float):
    """The matrix H_m for Hessian-based methods (None for first-order ones)."""
    if method is Method.IMPLICIT_EULER:
        return np.eye(len(ev.gradient)) + tau * ev.hessian
    if method is Method.NEWTON:
        return ev.hessian
    if method is Method.MODIFIED_NEWTON:
        g = ev.gradient
        gn = np.linalg.norm(g)
        denom = gn + grad0_norm
        alpha = gn / denom if denom > 0 else 0.0
        return alpha * np.outer(g, g) + ev.hessian
    return None


def solve_spd(H: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, int]:
    """Solve H s = rhs, shifting H by growing multiples of the identity on failure.

    Returns the solution and the number of shifts applied.
    """
    L = _factor_spd(H)
    shifts = 0
    if L is None:
        delta = H_REG_REL * max(np.trace(H), np.finfo(float).tiny) / len(H)
        eye = np.eye(len(H))
        while L is None:
            if shifts == H_REG_ATTEMPTS:
                raise SolveError("iteration matrix could not be factored")
            shifts += 1
            L = _factor_spd(H + delta * eye)
            delta *= 100.0
    return sla.cho_solve((L, True), rhs), shifts


def direction(
    method,
    problem: SosProblem,
    lam,
    grad=None,
    *,
    tau: float = 1.0,
    grad0_norm: float | None = None,
    evaluation: DualEvaluation | None = None,
) -> np.ndarray:
    """Search direction H^-1 grad G(lam) for the given method.

    ``tau`` enters only the implicit Euler matrix ``I + tau * hess``;
    ``grad0_norm`` is ``||grad G(0)||`` for the modified Newton weight and is
    computed on the fly when omitted.
    """
    method = Method.parse(method)
    ev = evaluation
    if ev is None:
        ev = evaluate(problem, lam, 2 if method.uses_hessian else 1)
        if not ev.in_domain:
            raise OutOfDomain("direction requested outside the domain")
    if grad is not None:
        ev.gradient = np.asarray(grad, dtype=float)
    if not method.uses_hessian:
        return ev.gradient.copy()
    if method is Method.MODIFIED_NEWTON and grad0_norm is None:
        grad0_norm = evaluate(problem, np.zeros(problem.r_star), 1).grad_norm
    H = iteration_matrix(method, ev, tau, grad0_norm or 0.0)
    d, _ = solve_spd(H, ev.gradient)
    return d


def tau_max_cfl(problem: SosProblem, lam, d, evaluation: DualEvaluation | None = None) -> float:
    """Largest step keeping M(lam - tau d) positive semidefinite.

    mu_min(M(lam)) / rho(sum_r d_r B_r), +inf for a zero direction matrix.
    """
    if evaluation is None:
        if not evaluate(problem, lam, 0).in_domain:
            raise OutOfDomain("CFL bound requested outside the domain")
    from .core import M_blocks

    mu_min = min(np.linalg.eigvalsh(Mj)[0] for Mj in M_blocks(problem, lam) if Mj.size)
    rho = max(
        np.abs(np.linalg.eigvalsh(A)).max() for A in lambda_blocks(problem, d) if A.size
    )
    if rho == 0:
        return math.inf
    return float(mu_min / rho)


def next_tau(tau: float, k: int, tau_min: float, tau_cap: float) -> float:
    """Halve ``k`` times after a reduction, otherwise double; clipped."""
    if k > 0:
        return max(tau * 2.0**-k, tau_min)
    return min(2.0 * tau, tau_cap)


@dataclass
class StepResult:
    tau: float  # step actually taken
    next_tau: float
    k: int
    evaluation: DualEvaluation | None  # None on underflow
    underflow: bool = False


def adaptive_tau(
    tau: float,
    problem: SosProblem,
    ev: DualEvaluation,
    d: np.ndarray,
    tau_min: float,
    tau_cap: float,
    order: int = 2,
) -> StepResult:
    """Halve the step until the gradient norm strictly decreases.

    Tries ``lam - 2^-k tau d`` for k = 0, 1, ... and accepts the first trial
    inside the domain whose gradient norm is below the current one.
    """
    current = ev.grad_norm
    for k in range(K_LIMIT + 1):
        step = tau * 2.0**-k
        trial = evaluate(problem, ev.lam - step * d, order)
        if trial.in_domain and trial.grad_norm < current:
            return StepResult(step, next_tau(tau, k, tau_min, tau_cap), k, trial)
    return StepResult(0.0, tau_min, K_LIMIT + 1, None, underflow=True)


def bb_tau(
    variant,
    lam,
    lam_prev,
    g,
    g_prev,
    problem: SosProblem,
    d=None,
) -> float:
    """Barzilai-Borwein step, replaced by 0.99 * CFL bound when unusable.

    The fallback applies when the BB value exceeds the CFL bound, is not
    positive, is not finite, or has a zero denominator.
    """
    variant = Method.parse(variant)
    s = np.asarray(lam, dtype=float) - np.asarray(lam_prev, dtype=float)
    yv = np.asarray(g, dtype=float) - np.asarray(g_prev, dtype=float)
    sy = float(s @ yv)
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant is Method.BB1:
            tau = sy / float(yv @ yv)
        elif variant is Method.BB2:
            tau = float(s @ s) / sy
        else:
            raise InvalidInput("bb_tau needs bb1 or bb2")
    cfl = tau_max_cfl(problem, lam, g if d is None else d)
    if not np.isfinite(tau) or tau <= 0 or tau > cfl:
        tau = BB_SAFETY * cfl
    return float(tau)


def _row(m, ev: DualEvaluation, tau, cond_H) -> TraceRow:
    min_eig = min(np.linalg.eigvalsh(Mj)[0] for Mj in _m_blocks_from_chol(ev))
    return TraceRow(m, ev.value, ev.grad_norm, tau, cond_H, float(min_eig))


def _m_blocks_from_chol(ev: DualEvaluation):
    return [L @ L.T for L in ev.chol_M if L.size]


def _cond(H: np.ndarray) -> float:
    eig = np.abs(np.linalg.eigvalsh(H))
    return float(eig.max() / eig.min()) if eig.min() > 0 else math.inf


def solve(problem: SosProblem, config: SolverConfig | None = None) -> tuple[Certificate, IterationTrace]:
    """Minimize G from lam = 0 and extract the certificate at the last iterate."""
    config = config or SolverConfig()
    method = config.method
    start = time.perf_counter()
    order = 2 if method.uses_hessian else 1
    ev = evaluate(problem, np.zeros(problem.r_star), order)
    grad0_norm = ev.grad_norm
    trace = IterationTrace()
    tau = config.tau0
    prev = None  # (lam, grad) of the previous iterate for BB steps
    m = 0
    while True:
        if ev.grad_norm <= config.tol_grad:
            trace.status = Status.CONVERGED
        elif m >= config.max_iter:
            trace.status = Status.MAX_ITER
        if trace.status is not None:
            cond_H = None
            if method.uses_hessian and config.record_hessian_cond:
                cond_H = _cond(iteration_matrix(method, ev, tau, grad0_norm))
            trace.rows.append(_row(m, ev, tau, cond_H))
            break

        H = iteration_matrix(method, ev, tau, grad0_norm)
        cond_H = _cond(H) if H is not None and config.record_hessian_cond else None
        if H is None:
            d = ev.gradient.copy()
        else:
            d, shifts = solve_spd(H, ev.gradient)
            trace.regularizations += shifts

        if method.barzilai_borwein:
            if prev is None:
                step = min(config.tau0, BB_SAFETY * tau_max_cfl(problem, ev.lam, d, ev))
            else:
                step = bb_tau(method, ev.lam, prev[0], ev.gradient, prev[1], problem, d)
            new = evaluate(problem, ev.lam - step * d, order)
            if not new.in_domain:
                trace.rows.append(_row(m, ev, step, cond_H))
                trace.status = Status.STEP_UNDERFLOW
                break
            trace.rows.append(_row(m, ev, step, cond_H))
            prev = (ev.lam, ev.gradient)
            ev = new
            m += 1
            continue

        cap = config.tau_cap
        if method in (Method.GRADIENT_DESCENT, Method.IMPLICIT_EULER):
            cap = min(cap, 1.0, tau_max_cfl(problem, ev.lam, d, ev))
        tau = min(tau, cap)
        res = adaptive_tau(tau, problem, ev, d, config.tau_min, cap, order)
        if res.underflow:
            forced = evaluate(problem, ev.lam - config.tau_min * d, order)
            if not (config.continue_on_underflow and forced.in_domain):
                trace.rows.append(_row(m, ev, 0.0, cond_H))
                trace.status = Status.STEP_UNDERFLOW
                break
            trace.rows.append(_row(m, ev, config.tau_min, cond_H))
            tau = config.tau_min
            ev = forced
        else:
            trace.rows.append(_row(m, ev, res.tau, cond_H))
            tau = res.next_tau
            ev = res.evaluation
        m += 1

    trace.elapsed = time.perf_counter() - start
    trace.lambda_norm = float(np.linalg.norm(ev.lam))
    if ev.gradient is None:
        ev = evaluate(problem, ev.lam, 1)
    logger.debug("%s: %s after %d iterations", problem.label, trace.status, m)
    return certificate_from_evaluation(ev, trace.status.value), trace
