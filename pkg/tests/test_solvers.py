import math

import numpy as np
import pytest

from conftest import preset, tiny_problem
from sos_certify import evaluate
from sos_certify.errors import InvalidInput, SolveError
from sos_certify.solvers import (
    K_LIMIT,
    Method,
    SolverConfig,
    Status,
    adaptive_tau,
    bb_tau,
    direction,
    iteration_matrix,
    next_tau,
    solve,
    solve_spd,
    tau_max_cfl,
)


def test_config_defaults_and_validation():
    cfg = SolverConfig("newton")
    assert cfg.tau_cap == 1.0 and cfg.tol_grad == 1e-8 and cfg.max_iter == 100_000
    assert SolverConfig("gd").tau_cap == math.inf
    assert SolverConfig("modified-newton").method is Method.MODIFIED_NEWTON
    with pytest.raises(InvalidInput):
        SolverConfig("newton", tau0=1e-20)
    with pytest.raises(InvalidInput):
        SolverConfig("newton", tol_grad=0)
    with pytest.raises(ValueError):
        SolverConfig("lbfgs")


def test_modified_newton_alpha_half_at_start(test1):
    ev = evaluate(test1, np.zeros(test1.r_star), 2)
    H = iteration_matrix(Method.MODIFIED_NEWTON, ev, 1.0, ev.grad_norm)
    np.testing.assert_allclose(H - ev.hessian, 0.5 * np.outer(ev.gradient, ev.gradient))


def test_modified_newton_degenerates_to_newton(test1):
    ev = evaluate(test1, np.zeros(test1.r_star), 2)
    g0 = ev.grad_norm
    for scale in (1e-2, 1e-4, 1e-6):
        ev.gradient = ev.gradient * scale
        gap = iteration_matrix(Method.MODIFIED_NEWTON, ev, 1.0, g0) - ev.hessian
        gn = ev.grad_norm
        assert np.linalg.norm(gap, 2) == pytest.approx(gn / (gn + g0) * gn**2, rel=1e-10)


def test_directions(test1):
    lam = np.zeros(test1.r_star)
    ev = evaluate(test1, lam, 2)
    g = ev.gradient
    np.testing.assert_array_equal(direction("gd", test1, lam), g)
    np.testing.assert_array_equal(direction("bb1", test1, lam), g)
    d = direction("newton", test1, lam)
    np.testing.assert_allclose(ev.hessian @ d, g, atol=1e-10)
    d = direction("euler", test1, lam, tau=0.3)
    np.testing.assert_allclose(d + 0.3 * ev.hessian @ d, g, atol=1e-10)
    d = direction("mnewton", test1, lam)
    np.testing.assert_allclose(0.5 * g * (g @ d) + ev.hessian @ d, g, atol=1e-10)


def test_newton_exact_on_quadratic():
    # G on the tiny problem with y=(1,1) near lam=0 is not quadratic; use H s = g directly
    H = np.array([[2.0, 0.5], [0.5, 1.0]])
    xstar = np.array([0.3, -0.7])
    lam = np.array([1.0, 2.0])
    g = H @ (lam - xstar)
    s, shifts = solve_spd(H, g)
    np.testing.assert_allclose(lam - s, xstar)
    assert shifts == 0


def test_solve_spd_regularizes_singular():
    H = np.diag([1.0, 0.0])
    s, shifts = solve_spd(H, np.array([1.0, 0.0]))
    assert shifts >= 1 and np.isfinite(s).all()
    with pytest.raises(SolveError):
        solve_spd(np.diag([1.0, -1e6]), np.ones(2))


def test_tau_max_cfl():
    tiny = tiny_problem()
    assert tau_max_cfl(tiny, [0, 0], [1, 1]) == pytest.approx(1.0)
    assert tau_max_cfl(tiny, [1, 0], [0, 2]) == pytest.approx(0.5)
    assert tau_max_cfl(tiny, [0, 0], [0, 0]) == math.inf


def test_cfl_step_stays_in_domain(test1, rng):
    from sos_certify import in_domain
    from sos_certify.oracle import random_in_domain

    for lam in random_in_domain(test1, 10, seed=4):
        d = rng.normal(size=test1.r_star) * 50
        tau = tau_max_cfl(test1, lam, d)
        for frac in (0.5, 0.9, 0.999):
            assert in_domain(test1, lam - frac * tau * d)


def test_next_tau():
    assert next_tau(0.25, 0, 1e-16, 1.0) == 0.5
    assert next_tau(1.0, 2, 1e-16, 1.0) == 0.25
    assert next_tau(1.0, 0, 1e-16, 1.0) == 1.0
    assert next_tau(1e-16, 5, 1e-16, 1.0) == 1e-16


def test_adaptive_tau_decreases_gradient(test1):
    ev = evaluate(test1, np.zeros(test1.r_star), 2)
    d = direction("newton", test1, ev.lam, evaluation=ev)
    res = adaptive_tau(1.0, test1, ev, d, 1e-16, 1.0)
    assert not res.underflow and res.k == 0 and res.tau == 1.0
    assert res.evaluation.grad_norm < ev.grad_norm
    # an ascent direction can never decrease the gradient norm of the tiny problem at 0
    tiny = tiny_problem((1.0, 1.0))
    ev = evaluate(tiny, np.zeros(2), 2)
    res = adaptive_tau(1.0, tiny, ev, np.array([1.0, 1.0]), 1e-16, 1.0)
    assert res.underflow and res.k == K_LIMIT + 1 and res.evaluation is None


def test_bb_tau():
    tiny = tiny_problem()
    far = np.array([1e-3, 1e-3])  # tiny direction: CFL bound is huge
    assert bb_tau("bb1", [1, 0], [0, 0], [2, 0], [0, 0], tiny, far) == pytest.approx(0.5)
    assert bb_tau("bb2", [1, 0], [0, 0], [2, 0], [0, 0], tiny, far) == pytest.approx(0.5)
    # quadratic with Hessian diag(1, 4): both steps are inverse Rayleigh quotients
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = 0.1 * rng.normal(size=2)
        yv = np.array([1.0, 4.0]) * s
        for variant in ("bb1", "bb2"):
            t = bb_tau(variant, s, [0, 0], yv, [0, 0], tiny, far)
            assert 0.25 - 1e-12 <= t <= 1 + 1e-12
    # a negative curvature pair falls back to 0.99 times the CFL bound
    t = bb_tau("bb1", [1, 0], [0, 0], [-2, 0], [0, 0], tiny, np.array([1.0, 1.0]))
    assert t == pytest.approx(0.99 * tau_max_cfl(tiny, [1, 0], [1, 1]))


def test_solve_trivial():
    cert, trace = solve(tiny_problem(), SolverConfig("newton"))
    assert trace.status is Status.CONVERGED and trace.iterations == 0


@pytest.mark.parametrize("method", [m.value for m in Method])
def test_all_methods_converge_on_test1(test1, method):
    cert, trace = solve(test1, SolverConfig(method))
    assert trace.converged
    assert trace.final_grad_norm <= 1e-8
    assert np.abs(cert.residual).max() <= 1e-8
    assert (trace.column("min_eig_M") > 0).all()
    grads = trace.column("grad_norm")
    if not Method(method).barzilai_borwein:
        assert np.all(np.diff(grads) < 0)
    if Method(method).uses_hessian:
        assert np.isfinite(trace.column("cond_H")).all()
    else:
        assert np.isnan(trace.column("cond_H")).all()


def test_newton_keeps_unit_step_on_test1(test1):
    _, trace = solve(test1, SolverConfig("newton"))
    assert trace.iterations == 6
    assert all(r.tau == 1.0 for r in trace.rows[:-1])


def test_newton_quadratic_rate(test1):
    _, trace = solve(test1, SolverConfig("newton", tol_grad=1e-14))
    g = trace.column("grad_norm")
    pairs = [(a, b) for a, b in zip(g[:-1], g[1:]) if a < 1e-2 and b > 1e-13]
    assert pairs
    assert max(b / a**2 for a, b in pairs) <= 1e3


def test_status_max_iter_and_underflow(test1):
    _, trace = solve(test1, SolverConfig("gd", max_iter=5))
    assert trace.status is Status.MAX_ITER and trace.iterations == 5
    assert trace.final_grad_norm > 1e-8
    _, trace = solve(test1, SolverConfig("newton", tol_grad=1e-300))
    assert trace.status is Status.STEP_UNDERFLOW


def test_trace_summary(test1):
    _, trace = solve(test1, SolverConfig("mnewton"))
    s = trace.summary()
    assert s["status"] == "Converged" and s["iterations"] == trace.iterations
    assert s["plateau"] == pytest.approx(np.mean(trace.column("grad_norm")[-10:]))
    assert trace.rows[-1].cond_H is not None


def test_deterministic(test1):
    a = solve(test1, SolverConfig("bb2"))[1].column("grad_norm")
    b = solve(test1, SolverConfig("bb2"))[1].column("grad_norm")
    np.testing.assert_array_equal(a, b)


def test_continue_on_underflow_keeps_going():
    p = preset("test6-unweighted")
    _, stop = solve(p, SolverConfig("mnewton", max_iter=50))
    _, go = solve(p, SolverConfig("mnewton", max_iter=50, continue_on_underflow=True))
    assert go.status is Status.MAX_ITER and go.iterations == 50
    assert stop.iterations <= go.iterations
    assert (go.column("min_eig_M") > 0).all()
