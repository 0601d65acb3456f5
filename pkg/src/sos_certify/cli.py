"""Command-line front end: ``solve``, ``verify`` and ``sweep``.

Exit codes: 0 on success, 2 when a solve stops without converging or a
verification check fails, 1 on bad input or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import io, oracle
from .basis import BasisFamily, BasisSpec, Domain, NodeScheme
from .core import SosProblem
from .errors import SosError
from .problems import (
    PRESET_NAMES,
    TargetSpec,
    build_problem,
    get_preset,
    regularize_epsilon,
)
from .solvers import Method, SolverConfig, Status, solve

logger = logging.getLogger("sos_certify")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
THREADS_ENV = "SOS_CERTIFY_THREADS"

SWEEP_DEFAULTS = {
    "alpha": ("test3", [1.0, 1e-3, 1e-6, 1e-9]),
    "degree": ("test4", list(range(1, 13))),
    "method": ("test1", [m.value for m in Method]),
}


@dataclass
class RunConfig:
    """Everything needed to build one problem and run one solve."""

    preset: str | None = None
    dim: int = 1
    degree: int | None = None
    basis: str | None = None
    nodes: str = "equispaced"
    coeffs: list[float] | None = None
    params: dict = field(default_factory=dict)
    method: str = "mnewton"
    tol: float = 1e-8
    max_iter: int = 100_000
    tau0: float = 1.0
    epsilon: float | None = None
    continue_on_underflow: bool = False
    out_trace: str | None = None
    out_cert: str | None = None
    seed: int = 0

    def target(self) -> TargetSpec:
        if self.preset:
            params = dict(self.params)
            if self.preset == "test4" and self.degree is not None:
                params.setdefault("n", self.degree)
            return get_preset(self.preset, **params)
        if self.coeffs is None or self.degree is None:
            raise SosError("give --preset, or --degree with --coeffs")
        return TargetSpec.from_coefficients(self.basis_spec(), self.coeffs, self.degree)

    def basis_spec(self) -> BasisSpec:
        if self.dim == 2:
            return BasisSpec(BasisFamily.MONOMIAL_2D)
        if self.dim != 1:
            raise SosError("--dim must be 1 or 2")
        return BasisSpec(self.basis or "chebyshev")

    def problem(self) -> SosProblem:
        target = self.target()
        n = None
        if self.degree is not None and not (self.preset == "test4"):
            n = self.degree
        family = BasisFamily(self.basis) if self.basis else BasisFamily.CHEBYSHEV_1D
        if target.domain is Domain.TRIANGLE and self.basis:
            logger.info("--basis is ignored on the triangle (bivariate monomials)")
        problem = build_problem(target, n, NodeScheme(self.nodes), family)
        if self.epsilon:
            problem = regularize_epsilon(problem, self.epsilon)
        return problem

    def solver(self) -> SolverConfig:
        return SolverConfig(
            method=Method.parse(self.method),
            tol_grad=self.tol,
            max_iter=self.max_iter,
            tau0=self.tau0,
            continue_on_underflow=self.continue_on_underflow,
        )


def _params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise SosError(f"--param expects key=value, got {item!r}")
        out[key] = json.loads(value)
    return out


def _coeffs(text):
    return [float(v) for v in text.replace(",", " ").split()]


def config_from_args(args) -> RunConfig:
    return RunConfig(
        preset=args.preset,
        dim=args.dim,
        degree=args.degree,
        basis=args.basis,
        nodes=args.nodes,
        coeffs=args.coeffs,
        params=_params(args.param),
        method=args.method,
        tol=args.tol,
        max_iter=args.max_iter,
        tau0=args.tau0,
        epsilon=args.epsilon,
        continue_on_underflow=args.continue_on_underflow,
        out_trace=args.out_trace,
        out_cert=args.out_cert,
        seed=args.seed,
    )


def _run(config: RunConfig):
    problem = config.problem()
    cert, trace = solve(problem, config.solver())
    if config.out_trace:
        io.write_trace_csv(trace, config.out_trace)
    if config.out_cert:
        io.save_certificate(problem, cert, config.out_cert)
    return problem, cert, trace


def cmd_solve(config: RunConfig) -> int:
    problem, cert, trace = _run(config)
    summary = trace.summary()
    summary["problem"] = problem.label or repr(problem)
    print(json.dumps(summary, default=str))
    return EXIT_OK if trace.status is Status.CONVERGED else EXIT_FAIL


def cmd_verify(config: RunConfig, cert_path=None, profile="full", out_report=None) -> int:
    if cert_path:
        problem, cert = io.load_certificate(cert_path)
    elif config.preset or config.coeffs is not None:
        problem, cert, _ = _run(config)
    else:
        raise SosError("verify needs --cert or a problem to solve")
    reports = oracle.run_suite(problem, cert, profile=profile, seed=config.seed)
    for rep in reports:
        print(f"{'PASS' if rep.passed else 'FAIL'} {rep.name}: {rep.metric:.3e} (tol {rep.tolerance:g})")
    if out_report:
        io.save_reports(reports, out_report, {"profile": profile, "seed": config.seed})
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _sweep_member(args):
    axis, value, base = args
    cfg = RunConfig(**{**base, "out_trace": None, "out_cert": None})
    if axis == "alpha":
        cfg.params = {**cfg.params, "alpha": value}
    elif axis == "degree":
        cfg.params = {**cfg.params, "n": value} if cfg.preset == "test4" else cfg.params
        cfg.degree = value
    else:
        cfg.method = value
    _, _, trace = _run(cfg)
    last = trace.rows[-1]
    return [value, trace.iterations, last.grad_norm, last.cond_H, trace.lambda_norm, trace.status.value]


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise SosError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def cmd_sweep(config: RunConfig, axis: str, values=None, out=None) -> int:
    if axis not in SWEEP_DEFAULTS:
        raise SosError(f"unknown sweep axis {axis!r}; use one of {sorted(SWEEP_DEFAULTS)}")
    default_preset, default_values = SWEEP_DEFAULTS[axis]
    if config.preset is None:
        config.preset = default_preset
    if values is None:
        values = default_values
    elif axis == "method":
        values = [Method.parse(v).value for v in values]
    elif axis == "degree":
        values = [int(v) for v in values]
    else:
        values = [float(v) for v in values]
    base = dict(config.__dict__)
    jobs = [(axis, v, base) for v in values]
    workers = min(thread_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_member, jobs))  # map keeps input order
    else:
        rows = [_sweep_member(job) for job in jobs]
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([axis, "iterations", "final_grad_norm", "cond_H", "lambda_norm", "status"])
        for row in rows:
            writer.writerow([io._fmt(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    finally:
        if out:
            fh.close()
    return EXIT_OK


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--preset", choices=PRESET_NAMES)
    g.add_argument("--dim", type=int, default=1, choices=(1, 2))
    g.add_argument("--degree", type=int)
    g.add_argument("--basis", choices=("monomial", "chebyshev"))
    g.add_argument("--nodes", choices=("equispaced", "chebyshev"), default="equispaced")
    g.add_argument("--coeffs", type=_coeffs, help="target coefficients in the chosen basis")
    g.add_argument("--param", action="append", help="preset parameter key=value, e.g. alpha=1e-3")
    g.add_argument("--epsilon", type=float, help="add epsilon * p_B to the data")
    s = p.add_argument_group("solver")
    s.add_argument("--method", default="mnewton",
                   help="gd, euler, newton, mnewton, bb1 or bb2 (default mnewton)")
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-iter", type=int, default=100_000)
    s.add_argument("--tau0", type=float, default=1.0)
    s.add_argument("--continue-on-underflow", action="store_true",
                   help="take a minimal step instead of stopping when no step decreases the error")
    o = p.add_argument_group("output")
    o.add_argument("--out-trace", metavar="PATH")
    o.add_argument("--out-cert", metavar="PATH")
    o.add_argument("--seed", type=int, default=0)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; argparse's own 2 would read as "not converged"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sos-certify", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_solve = sub.add_parser("solve", help="run one solve")
    _add_problem_args(p_solve)
    p_verify = sub.add_parser("verify", help="check a certificate file or a fresh solve")
    _add_problem_args(p_verify)
    p_verify.add_argument("--cert", metavar="PATH")
    p_verify.add_argument("--profile", choices=tuple(oracle.PROFILES), default="full")
    p_verify.add_argument("--out-report", metavar="PATH")
    p_sweep = sub.add_parser("sweep", help="solve a family and tabulate the results")
    _add_problem_args(p_sweep)
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument("--values", nargs="+")
    p_sweep.add_argument("--out", metavar="PATH")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        config = config_from_args(args)
        if args.command == "solve":
            return cmd_solve(config)
        if args.command == "verify":
            return cmd_verify(config, args.cert, args.profile, args.out_report)
        return cmd_sweep(config, args.axis, args.values, args.out)
    except (SosError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"sos-certify: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
