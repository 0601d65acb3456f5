"""Trace CSV and certificate JSON files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .basis import BasisSpec, Domain, PointSet
from .core import Certificate, SosProblem, get_weight
from .errors import InvalidInput
from .solvers import IterationTrace, TraceRow

TRACE_HEADER = ("iter", "G", "grad_norm", "tau", "cond_H", "min_eig_M")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_trace_csv(trace: IterationTrace, path) -> None:
    """One row per iterate; floats with 17 significant digits, cond_H may be empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for row in trace.rows:
            writer.writerow([_fmt(getattr(row, name)) for name in TRACE_HEADER])


def read_trace_csv(path) -> list[TraceRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_HEADER:
            raise InvalidInput(f"{path}: unexpected trace header {reader.fieldnames}")
        rows = []
        for rec in reader:
            rows.append(
                TraceRow(
                    int(rec["iter"]),
                    float(rec["G"]),
                    float(rec["grad_norm"]),
                    float(rec["tau"]),
                    float(rec["cond_H"]) if rec["cond_H"] else None,
                    float(rec["min_eig_M"]),
                )
            )
    return rows


def problem_to_dict(problem: SosProblem) -> dict:
    return {
        "dim": problem.basis.dimension,
        "n": problem.n,
        "weights": [w.name for w in problem.weights],
        "basis": problem.basis.family.value,
        "nodes": problem.points.nodes.tolist(),
        "y": problem.y.tolist(),
        "label": problem.label,
        "epsilon": problem.epsilon,
    }


def problem_from_dict(data: dict) -> SosProblem:
    try:
        basis = BasisSpec(data["basis"])
        domain = Domain.SEGMENT if int(data["dim"]) == 1 else Domain.TRIANGLE
        if basis.dimension != int(data["dim"]):
            raise InvalidInput("basis does not match dim")
        n = int(data["n"])
        points = PointSet(np.array(data["nodes"], dtype=float), domain, n)
        weights = [get_weight(name) for name in data["weights"]]
        return SosProblem(
            n, weights, basis, points, data["y"],
            label=data.get("label", ""),
            epsilon=float(data.get("epsilon", 0.0)),
            waive_dimension_check=True,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed problem record: {exc}") from exc


def certificate_to_dict(problem: SosProblem, cert: Certificate) -> dict:
    """Self-contained record; ``q`` lists one coefficient vector per polynomial."""
    return {
        "problem": problem_to_dict(problem),
        "lambda": cert.lambda_star.tolist(),
        "blocks": [
            {"weight_index": j, "q": Q.T.tolist()} for j, Q in enumerate(cert.q_coeffs)
        ],
        "residual": cert.residual.tolist(),
        "status": cert.status,
    }


def certificate_from_dict(data: dict) -> tuple[SosProblem, Certificate]:
    problem = problem_from_dict(data.get("problem") or {})
    try:
        blocks = sorted(data["blocks"], key=lambda b: b["weight_index"])
        q = [np.array(b["q"], dtype=float).reshape(-1, size).T
             for b, size in zip(blocks, problem.block_sizes)]
        cert = Certificate(
            q_coeffs=q,
            lambda_star=np.array(data["lambda"], dtype=float),
            residual=np.array(data["residual"], dtype=float),
            status=str(data["status"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed certificate record: {exc}") from exc
    if len(q) != problem.j_star or cert.lambda_star.shape != (problem.r_star,):
        raise InvalidInput("certificate does not match its problem")
    return problem, cert


def save_certificate(problem: SosProblem, cert: Certificate, path) -> None:
    Path(path).write_text(json.dumps(certificate_to_dict(problem, cert), indent=1))


def load_certificate(path) -> tuple[SosProblem, Certificate]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: expected a JSON object")
    return certificate_from_dict(data)


def save_reports(reports, path, extra: dict | None = None) -> None:
    bundle = dict(extra or {})
    bundle["passed"] = all(r.passed for r in reports)
    bundle["reports"] = [r.to_dict() for r in reports]
    Path(path).write_text(json.dumps(bundle, indent=1, default=_json_default))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)
