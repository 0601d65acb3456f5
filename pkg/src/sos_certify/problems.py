"""Problem builders for the segment and the unit triangle, plus the presets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .basis import (
    CHEBYSHEV_1D,
    MONOMIAL_1D,
    MONOMIAL_2D,
    BasisFamily,
    BasisSpec,
    Domain,
    NodeScheme,
    PointSet,
    _as_points,
    eval_poly,
    make_points_segment,
    make_points_triangle,
)
from .core import SosProblem, get_weight, p_B_nodes
from .errors import InvalidInput, UnknownPreset


def shifted_chebyshev(k: int, x) -> np.ndarray:
    """T_k on [0, 1]: T_k((cos t + 1) / 2) = cos(k t)."""
    coef = np.zeros(k + 1)
    coef[k] = 1.0
    return npcheb.chebval(2.0 * np.asarray(x, dtype=float) - 1.0, coef)


def motzkin(pts) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    return x**2 * y**4 + y**2 * x**4 - 3 * x**2 * y**2 + 1


@dataclass(frozen=True)
class TargetSpec:
    """A polynomial to certify, given as a function, coefficients or node values.

    Exactly one of ``func`` and ``values`` is set.  ``func`` receives an array
    of points, shape (m,) in 1D or (m, 2) in 2D.
    """

    name: str
    degree: int
    domain: Domain = Domain.SEGMENT
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    values: tuple[float, ...] | None = None
    unweighted: bool = False
    params: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_coefficients(cls, basis: BasisSpec, coeffs, degree: int, name="coefficients"):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (basis.size(degree),):
            raise InvalidInput("coefficient count does not match the basis dimension")
        domain = Domain.SEGMENT if basis.dimension == 1 else Domain.TRIANGLE
        return cls(
            name, degree, domain,
            func=lambda pts: eval_poly(coeffs, basis, degree, pts),
            params={"basis": basis.family.value, "coefficients": coeffs.tolist()},
        )

    @classmethod
    def from_values(cls, values, degree: int, domain=Domain.SEGMENT, name="values"):
        domain = Domain(domain)
        expected = degree + 1 if domain is Domain.SEGMENT else (degree + 1) * (degree + 2) // 2
        values = tuple(float(v) for v in values)
        if len(values) != expected:
            raise InvalidInput(f"expected {expected} node values")
        return cls(name, degree, domain, values=values)

    def at_nodes(self, points: PointSet) -> np.ndarray:
        if self.values is not None:
            if len(self.values) != len(points):
                raise InvalidInput("node value count does not match the node set")
            return np.array(self.values)
        return self(points.nodes)

    def __call__(self, x) -> np.ndarray:
        if self.func is None:
            raise InvalidInput(f"target {self.name!r} is only known at the nodes")
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)


def _target_values(target, points: PointSet) -> np.ndarray:
    if isinstance(target, TargetSpec):
        return target.at_nodes(points)
    if callable(target):
        return np.asarray(target(points.nodes), dtype=float)
    return np.asarray(target, dtype=float)


def segment_weights(n: int):
    """Markov-Lukacs weights: (x, 1-x) for odd n, (1, x(1-x)) for even n."""
    names = ("x", "1-x") if n % 2 else ("1", "x(1-x)")
    return [get_weight(s) for s in names]


def triangle_weights(n: int):
    if n % 2:
        names = ("mu1", "mu2", "mu3", "mu1*mu2*mu3")
    else:
        names = ("mu2*mu3", "mu3*mu1", "mu1*mu2", "1")
    return [get_weight(s) for s in names]


def build_segment_problem(
    n: int,
    target,
    scheme=NodeScheme.EQUISPACED,
    basis_family=BasisFamily.CHEBYSHEV_1D,
    label: str = "",
) -> SosProblem:
    """Univariate problem on [0, 1] with the Lukacs weights."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    basis = BasisSpec(basis_family)
    if basis.dimension != 1:
        raise InvalidInput("segment problems need a univariate basis")
    points = make_points_segment(n, scheme)
    y = _target_values(target, points)
    return SosProblem(n, segment_weights(n), basis, points, y, label=label)


def build_triangle_problem(n: int, target, label: str = "") -> SosProblem:
    """Bivariate problem on the unit triangle with barycentric weights."""
    if n < 2:
        raise InvalidInput("triangle problems need n >= 2")
    points = make_points_triangle(n)
    y = _target_values(target, points)
    return SosProblem(n, triangle_weights(n), MONOMIAL_2D, points, y, label=label)


def build_triangle_problem_unweighted(n: int, target, label: str = "") -> SosProblem:
    """Four blocks with weight 1 and degree n/2; block sizes exceed the node count."""
    if n % 2 or n < 2:
        raise InvalidInput("the unweighted variant needs an even n >= 2")
    points = make_points_triangle(n)
    y = _target_values(target, points)
    weights = [get_weight("1")] * 4
    return SosProblem(
        n, weights, MONOMIAL_2D, points, y, label=label, waive_dimension_check=True
    )


def default_epsilon(problem: SosProblem) -> float:
    return 1e-8 * float(np.max(np.abs(problem.y)))


def regularize_epsilon(problem: SosProblem, epsilon: float | None = None) -> SosProblem:
    """Copy with y_r + epsilon * p_B(x_r); makes G coercive for any epsilon > 0."""
    if epsilon is None:
        epsilon = default_epsilon(problem)
    if epsilon < 0:
        raise InvalidInput("epsilon must be >= 0")
    y = problem.y + epsilon * p_B_nodes(problem)
    return problem.with_y(y, epsilon=problem.epsilon + epsilon)


def _preset_table():
    tri = Domain.TRIANGLE

    def test5(p):
        return (shifted_chebyshev(4, p[:, 0]) + 1) * (shifted_chebyshev(4, p[:, 1]) + 1) / 4 + 1e-3

    return {
        "test1": lambda: TargetSpec("test1", 5, func=lambda x: x**5 + 1),
        "test2": lambda: TargetSpec("test2", 21, func=lambda x: shifted_chebyshev(21, x) + 1),
        "test3": lambda alpha=1.0: TargetSpec(
            "test3", 11,
            func=lambda x: shifted_chebyshev(11, x) + 1 + alpha,
            params={"alpha": alpha},
        ),
        "test4": lambda n=5: TargetSpec(
            "test4", n, func=lambda x: x**n + 1, params={"n": n}
        ),
        "test5": lambda: TargetSpec("test5", 8, tri, func=test5),
        "test6": lambda: TargetSpec("test6", 6, tri, func=motzkin),
        "test6-unweighted": lambda: TargetSpec(
            "test6-unweighted", 6, tri, func=motzkin, unweighted=True
        ),
    }


PRESET_NAMES = tuple(_preset_table())


def named_presets() -> list[TargetSpec]:
    """All presets with default parameters."""
    table = _preset_table()
    return [table[name]() for name in PRESET_NAMES]


def get_preset(name: str, **params) -> TargetSpec:
    table = _preset_table()
    if name not in table:
        raise UnknownPreset(name)
    return table[name](**params)


def build_problem(
    target: TargetSpec,
    n: int | None = None,
    scheme=NodeScheme.EQUISPACED,
    basis_family=BasisFamily.CHEBYSHEV_1D,
) -> SosProblem:
    """Assemble the problem matching a target's domain and variant."""
    n = target.degree if n is None else n
    if target.domain is Domain.SEGMENT:
        return build_segment_problem(n, target, scheme, basis_family, label=target.name)
    if target.unweighted:
        return build_triangle_problem_unweighted(n, target, label=target.name)
    return build_triangle_problem(n, target, label=target.name)


def build_preset(name: str, **params) -> SosProblem:
    return build_problem(get_preset(name, **params))
