import functools

import numpy as np
import pytest

from sos_certify import (
    MONOMIAL_1D,
    build_preset,
    build_segment_problem,
    build_triangle_problem,
    get_weight,
    make_points_segment,
)
from sos_certify.core import SosProblem


def tiny_problem(y=(1.0, 1.0)):
    """n = 1 on [0, 1] with monomials: B_1 = diag(0, 1), B_2 = diag(1, 0)."""
    pts = make_points_segment(1)
    return SosProblem(1, [get_weight("x"), get_weight("1-x")], MONOMIAL_1D, pts, y)


@functools.lru_cache(maxsize=None)
def preset(name):
    return build_preset(name)


@functools.lru_cache(maxsize=None)
def cheb9():
    return build_segment_problem(9, lambda x: np.cos(3 * x) + 2)


@functools.lru_cache(maxsize=None)
def triangle3():
    return build_triangle_problem(3, lambda p: 1 + p[:, 0] ** 3 + p[:, 1])


@pytest.fixture
def tiny():
    return tiny_problem()


@pytest.fixture
def test1():
    return preset("test1")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (len(k), k)):
        terminalreporter.write_line(RESULTS[key])
