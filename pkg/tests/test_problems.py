import numpy as np
import pytest

from conftest import preset
from sos_certify import (
    CHEBYSHEV_1D,
    PRESET_NAMES,
    TargetSpec,
    build_segment_problem,
    build_triangle_problem,
    build_triangle_problem_unweighted,
    get_preset,
    named_presets,
    regularize_epsilon,
)
from sos_certify.basis import Domain
from sos_certify.errors import InvalidInput, UnknownPreset
from sos_certify.problems import default_epsilon, motzkin, shifted_chebyshev
from sos_certify.solvers import SolverConfig, solve


def test_segment_weights_and_blocks():
    odd = build_segment_problem(5, lambda x: x**5 + 1)
    assert [w.name for w in odd.weights] == ["x", "1-x"]
    assert odd.block_degrees == (2, 2) and odd.r_star == 6
    even = build_segment_problem(2, lambda x: 1 + x)
    assert [w.name for w in even.weights] == ["1", "x(1-x)"]
    assert even.block_sizes == (2, 1)
    assert preset("test2").r_star == 22
    with pytest.raises(InvalidInput):
        build_segment_problem(0, lambda x: x)


def test_triangle_blocks():
    p8 = preset("test5")
    assert p8.r_star == 45 and p8.block_sizes == (10, 10, 10, 15)
    assert [w.name for w in p8.weights] == ["mu2*mu3", "mu3*mu1", "mu1*mu2", "1"]
    assert preset("test6").r_star == 28
    p3 = build_triangle_problem(3, lambda p: 1 + p[:, 0])
    assert p3.block_degrees == (1, 1, 1, 0) and p3.block_sizes == (3, 3, 3, 1)
    assert [w.name for w in p3.weights] == ["mu1", "mu2", "mu3", "mu1*mu2*mu3"]
    with pytest.raises(InvalidInput):
        build_triangle_problem(1, lambda p: 1 + p[:, 0])


def test_weights_match_barycentric():
    p = preset("test5")
    x, y = p.points.nodes.T
    mu1, mu2, mu3 = 1 - x - y, x, y
    np.testing.assert_allclose(p.g, [mu2 * mu3, mu3 * mu1, mu1 * mu2, np.ones_like(x)])


def test_unweighted_variant():
    p = preset("test6-unweighted")
    assert p.block_degrees == (3, 3, 3, 3)
    assert p.dimension_waived and p.r_star == 28 and p.size == 40
    with pytest.raises(InvalidInput):
        build_triangle_problem_unweighted(5, motzkin)
    q = build_triangle_problem_unweighted(2, lambda pts: np.ones(len(pts)))
    cert, trace = solve(q, SolverConfig("mnewton"))
    assert trace.converged


def test_preset_values():
    t5 = get_preset("test5")
    assert t5(np.array([[0.0, 0.0]]))[0] == pytest.approx(1.001)
    assert t5.domain is Domain.TRIANGLE
    t6 = get_preset("test6")
    third = np.array([[1 / 3, 1 / 3]])
    assert t6(third)[0] == pytest.approx(2 / 729 - 3 / 81 + 1)
    assert get_preset("test1")(np.array([1.0]))[0] == 2.0
    assert get_preset("test3", alpha=1e-3).params["alpha"] == 1e-3
    assert get_preset("test4", n=7).degree == 7
    with pytest.raises(UnknownPreset):
        get_preset("test9")
    names = [t.name for t in named_presets()]
    assert names == list(PRESET_NAMES)


def test_every_preset_assembles():
    for name in PRESET_NAMES:
        p = preset(name)
        assert p.dimension_waived == (name == "test6-unweighted")


def test_shifted_chebyshev():
    theta = np.linspace(0, np.pi, 7)
    np.testing.assert_allclose(
        shifted_chebyshev(21, (np.cos(theta) + 1) / 2), np.cos(21 * theta), atol=1e-12
    )


def test_target_spec_forms():
    c = TargetSpec.from_coefficients(CHEBYSHEV_1D, [1, 0, 1], 2)
    assert c(np.array([1.0]))[0] == pytest.approx(2.0)
    with pytest.raises(InvalidInput):
        TargetSpec.from_coefficients(CHEBYSHEV_1D, [1, 0], 2)
    v = TargetSpec.from_values([1, 2, 3], 2)
    p = build_segment_problem(2, v)
    np.testing.assert_array_equal(p.y, [1, 2, 3])
    with pytest.raises(InvalidInput):
        TargetSpec.from_values([1, 2], 2)
    with pytest.raises(InvalidInput):
        v(np.array([0.5]))


def test_regularize_epsilon(tiny):
    assert np.array_equal(regularize_epsilon(tiny, 0.0).y, tiny.y)
    reg = regularize_epsilon(tiny, 0.1)
    np.testing.assert_allclose(reg.y, [1.1, 1.1])
    assert reg.epsilon == 0.1
    with pytest.raises(InvalidInput):
        regularize_epsilon(tiny, -1.0)
    p = preset("test1")
    assert default_epsilon(p) == pytest.approx(2e-8)


def test_regularized_boundary_instance_converges():
    # p(x) = x vanishes at the node 0, so the data touch the boundary of the cone
    p = regularize_epsilon(build_segment_problem(2, lambda x: x), 1e-6)
    _, trace = solve(p, SolverConfig("mnewton", max_iter=500))
    assert trace.converged
