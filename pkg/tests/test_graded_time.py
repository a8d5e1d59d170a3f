"""Graded temporal mesh construction and queries."""

import math

import numpy as np
import pytest

from fracwave.graded_time import (
    build_graded_mesh,
    extrapolation_weights,
    gronwall_step_condition,
    recommended_grading,
)


def test_power_law_points():
    mesh = build_graded_mesh(1.0, 4, 2.0)
    np.testing.assert_allclose(mesh.t, [0.0, 0.0625, 0.25, 0.5625, 1.0], rtol=1e-15)
    np.testing.assert_allclose(mesh.tau, [0.0625, 0.1875, 0.3125, 0.4375], rtol=1e-15)


def test_uniform_points():
    mesh = build_graded_mesh(1.0, 4, 1.0)
    np.testing.assert_allclose(mesh.t, [0.0, 0.25, 0.5, 0.75, 1.0], rtol=1e-15)


def test_first_node_strong_grading():
    # oracle: mpmath power evaluation at 50 digits
    mesh = build_graded_mesh(1.0, 8, (2.0 - 0.7) / 0.7)
    assert mesh.t[1] == pytest.approx(0.021029690509880565, rel=1e-14)


def test_endpoints_exact():
    mesh = build_graded_mesh(0.37, 7, 3.4)
    assert mesh.t[0] == 0.0
    assert mesh.t[-1] == 0.37
    assert np.all(np.diff(mesh.t) > 0)
    assert mesh.tau.sum() == pytest.approx(0.37, rel=1e-14)


@pytest.mark.parametrize("N,r", [(4, 1.0), (16, 2.0), (33, 1.857), (100, 3.0)])
def test_steps_nondecreasing(N, r):
    mesh = build_graded_mesh(2.0, N, r)
    assert np.all(mesh.tau[1:] >= mesh.tau[:-1])


def test_consecutive_node_ratio_bounded():
    for N, r in [(8, 1.0), (20, 2.5), (64, 1.857142857142857)]:
        mesh = build_graded_mesh(1.0, N, r)
        ratios = mesh.t[2:] / mesh.t[1:-1]
        assert np.all(ratios <= 2.0**r + 1e-12)


def test_step_ratio_shrinks_with_refinement():
    # the worst step ratio sits at n=2 and decreases as N grows
    worst = [
        (build_graded_mesh(1.0, N, 2.0).tau[1] / build_graded_mesh(1.0, N, 2.0).tau[0])
        for N in (8, 16, 32, 64)
    ]
    assert all(b <= a for a, b in zip(worst, worst[1:]))


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_graded_mesh(1.0, 1, 1.0)
    with pytest.raises(ValueError):
        build_graded_mesh(1.0, 4, 0.5)
    with pytest.raises(ValueError):
        build_graded_mesh(0.0, 4, 1.0)


def test_arrays_read_only():
    mesh = build_graded_mesh(1.0, 4, 2.0)
    with pytest.raises(ValueError):
        mesh.t[0] = 1.0
    with pytest.raises(ValueError):
        mesh.tau[0] = 1.0


def test_extrapolation_uniform():
    mesh = build_graded_mesh(1.0, 8, 1.0)
    for n in range(2, 9):
        w1, w2 = extrapolation_weights(mesh, n)
        assert w1 == pytest.approx(2.0, rel=1e-14)
        assert w2 == pytest.approx(-1.0, rel=1e-14)


def test_extrapolation_graded_second_level():
    mesh = build_graded_mesh(1.0, 4, 2.0)
    w1, w2 = extrapolation_weights(mesh, 2)
    assert w1 == pytest.approx(4.0, rel=1e-14)
    assert w2 == pytest.approx(-3.0, rel=1e-14)


def test_extrapolation_weights_sum_to_one():
    mesh = build_graded_mesh(1.0, 16, 2.3)
    for n in range(2, 17):
        w1, w2 = extrapolation_weights(mesh, n)
        assert w1 + w2 == pytest.approx(1.0, rel=1e-13)


def test_extrapolation_exact_on_affine():
    mesh = build_graded_mesh(1.0, 12, 1.857142857142857)
    w = lambda t: 0.7 - 2.3 * t
    for n in range(2, 13):
        w1, w2 = extrapolation_weights(mesh, n)
        predicted = w1 * w(mesh.t[n - 1]) + w2 * w(mesh.t[n - 2])
        assert predicted == pytest.approx(w(mesh.t[n]), rel=1e-12)


def test_extrapolation_rejects_first_level():
    mesh = build_graded_mesh(1.0, 4, 1.0)
    with pytest.raises(ValueError):
        extrapolation_weights(mesh, 1)


def test_recommended_grading_values():
    assert recommended_grading(0.7) == pytest.approx(1.3 / 0.7, rel=1e-15)
    assert recommended_grading(0.5) == pytest.approx(3.0, rel=1e-15)
    assert recommended_grading(0.9) == pytest.approx(1.1 / 0.9, rel=1e-15)


@pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 2.0])
def test_recommended_grading_rejects(beta):
    with pytest.raises(ValueError):
        recommended_grading(beta)


def test_step_condition_uniform():
    # threshold (4 Gamma(1.5))^(-2) = 1/(4 pi) ~ 0.0795775
    coarse = build_graded_mesh(1.0, 4, 1.0)
    assert not gronwall_step_condition(coarse, 0.5, 1.0)
    fine = build_graded_mesh(1.0, 20, 1.0)
    assert gronwall_step_condition(fine, 0.5, 1.0)


def test_step_condition_vacuous_for_zero_constant():
    mesh = build_graded_mesh(1.0, 2, 1.0)
    assert gronwall_step_condition(mesh, 0.5, 0.0)


def test_step_condition_threshold_value():
    # tau = 0.05 sits below 1/(4 pi); tau = 0.25 does not
    bound = (4.0 * math.gamma(1.5)) ** -2.0
    assert bound == pytest.approx(0.079577471545947668, rel=1e-14)
    assert 0.05 <= bound < 0.25
