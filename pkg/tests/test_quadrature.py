import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enrichfem.errors import DegenerateSubinterval, UnsupportedOrder
from enrichfem.quadrature import MAX_POINTS, gauss_rule, split_rule


def test_weights_positive_and_sum_to_interval_length():
    for n in (1, 2, 5, 12, 30):
        rule = gauss_rule(n, (0.25, 0.75))
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(0.5, rel=1e-14)
        assert np.all((rule.points > 0.25) & (rule.points < 0.75))


def test_exactness_to_degree_2n_minus_1():
    rng = np.random.default_rng(7)
    for n in (1, 3, 8):
        poly = np.polynomial.Polynomial(rng.standard_normal(2 * n))
        anti = poly.integ()
        rule = gauss_rule(n, (0.2, 1.3))
        got = rule.weights @ poly(rule.points)
        assert got == pytest.approx(anti(1.3) - anti(0.2), rel=1e-13)


def test_degree_2n_not_exact():
    # x^2 with a single point has a strictly positive defect
    rule = gauss_rule(1, (0.0, 1.0))
    got = rule.weights @ rule.points**2
    assert abs(got - 1.0 / 3.0) > 1e-3


def test_point_count_limits():
    with pytest.raises(UnsupportedOrder):
        gauss_rule(0, (0.0, 1.0))
    with pytest.raises(UnsupportedOrder):
        gauss_rule(MAX_POINTS + 1, (0.0, 1.0))


def test_split_rule_tags_sides_and_conserves_mass():
    rule = split_rule((0.0, 1.0), 0.3, 4)
    assert len(rule.points) == 8
    left = rule.points < 0.3
    assert np.all(rule.sides[left] == -1)
    assert np.all(rule.sides[~left] == 1)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-14)


def test_split_rule_integrates_jumping_function_exactly():
    # piecewise constant: 2 on the left of the cut, 5 on the right
    rule = split_rule((0.0, 1.0), 0.3, 3)
    vals = np.where(rule.sides < 0, 2.0, 5.0)
    assert rule.weights @ vals == pytest.approx(2.0 * 0.3 + 5.0 * 0.7, rel=1e-14)


def test_split_rule_rejects_degenerate_cut():
    with pytest.raises(DegenerateSubinterval):
        split_rule((0.0, 1.0), 1e-15, 5)
    with pytest.raises(DegenerateSubinterval):
        split_rule((0.0, 1.0), 1.0 - 1e-15, 5)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=10),
    a=st.floats(min_value=-3.0, max_value=3.0),
    width=st.floats(min_value=1e-3, max_value=4.0),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_random_polynomials_integrate_exactly(n, a, width, seed):
    rng = np.random.default_rng(seed)
    poly = np.polynomial.Polynomial(rng.uniform(-2.0, 2.0, size=2 * n))
    anti = poly.integ()
    rule = gauss_rule(n, (a, a + width))
    got = rule.weights @ poly(rule.points)
    want = anti(a + width) - anti(a)
    assert got == pytest.approx(want, rel=1e-11, abs=1e-11)
