import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurlab.divdiff import (divdiff_partial, divdiff_two_var,
                              divdiff_two_var_grid, divided_difference,
                              node_insertion_split)
from schurlab.errors import (CoincidentPivot, DegenerateTolerance,
                             OrderUnsupported)
from schurlab.functions import FUNCTIONS, SMOOTH_TEST_SET, get_function

from conftest import (abs2_prime_rational, abs2_rational, mp_divdiff,
                      rational_divdiff)


def test_quadratic_second_difference_is_one():
    f = get_function("square")
    assert divided_difference(f, (0.3, -1.7, 42.0)) == pytest.approx(1.0, abs=1e-12)


def test_cubic_second_difference_is_node_sum():
    f = get_function("cube")
    assert divided_difference(f, (0, 1, 2)) == pytest.approx(3.0, abs=1e-12)


def test_abs2_mixed_sign_value():
    # exact rational oracle for the (1, -1, 1) tuple
    f = get_function("abs2")
    exact = rational_divdiff(abs2_rational, (Fraction(1), Fraction(-1), Fraction(1)),
                             fprime=abs2_prime_rational)
    assert exact == Fraction(1, 2)
    # closed form for the (+,-,+) sign pattern, second independent route
    l0, l1t, l2 = Fraction(1), Fraction(1), Fraction(1)
    closed = ((l0 + l2) * l1t + l0 * l2 - l1t ** 2) / ((l0 + l1t) * (l1t + l2))
    assert closed == Fraction(1, 2)
    assert divided_difference(f, (1, -1, 1)) == pytest.approx(0.5, abs=1e-14)


def test_abs2_positive_axis():
    f = get_function("abs2")
    assert divided_difference(f, (1, 2, 3)) == pytest.approx(1.0, abs=1e-14)


def test_abs2_full_diagonal_convention():
    f = get_function("abs2")
    assert divided_difference(f, (0.7, 0.7, 0.7)) == 0.0
    assert divided_difference(f, (0.7, 0.7 + 1e-12, 0.7 - 1e-12)) == 0.0


def test_confluent_smooth_diagonal():
    f = get_function("sin")
    val = divided_difference(f, (0.4, 0.4, 0.4))
    assert val == pytest.approx(-math.sin(0.4) / 2.0, abs=1e-14)


def test_derivative_chain_matches_finite_differences(rng):
    h = 1e-6
    for name, f in FUNCTIONS.items():
        pts = rng.uniform(-2.0, 2.0, 16)
        if f.singular_points:
            pts = pts[np.abs(pts) > 0.1]
        for j in range(1, min(f.max_order, 4) + 1):
            fd = (f.deriv(j - 1)(pts + h) - f.deriv(j - 1)(pts - h)) / (2 * h)
            scale = np.maximum(1.0, np.abs(f.deriv(j)(pts)))
            assert np.max(np.abs(fd - f.deriv(j)(pts)) / scale) < 1e-6, (name, j)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=5),
       st.randoms(use_true_random=False))
def test_permutation_invariance(nodes, pyrandom):
    nodes = [round(v, 4) for v in nodes]
    if min(abs(a - b) for i, a in enumerate(nodes) for b in nodes[i + 1:]) < 1e-3:
        return
    f = get_function("sin")
    base = divided_difference(f, nodes)
    perm = list(nodes)
    pyrandom.shuffle(perm)
    assert abs(divided_difference(f, perm) - base) <= 1e-10 * (1.0 + abs(base))


def test_uniform_bound(rng):
    # |f^[n]| <= sup_hull |f^(n)| / n!
    for name in SMOOTH_TEST_SET:
        f = get_function(name)
        for _ in range(250):
            n = int(rng.integers(1, 5))
            nodes = rng.uniform(-3, 3, n + 1)
            val = abs(divided_difference(f, nodes))
            bound = f.max_abs_deriv(n, nodes.min(), nodes.max()) / math.factorial(n)
            assert val <= bound + 1e-9, (name, nodes)


def test_against_extended_precision_oracle(rng):
    for name in ("sin", "exp", "cube"):
        for _ in range(40):
            nodes = np.round(rng.uniform(-2, 2, 4), 6)
            if min(np.diff(np.sort(nodes))) < 1e-3:
                continue
            ref = mp_divdiff(name, nodes)
            val = divided_difference(get_function(name), nodes)
            assert abs(val - ref) <= 1e-10 * (1.0 + abs(ref)), (name, nodes)


def test_two_var_trivial_cases():
    assert divdiff_two_var(get_function("square"), 2, 1, 5.0, 7.0) == pytest.approx(1.0)
    assert divdiff_two_var(get_function("cube"), 2, 2, 1.0, 0.0) == pytest.approx(2.0)


def test_two_var_matches_expanded_tuple():
    f = get_function("sin")
    a = divdiff_two_var(f, 2, 1, 0.2, 0.9)
    b = divided_difference(f, (0.2, 0.9, 0.9))
    assert a == pytest.approx(b, abs=1e-12)
    assert a == pytest.approx(mp_divdiff("sin", (0.2, 0.9, 0.9 + 1e-9), dps=50), abs=1e-8)


def test_two_var_symmetry(rng):
    f = get_function("exp")
    for _ in range(50):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(0, n + 2))
        lam, mu = rng.uniform(-2, 2, 2)
        a = divdiff_two_var(f, n, k, lam, mu)
        b = divdiff_two_var(f, n, n + 1 - k, mu, lam)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_two_var_grid_matches_scalar(rng):
    for name in ("sin", "cube", "abs2"):
        f = get_function(name)
        lam = rng.uniform(-2, 2, 50)
        mu = lam + np.where(rng.uniform(size=50) > 0.5, 1.0, -1.0) * rng.uniform(0.01, 2, 50)
        for (n, k) in ((1, 1), (2, 1), (2, 2)):
            grid = divdiff_two_var_grid(f, n, k, lam, mu)
            for i in range(0, 50, 7):
                assert grid[i] == pytest.approx(
                    divdiff_two_var(f, n, k, lam[i], mu[i]), rel=1e-10, abs=1e-12)


def test_partial_trivial_cases():
    assert divdiff_partial(get_function("square"), 1, 1, 0.3, 1.7, "lambda") == \
        pytest.approx(1.0)
    assert divdiff_partial(get_function("cube"), 2, 1, 1.0, 2.0, "mu") == \
        pytest.approx(2.0)


def test_partial_matches_finite_differences(rng):
    h = 1e-5
    for name in ("sin", "exp"):
        f = get_function(name)
        count = 0
        while count < 1000:
            n = int(rng.integers(1, 4))
            k = int(rng.integers(1, n + 1))
            lam, mu = rng.uniform(-3, 3, 2)
            if abs(lam - mu) < 0.05:
                continue
            count += 1
            for which in ("lambda", "mu"):
                an = divdiff_partial(f, n, k, lam, mu, which)
                if which == "lambda":
                    fd = (divdiff_two_var(f, n, k, lam + h, mu)
                          - divdiff_two_var(f, n, k, lam - h, mu)) / (2 * h)
                else:
                    fd = (divdiff_two_var(f, n, k, lam, mu + h)
                          - divdiff_two_var(f, n, k, lam, mu - h)) / (2 * h)
                assert abs(an - fd) <= 1e-5 * (1.0 + abs(an)), (name, n, k, which)
    # spec instance
    f = get_function("sin")
    an = divdiff_partial(f, 2, 1, 0.3, 1.1, "lambda")
    fd = (divdiff_two_var(f, 2, 1, 0.3 + h, 1.1)
          - divdiff_two_var(f, 2, 1, 0.3 - h, 1.1)) / (2 * h)
    assert abs(an - fd) <= 1e-5 * (1 + abs(an))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=4), st.floats(-5, 5),
       st.integers(0, 3), st.integers(0, 3))
def test_node_insertion_identity(nodes, mu, i, j):
    nodes = [round(v, 3) for v in nodes]
    i, j = i % len(nodes), j % len(nodes)
    if i == j or abs(nodes[i] - nodes[j]) < 0.05:
        return
    gaps = [abs(a - b) for x, a in enumerate(nodes + [mu]) for b in (nodes + [mu])[x + 1:]]
    if min(gaps) < 1e-3:
        return
    f = get_function("sin")
    lhs, rhs, res = node_insertion_split(f, nodes, i, j, mu)
    assert abs(res) <= 1e-10 * max(1.0, abs(lhs))


def test_node_insertion_examples():
    f = get_function("cube")
    lhs, rhs, res = node_insertion_split(f, (0, 1, 2), 0, 1, 5.0)
    assert lhs == pytest.approx(3.0) and rhs == pytest.approx(3.0)
    assert abs(res) < 1e-12
    fexp = get_function("exp")
    lhs, rhs, res = node_insertion_split(fexp, (0, 0.5, 1.5), 0, 2, 0.7)
    assert abs(res) <= 1e-12 * max(1.0, abs(lhs))
    # high-precision oracle for the same instance
    ref = mp_divdiff("exp", (0, 0.5, 1.5))
    assert lhs == pytest.approx(ref, abs=1e-13)


def test_error_conditions():
    f = get_function("sin")
    with pytest.raises(DegenerateTolerance):
        divided_difference(f, (0, 1), tol=0.0)
    with pytest.raises(OrderUnsupported):
        divided_difference(f, np.linspace(0, 1, 11))  # order 10 > max_order 8
    with pytest.raises(OrderUnsupported):
        divided_difference(get_function("abs2"), (0.0, 0.5, 1.0, 2.0))
    with pytest.raises(OrderUnsupported):
        divdiff_partial(get_function("abs2"), 2, 1, 0.5, 1.0)
    with pytest.raises(CoincidentPivot):
        node_insertion_split(f, (1.0, 1.0, 2.0), 0, 1, 0.5)
