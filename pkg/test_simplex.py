from fractions import Fraction

import pytest

from lssd.errors import InfeasibleError, ShapeMismatchError, UnboundedError
from lssd.simplex import ExactLp, dump_lp, simplex_max

F = Fraction


def make_lp(num_vars, objective, rows):
    lp = ExactLp(num_vars)
    lp.objective = {j: F(c) for j, c in enumerate(objective) if c}
    for coeffs, relation, rhs in rows:
        lp.add_row({j: F(c) for j, c in enumerate(coeffs) if c}, relation, rhs)
    return lp


def test_single_bound():
    value, x = simplex_max(make_lp(1, [1], [([1], "<=", F(1, 2))]))
    assert value == F(1, 2)
    assert x == [F(1, 2)]


def test_two_variable_vertex():
    lp = make_lp(2, [1, 1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
    value, x = simplex_max(lp)
    assert value == F(14, 5)
    assert x == [F(8, 5), F(6, 5)]


def test_equality_and_lower_bound():
    lp = make_lp(2, [1, 0], [([1, 1], "=", 3), ([0, 1], ">=", 1)])
    value, x = simplex_max(lp)
    assert value == 2
    assert lp.is_feasible(x)


def test_negative_rhs_is_normalized():
    value, _ = simplex_max(make_lp(1, [-1], [([-1], "<=", -1)]))
    assert value == -1


def test_redundant_equality():
    lp = make_lp(2, [1, 0], [([1, 1], "=", 1), ([2, 2], "=", 2)])
    value, _ = simplex_max(lp)
    assert value == 1


def test_infeasible():
    with pytest.raises(InfeasibleError):
        simplex_max(make_lp(1, [1], [([1], "<=", 1), ([1], ">=", 2)]))


def test_unbounded():
    with pytest.raises(UnboundedError):
        simplex_max(make_lp(2, [1, 0], [([1, -1], "<=", 1)]))


def test_cycling_example_terminates():
    # largest-coefficient pricing cycles on this instance without an anti-cycling rule
    lp = make_lp(4, [F(3, 4), -20, F(1, 2), -6], [
        ([F(1, 4), -8, -1, 9], "<=", 0),
        ([F(1, 2), -12, F(-1, 2), 3], "<=", 0),
        ([0, 0, 1, 0], "<=", 1),
    ])
    value, x = simplex_max(lp)
    assert value == F(5, 4)
    assert lp.is_feasible(x)


def test_add_row_validation():
    lp = ExactLp(2)
    with pytest.raises(ShapeMismatchError):
        lp.add_row({0: 1}, "<", 1)
    with pytest.raises(ShapeMismatchError):
        lp.add_row({2: 1}, "<=", 1)


def test_dump_lp():
    lp = make_lp(2, [1, 1], [([1, 2], "<=", 4), ([3, 1], "=", F(6, 7))])
    lines = dump_lp(lp).splitlines()
    assert lines[0] == "lssd-lp v1"
    assert lines[1] == "variables 2"
    assert lines[2] == "maximize 1 1"
    assert lines[-1] == "3 1 = 6/7"
