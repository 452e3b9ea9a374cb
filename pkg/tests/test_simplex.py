import numpy as np
import pytest
from scipy.optimize import linprog

from flowdepth import simplex
from flowdepth.errors import DomainError, LpInfeasible, LpUnbounded


def test_textbook_problem():
    # min -x - y  s.t. x + s1 = 4, y + s2 = 3, x + y + s3 = 5
    c = [-1, -1, 0, 0, 0]
    A = [[1, 0, 1, 0, 0], [0, 1, 0, 1, 0], [1, 1, 0, 0, 1]]
    res = simplex.solve(c, A, [4, 3, 5])
    assert res.value == pytest.approx(-5.0, abs=1e-12)
    np.testing.assert_allclose(np.asarray(A) @ res.x, [4, 3, 5], atol=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_random_feasible_problems_match_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = 6, 15
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.1, 1.0, n)
    b = A @ x0
    c = rng.uniform(0.0, 2.0, n)
    ours = simplex.solve(c, A, b)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ours.value == pytest.approx(ref.fun, abs=1e-8)
    assert np.all(ours.x >= -1e-12)
    np.testing.assert_allclose(A @ ours.x, b, atol=1e-9)


def test_redundant_rows_are_tolerated():
    A = [[1, 1, 0], [2, 2, 0], [0, 1, 1]]
    res = simplex.solve([1, 2, 3], A, [1, 2, 1])
    ref = linprog([1, 2, 3], A_eq=A, b_eq=[1, 2, 1], bounds=(0, None), method="highs")
    assert res.value == pytest.approx(ref.fun, abs=1e-12)


def test_infeasible_and_unbounded():
    with pytest.raises(LpInfeasible):
        simplex.solve([1, 1], [[1, 1]], [-1])
    with pytest.raises(LpUnbounded):
        simplex.solve([-1, 0], [[1, -1]], [0])


def test_size_cap():
    with pytest.raises(DomainError):
        simplex.solve(np.zeros(2000), np.zeros((600, 2000)), np.zeros(600))
