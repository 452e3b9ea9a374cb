from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from flowdepth import core1d, l1_interp as li
from flowdepth.errors import DomainError

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def bump_problem(N):
    return li.InterpProblem.sample(lambda x: x * (1 - x), N)


def highs_oracle(values):
    """Same LP solved by HiGHS: free weights at every node plus a constant."""
    u = np.asarray(values, dtype=float)
    p = np.linspace(0.0, 1.0, u.size)
    right = np.maximum(p[:, None] - p[None, :], 0.0)
    left = np.maximum(p[None, :] - p[:, None], 0.0)
    m = p.size
    A = np.hstack([right, -right, left, -left, np.ones((m, 1)), -np.ones((m, 1))])
    c = np.concatenate([np.ones(4 * m), [0.0, 0.0]])
    res = linprog(c, A_eq=A, b_eq=u, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def random_problem(rng, pinned=False):
    N = int(rng.integers(2, 13))
    u = rng.normal(size=N + 1)
    if pinned:
        u[0] = u[-1] = 0.0
    return li.InterpProblem.from_values(u)


def test_zero_problem():
    p = li.InterpProblem.from_values([0.0] * 6)
    assert li.min_weight(p) == 0.0
    w = li.witness(p)
    assert all(a == 0 for a in w.w + w.v) and w.C == 0
    assert li.lp_oracle(p) == pytest.approx(0.0, abs=1e-14)


def test_bump_at_four_nodes_by_hand():
    p = li.exact_problem([Fraction(i, 4) * (1 - Fraction(i, 4)) for i in range(5)])
    assert p.second_differences() == [Fraction(-1, 2)] * 3
    assert li.min_weight(p) == Fraction(3, 2)
    wit = li.witness(p)
    assert wit.cost() == Fraction(3, 2)
    assert li.lp_oracle(bump_problem(4)) == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize("N", [2, 3, 4, 7, 16, 100, 1024, 4096])
def test_bump_closed_form_is_exact(N):
    p = li.exact_problem([Fraction(i, N) * (1 - Fraction(i, N)) for i in range(N + 1)])
    assert li.min_weight(p) == Fraction(2 * (N - 1), N)


def test_asymptotics_towards_derivative_variation():
    rows, limit = li.asymptotic_check(core1d.bv_function("bump"))
    assert limit == pytest.approx(2.0, abs=1e-12)
    for N, s in rows:
        assert s == pytest.approx(2 * (N - 1) / N, abs=1e-12)
    rows, limit = li.asymptotic_check(core1d.bv_function("sine"))
    assert limit == pytest.approx(2.0, abs=1e-9)
    assert abs(rows[-1][1] - 2.0) < 1e-3
    assert all(b[1] >= a[1] - 1e-12 for a, b in zip(rows, rows[1:]))


@pytest.mark.parametrize("seed", range(200))
def test_closed_form_equals_both_lp_oracles(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, pinned=seed % 2 == 0)
    s = float(li.min_weight(p))
    assert li.lp_oracle(p) == pytest.approx(s, abs=1e-8)
    assert highs_oracle(p.u_vals) == pytest.approx(s, abs=1e-7)


@pytest.mark.parametrize("seed", range(50))
def test_witness_is_feasible_and_optimal(seed):
    rng = np.random.default_rng(1000 + seed)
    p = random_problem(rng, pinned=seed % 3 != 0)
    wit = li.witness(p)
    assert wit.residual(p) < 1e-10
    assert wit.cost() == pytest.approx(float(li.min_weight(p)), abs=1e-10)
    assert li.fsum_cost(wit) == pytest.approx(float(li.min_weight(p)), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=50), min_size=3, max_size=14))
def test_witness_exact_in_rationals(vals):
    p = li.InterpProblem.from_values(vals)
    wit = li.witness(p)
    N = p.N
    for i in range(N + 1):
        x = Fraction(i, N)
        value = wit.C + sum(wit.w[j] * max(x - Fraction(j, N), 0) + wit.v[j] * max(Fraction(j, N) - x, 0)
                            for j in range(N + 1))
        assert value == vals[i]
    assert wit.cost() == li.min_weight(p)
    assert li.min_weight(p) == li.min_weight_symmetric(p)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=3, max_size=14), st.floats(-10, 10))
def test_homogeneity(vals, c):
    p = li.InterpProblem.from_values(vals)
    q = li.InterpProblem.from_values([c * v for v in vals])
    assert li.min_weight(q) == pytest.approx(abs(c) * li.min_weight(p), rel=1e-10, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.lists(finite, min_size=n + 1, max_size=n + 1), st.lists(finite, min_size=n + 1, max_size=n + 1))))
def test_subadditivity(pair):
    a, b = pair
    s = li.min_weight(li.InterpProblem.from_values([x + y for x, y in zip(a, b)]))
    assert s <= li.min_weight(li.InterpProblem.from_values(a)) + li.min_weight(
        li.InterpProblem.from_values(b)) + 1e-10


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=3, max_size=20))
def test_symmetric_form_agrees(vals):
    p = li.InterpProblem.from_values(vals)
    assert li.min_weight_symmetric(p) == pytest.approx(li.min_weight(p), rel=1e-12, abs=1e-10)


def test_interval_bounds_straddle_zero():
    rng = np.random.default_rng(4)
    for _ in range(50):
        k = random_problem(rng).second_differences()
        km, kp = li._bounds(k)
        assert km <= 0 <= kp


def test_distance_to_interval_ties_are_zero():
    assert li.dist_to_interval(-1.0, -1.0, 2.0) == 0.0
    assert li.dist_to_interval(2.0, -1.0, 2.0) == 0.0
    assert li.dist_to_interval(3.0, -1.0, 2.0) == 1.0
    assert li.dist_to_interval(-4.0, -1.0, 2.0) == 3.0


@pytest.mark.parametrize("name", ["bump", "sine"])
@pytest.mark.parametrize("N", [4, 8, 32, 256])
def test_boundary_slopes_bounded_by_variation(name, N):
    p = li.InterpProblem.sample(core1d.bv_function(name), N)
    assert abs(p.first_slope() + p.last_slope()) <= sum(abs(k) for k in p.second_differences()) + 1e-12


def test_fault_hook_breaks_the_closed_form():
    p = li.InterpProblem.from_values([0.0, 1.0, 0.5, 0.0])
    good = li.min_weight(p)
    with li.inject_fault(li.MIN_SN_SIGN_FAULT):
        bad = li.min_weight(p)
    assert li.min_weight(p) == good
    assert bad != pytest.approx(li.lp_oracle(p), abs=1e-6)
    with pytest.raises(ValueError):
        with li.inject_fault("no-such-fault"):
            pass


def test_lp_oracle_nonuniform_nodes_match_highs():
    rng = np.random.default_rng(9)
    for _ in range(10):
        nodes = np.concatenate([[0.0], np.sort(rng.uniform(0.02, 0.98, 6)), [1.0]])
        u = rng.normal(size=nodes.size)
        right = np.maximum(nodes[:, None] - nodes[None, :], 0.0)
        left = np.maximum(nodes[None, :] - nodes[:, None], 0.0)
        m = nodes.size
        A = np.hstack([right, -right, left, -left, np.ones((m, 1)), -np.ones((m, 1))])
        c = np.concatenate([np.ones(4 * m), [0.0, 0.0]])
        ref = linprog(c, A_eq=A, b_eq=u, bounds=(0, None), method="highs").fun
        assert li.lp_oracle_nodes(nodes, u) == pytest.approx(ref, abs=1e-8)


def test_invalid_problems():
    with pytest.raises(DomainError):
        li.InterpProblem.from_values([0.0, 1.0])
    with pytest.raises(DomainError):
        li.InterpProblem(3, (0.0, 1.0))
    with pytest.raises(DomainError):
        li.lp_oracle_nodes(np.linspace(0, 1, 70), np.zeros(70))
