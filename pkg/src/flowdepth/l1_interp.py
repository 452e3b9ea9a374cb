"""Minimal-weight shallow ReLU interpolation on a uniform grid.

Given ``u(i/N)`` the problem is

    minimise  sum_i |w_i| + |v_i|
    s.t.      sum_i w_i relu(x - i/N) + v_i relu(i/N - x) + C = u(x)  at x = j/N.

:func:`min_weight` evaluates the closed-form optimum, :func:`witness` builds
weights attaining it, and :func:`lp_oracle` solves the same problem (or its
arbitrary-node variant) with the in-repo simplex as an independent check.

The closed form is written with plain Python arithmetic so that it accepts
:class:`fractions.Fraction` input and returns exact rationals.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import simplex
from .errors import DomainError

_FAULTS: set[str] = set()
MIN_SN_SIGN_FAULT = "min-sn-sign"


@contextlib.contextmanager
def inject_fault(name: str):
    """Test hook: temporarily corrupt the closed form.

    ``"min-sn-sign"`` flips the sign of the boundary slope inside the
    interval-distance term.
    """
    if name != MIN_SN_SIGN_FAULT:
        raise ValueError(f"unknown fault {name!r}")
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


@dataclass(frozen=True)
class InterpProblem:
    N: int
    u_vals: tuple

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError("N must be an integer >= 2")
        if len(self.u_vals) != self.N + 1:
            raise DomainError(f"expected {self.N + 1} values, got {len(self.u_vals)}")
        object.__setattr__(self, "u_vals", tuple(self.u_vals))

    @classmethod
    def from_values(cls, values: Sequence):
        vals = list(values)
        return cls(len(vals) - 1, tuple(vals))

    @classmethod
    def sample(cls, fn, N: int):
        return cls(N, tuple(float(v) for v in fn(np.linspace(0.0, 1.0, N + 1))))

    def second_differences(self):
        """``k_i = N * (u_{i+1} - 2 u_i + u_{i-1})`` for ``i = 1..N-1``."""
        u, N = self.u_vals, self.N
        return [N * (u[i + 1] - 2 * u[i] + u[i - 1]) for i in range(1, N)]

    def first_slope(self):
        return self.N * (self.u_vals[1] - self.u_vals[0])

    def last_slope(self):
        return self.N * (self.u_vals[-1] - self.u_vals[-2])


@dataclass(frozen=True)
class InterpWitness:
    N: int
    w: tuple
    v: tuple
    C: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = np.arange(self.N + 1) / self.N
        w = np.asarray(self.w, dtype=float)
        v = np.asarray(self.v, dtype=float)
        right = np.maximum(x[..., None] - p, 0.0) @ w
        left = np.maximum(p - x[..., None], 0.0) @ v
        return right + left + float(self.C)

    def cost(self):
        return sum(abs(a) for a in self.w) + sum(abs(a) for a in self.v)

    def residual(self, problem: InterpProblem) -> float:
        nodes = np.arange(problem.N + 1) / problem.N
        target = np.array([float(a) for a in problem.u_vals])
        return float(np.max(np.abs(self(nodes) - target)))


def _clamp(p, lo, hi):
    return lo if p < lo else hi if p > hi else p


def dist_to_interval(p, lo, hi):
    return max(lo - p, p - hi, 0 * p)


def _bounds(k):
    zero = 0 * k[0] if k else 0
    kp = sum((a for a in k if a > 0), zero)
    km = sum((a for a in k if a < 0), zero)
    return km, kp


def min_weight(problem: InterpProblem):
    """Closed-form optimum ``sum|k_i| + dist(-N(u_1 - u_0), [K-, K+])``."""
    k = problem.second_differences()
    km, kp = _bounds(k)
    p = -problem.first_slope()
    if MIN_SN_SIGN_FAULT in _FAULTS:
        p = -p
    return sum((abs(a) for a in k), 0 * p) + dist_to_interval(p, km, kp)


def min_weight_symmetric(problem: InterpProblem):
    """Equivalent symmetric expression of the optimum.

    ``sum|k_i| + max(|N(u_1 - u_0) + N(u_N - u_{N-1})| - sum|k_i|, 0) / 2``.
    """
    k = problem.second_differences()
    total = sum((abs(a) for a in k), 0 * problem.first_slope())
    edge = abs(problem.first_slope() + problem.last_slope())
    excess = edge - total
    return total + (excess / 2 if excess > 0 else 0 * excess)


def witness(problem: InterpProblem) -> InterpWitness:
    """Weights attaining :func:`min_weight`.

    The left-facing weights ``v_i`` are filled greedily in ascending ``i``
    inside the boxes ``[min(k_i, 0), max(k_i, 0)]`` until they sum to the
    clamp of ``-N(u_1 - u_0)`` to ``[K-, K+]``.
    """
    N = problem.N
    k = problem.second_differences()
    km, kp = _bounds(k)
    s0 = problem.first_slope()
    target = _clamp(-s0, km, kp)
    zero = 0 * s0

    v = [zero] * (N + 1)
    remaining = target
    for i, ki in enumerate(k, start=1):
        if remaining == 0:
            break
        if remaining > 0 and ki > 0:
            v[i] = min(ki, remaining)
        elif remaining < 0 and ki < 0:
            v[i] = max(ki, remaining)
        remaining -= v[i]

    w = [zero] * (N + 1)
    for i, ki in enumerate(k, start=1):
        w[i] = ki - v[i]
    w[0] = s0 + sum(v, zero)
    C = problem.u_vals[0] - sum((i * v[i] for i in range(N + 1)), zero) / N
    return InterpWitness(N=N, w=tuple(w), v=tuple(v), C=C)


def _lp_matrix(nodes):
    p = np.asarray(nodes, dtype=float)
    right = np.maximum(p[:, None] - p[None, :], 0.0)  # relu(x_j - p_i)
    left = np.maximum(p[None, :] - p[:, None], 0.0)   # relu(p_i - x_j)
    m = p.size
    one = np.ones((m, 1))
    # columns: w+, w-, v+, v-, C+, C-
    A = np.hstack([right, -right, left, -left, one, -one])
    c = np.concatenate([np.ones(4 * m), np.zeros(2)])
    return A, c


def lp_oracle_nodes(nodes, values) -> float:
    """Minimal weight interpolant at arbitrary increasing nodes, by simplex.

    Kinks are restricted to the nodes themselves; any kink between two nodes
    can be split onto its neighbours at equal cost without changing the
    values at the nodes.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.size != values.size or nodes.size < 2:
        raise DomainError("nodes and values must match, at least two of each")
    if nodes.size > 65:
        raise DomainError("dense oracle supports at most 65 nodes")
    if np.any(np.diff(nodes) <= 0):
        raise DomainError("nodes must be strictly increasing")
    A, c = _lp_matrix(nodes)
    return simplex.solve(c, A, values).value


def lp_oracle(problem: InterpProblem) -> float:
    vals = [float(a) for a in problem.u_vals]
    return lp_oracle_nodes(np.arange(problem.N + 1) / problem.N, vals)


def asymptotic_check(u, levels=range(2, 13)):
    """Rows ``(N, S_N)`` for ``N = 2**j`` together with the limit ``TV(u')``."""
    from .core1d import tv_smooth

    limit = tv_smooth(lambda x: u.d(1, x), lambda x: u.d(2, x))
    rows = []
    for j in levels:
        N = 2 ** j
        rows.append((N, float(min_weight(InterpProblem.sample(u, N)))))
    return rows, limit


def exact_problem(values) -> InterpProblem:
    """Problem with :class:`Fraction` samples for exact arithmetic."""
    return InterpProblem.from_values([Fraction(v) for v in values])


def fsum_cost(wit: InterpWitness) -> float:
    return math.fsum(abs(float(a)) for a in wit.w + wit.v)
