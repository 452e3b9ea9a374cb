"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``min c.x  s.t.  A x = b, x >= 0``.  Meant for the small verification
problems in this package (a few hundred columns at most), where a dense
tableau is simplest and Bland's rule guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LpInfeasible, LpUnbounded

PIVOT_TOL = 1e-11
MAX_TABLEAU_ENTRIES = 1_000_000


@dataclass(frozen=True)
class LpResult:
    x: np.ndarray
    value: float
    iterations: int


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T, basis, ncols, max_iter):
    """Iterate on tableau ``T`` whose last row holds reduced costs."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[-1, :ncols]
        entering = np.nonzero(cost < -PIVOT_TOL)[0]
        if entering.size == 0:
            return it
        col = int(entering[0])
        column = T[:m, col]
        rows = np.nonzero(column > PIVOT_TOL)[0]
        if rows.size == 0:
            raise LpUnbounded(f"column {col} is an unbounded direction")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
    raise LpInfeasible(f"no convergence within {max_iter} pivots")


def solve(c, A_eq, b_eq, *, max_iter=50_000) -> LpResult:
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    if (m + 1) * (n + m + 1) > MAX_TABLEAU_ENTRIES:
        raise DomainError("problem too large for the dense tableau")

    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificials in columns n .. n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    iters = _run(T, basis, n + m, max_iter)
    if -T[-1, -1] > 1e-9 * max(1.0, float(np.abs(b).max(initial=0.0))):
        raise LpInfeasible(f"phase 1 optimum {-T[-1, -1]:.3e} > 0")

    # drive remaining artificials out of the basis; drop redundant rows
    r = 0
    while r < len(basis):
        if basis[r] >= n:
            cand = np.nonzero(np.abs(T[r, :n]) > PIVOT_TOL)[0]
            if cand.size:
                _pivot(T, basis, r, int(cand[0]))
            else:
                T = np.delete(T, r, axis=0)
                del basis[r]
                continue
        r += 1

    m2 = len(basis)
    T2 = np.zeros((m2 + 1, n + 1))
    T2[:m2, :n] = T[:m2, :n]
    T2[:m2, -1] = T[:m2, -1]
    T2[-1, :n] = c
    for i, j in enumerate(basis):
        T2[-1] -= c[j] * T2[i]
    iters += _run(T2, basis, n, max_iter)

    x = np.zeros(n)
    for i, j in enumerate(basis):
        x[j] = T2[i, -1]
    return LpResult(x=x, value=float(c @ x), iterations=iters)
