"""Flow-time metric for the one-dimensional ReLU control family.

For maps ``psi`` of [0, 1] with ``psi' > 0`` the minimal flow time is the
total variation of ``ln psi'``; between two maps it is the TV of the
difference of their log-slopes.  Maps may be :class:`MonotonePwl` (exact
step-function arithmetic) or registry :class:`SmoothFunction` entries
(analytic derivatives, adaptive critical-point quadrature).

A pwl map has a pure-jump log-slope and a smooth map an absolutely
continuous one, so for a mixed pair the two variation measures are mutually
singular and the TV of the difference is the sum of the two TVs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import l1_interp
from .core1d import (
    POSITIVITY_FLOOR,
    GridFunction,
    MonotonePwl,
    SmoothFunction,
    StepFunction,
    log_slope,
    merge_breakpoints,
    tv_smooth,
    tv_step_difference,
    uniform,
)
from .errors import BoundaryViolation, DomainError, NonMonotoneSamples, NonPositiveSlope

DEFAULT_STEPS = 64
DEFAULT_GRID = 4096


def _check_smooth(psi: SmoothFunction, n=4096):
    x = np.linspace(0.0, 1.0, n + 1)
    low = float(np.min(psi.d(1, x)))
    if low <= POSITIVITY_FLOOR:
        raise NonPositiveSlope(f"{psi.label}: derivative reaches {low:.3e}")


def _log_slope_smooth(psi: SmoothFunction):
    _check_smooth(psi)
    return (lambda x: np.log(psi.d(1, x)),
            lambda x: psi.d(2, x) / psi.d(1, x))


def complexity(psi, grid: int = 256) -> float:
    """``TV(ln psi')``; ``grid`` is the starting dyadic grid for smooth maps."""
    if isinstance(psi, MonotonePwl):
        return log_slope(psi).tv()
    g, dg = _log_slope_smooth(psi)
    return tv_smooth(g, dg, n0=grid)


def distance(psi1, psi2, grid: int = 256) -> float:
    """``TV(ln psi1' - ln psi2')``."""
    pwl1, pwl2 = isinstance(psi1, MonotonePwl), isinstance(psi2, MonotonePwl)
    if pwl1 and pwl2:
        return tv_step_difference(log_slope(psi1), log_slope(psi2))
    if pwl1 or pwl2:
        return complexity(psi1, grid) + complexity(psi2, grid)
    g1, dg1 = _log_slope_smooth(psi1)
    g2, dg2 = _log_slope_smooth(psi2)
    return tv_smooth(lambda x: g1(x) - g2(x), lambda x: dg1(x) - dg2(x), n0=grid)


def _end_log_slopes(psi):
    if isinstance(psi, MonotonePwl):
        s = psi.slopes
        return math.log(s[0]), math.log(s[-1])
    _check_smooth(psi)
    return (math.log(float(psi.d(1, 0.0))), math.log(float(psi.d(1, 1.0))))


def legacy_upper_bound(psi, reference=None, grid: int = 256) -> float:
    """``TV(ln psi') + |ln psi'(0)| + |ln psi'(1)|``.

    With ``reference`` the bound is for ``psi o reference^-1``, i.e. for the
    distance between the two maps.
    """
    a0, a1 = _end_log_slopes(psi)
    if reference is None:
        return complexity(psi, grid) + abs(a0) + abs(a1)
    b0, b1 = _end_log_slopes(reference)
    return distance(psi, reference, grid) + abs(a0 - b0) + abs(a1 - b1)


# ---------------------------------------------------------------------------
# local norm


def _quotient_tv_pwl(u_slopes: StepFunction, psi: MonotonePwl) -> float:
    ps = psi.derivative()
    breaks = merge_breakpoints(u_slopes.breaks, ps.breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    return math.fsum(np.abs(np.diff(u_slopes(mids) / ps(mids))))


def local_norm(u, psi, *, n0=1024, rtol=1e-6) -> float:
    """``TV(u' / psi')``, the cost rate of moving ``psi`` with velocity ``u``.

    ``u`` is a :class:`GridFunction` or a registry function vanishing at both
    ends; ``psi`` a :class:`MonotonePwl` or registry map.
    """
    if isinstance(u, GridFunction):
        if not u.vanishes_at_ends():
            raise BoundaryViolation("velocity must vanish at 0 and 1")
        du = u.derivative()
        if isinstance(psi, MonotonePwl):
            return _quotient_tv_pwl(du, psi)
        _check_smooth(psi)
        # step / smooth: refine psi on dyadic grids until stable
        prev, n = None, max(n0, u.n)
        while True:
            cur = _quotient_tv_pwl(du, MonotonePwl.from_function(psi, nodes=merge_breakpoints(
                np.linspace(0.0, 1.0, n + 1), du.breaks)))
            if prev is not None and abs(cur - prev) <= rtol * max(1.0, cur):
                return cur
            if n > 2 ** 20:
                return cur
            prev, n = cur, 2 * n

    if abs(float(u(0.0))) > 1e-12 or abs(float(u(1.0))) > 1e-12:
        raise BoundaryViolation("velocity must vanish at 0 and 1")
    if isinstance(psi, MonotonePwl):
        # smooth / step: exact on each cell of psi, summed with the jumps
        return _smooth_over_pwl(u, psi)
    _check_smooth(psi)

    def q(x):
        return u.d(1, x) / psi.d(1, x)

    def dq(x):
        p1 = psi.d(1, x)
        return (u.d(2, x) * p1 - u.d(1, x) * psi.d(2, x)) / (p1 * p1)

    return tv_smooth(q, dq)


def _smooth_over_pwl(u: SmoothFunction, psi: MonotonePwl) -> float:
    x, s = psi.breakpoints, psi.slopes
    total = []
    for i in range(s.size):
        a, b = x[i], x[i + 1]
        total.append(tv_smooth(lambda t: u.d(1, a + (b - a) * t) / s[i],
                               lambda t: (b - a) * u.d(2, a + (b - a) * t) / s[i], n0=64))
    jumps = [abs(float(u.d(1, x[i])) * (1 / s[i] - 1 / s[i - 1])) for i in range(1, s.size)]
    return math.fsum(total + jumps)


# ---------------------------------------------------------------------------
# geodesics


def _slope_fn(psi):
    if isinstance(psi, MonotonePwl):
        return None
    _check_smooth(psi)
    return lambda x: psi.d(1, x)


def geodesic_point(psi1, psi2, t: float, n: int = DEFAULT_GRID) -> MonotonePwl:
    """Point at time ``t`` of the minimal path from ``psi1`` to ``psi2``.

    The path has slope proportional to ``psi1'^(1-t) psi2'^t``.  Two pwl
    inputs give an exact pwl answer on merged breakpoints; otherwise the
    normalising integral is a composite trapezoid rule on ``i/n`` merged with
    any pwl breakpoints.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError("t must lie in [0, 1]")
    pwl = [p for p in (psi1, psi2) if isinstance(p, MonotonePwl)]
    if len(pwl) == 2:
        nodes = merge_breakpoints(psi1.breakpoints, psi2.breakpoints)
    else:
        nodes = merge_breakpoints(np.linspace(0.0, 1.0, n + 1), *[p.breakpoints for p in pwl])
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    h = np.diff(nodes)

    parts = []
    for psi, e in ((psi1, 1.0 - t), (psi2, t)):
        f = _slope_fn(psi)
        if f is None:
            s = psi.derivative()(mids)
            parts.append(("step", s ** e))
        else:
            parts.append(("smooth", (f, e)))

    # integrand = step factor (constant per cell) * smooth factor (trapezoid)
    step_factor = np.ones_like(mids)
    left = np.ones_like(mids)
    right = np.ones_like(mids)
    for kind, data in parts:
        if kind == "step":
            step_factor *= data
        else:
            f, e = data
            vals = f(nodes) ** e
            left *= vals[:-1]
            right *= vals[1:]
    cells = step_factor * 0.5 * (left + right) * h
    y = np.concatenate([[0.0], np.cumsum(cells)])
    y /= y[-1]
    y[-1] = 1.0
    return MonotonePwl(nodes, y)


def _pwl_local_norm_same_nodes(a: MonotonePwl, b: MonotonePwl) -> float:
    # TV of (b' - a')/a' for two maps sharing breakpoints
    q = (b.slopes - a.slopes) / a.slopes
    return math.fsum(np.abs(np.diff(q)))


def geodesic_length(psi1, psi2, k: int = DEFAULT_STEPS, n: int = DEFAULT_GRID) -> float:
    """Sum of local norms of the increments along ``k`` uniform time steps."""
    if k < 1:
        raise DomainError("need at least one step")
    pts = [geodesic_point(psi1, psi2, j / k, n) for j in range(k + 1)]
    terms = [_pwl_local_norm_same_nodes(pts[j], pts[j + 1]) for j in range(k)]
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# finite samples


@dataclass(frozen=True, eq=False)
class SampledPair:
    nodes: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("nodes", "x", "y"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if not (self.nodes.size == self.x.size == self.y.size) or self.nodes.size < 2:
            raise NonMonotoneSamples("nodes, x and y must have equal length >= 2")
        for arr in (self.nodes, self.x, self.y):
            if np.any(np.diff(arr) <= 0):
                raise NonMonotoneSamples("samples must be strictly increasing")
            if arr[0] != 0.0 or arr[-1] != 1.0:
                raise NonMonotoneSamples("samples must start at 0 and end at 1")

    @classmethod
    def from_maps(cls, psi1, psi2, nodes):
        nodes = np.asarray(nodes, dtype=float)
        x = np.asarray(psi1(nodes), dtype=float)
        y = np.asarray(psi2(nodes), dtype=float)
        x[0] = y[0] = 0.0
        x[-1] = y[-1] = 1.0
        return cls(nodes, x, y)


def secant_log_ratios(pair: SampledPair):
    r = np.diff(pair.y) / np.diff(pair.x)
    return np.log(r)


def sampled_distance(pair: SampledPair) -> float:
    """Minimal flow time between the finite samples: TV of secant log-ratios."""
    return math.fsum(np.abs(np.diff(secant_log_ratios(pair))))


def discrete_local_norm(u_samples, psi, nodes) -> float:
    """Minimal ReLU weight interpolating ``u`` at the transported nodes ``psi(z_i)``."""
    nodes = np.asarray(nodes, dtype=float)
    u_samples = np.asarray(u_samples, dtype=float)
    p = np.asarray(psi(nodes), dtype=float)
    p[0], p[-1] = 0.0, 1.0
    if uniform(p):
        return float(l1_interp.min_weight(l1_interp.InterpProblem.from_values(u_samples)))
    return l1_interp.lp_oracle_nodes(p, u_samples)
