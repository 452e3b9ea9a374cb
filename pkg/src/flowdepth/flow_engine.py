"""Exact flows of piecewise-linear 1D vector fields and schedules of them.

Inside a linearity cell ``f(x) = alpha*x + beta`` the flow is

    x(t) = x0 + f(x0) * expm1(alpha*t) / alpha,

and the time to reach the cell wall at distance ``d`` (same sign as
``f(x0)``) is ``(d/f0) * log1p(z)/z`` with ``z = alpha*d/f0``; the wall is
unreachable when ``1 + z <= 0``.  Both expressions switch to their series
when the exponent is tiny.  All routines are vectorised over initial points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import l1_interp
from .core1d import MonotonePwl, SmoothFunction
from .errors import BudgetExceeded, DomainError, MonotonicityViolation
from .relu1d_metric import complexity, geodesic_point

ENDPOINT_TOL = 1e-12
SERIES_CUTOFF = 1e-8


def _phi1(z):
    """expm1(z)/z with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2 + z * z / 6, np.expm1(safe) / safe)


def _log1p_ratio(z):
    """log1p(z)/z, series near zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z / 2 + z * z / 3, np.log1p(safe) / safe)


@dataclass(frozen=True, eq=False)
class ReluField1D:
    """``f(x) = sum_i w_i relu(a_i x + b_i)``."""

    terms: tuple
    kinks: np.ndarray = field(init=False, repr=False)
    alphas: np.ndarray = field(init=False, repr=False)
    betas: np.ndarray = field(init=False, repr=False)
    end_values: tuple = field(init=False, repr=False)

    def __post_init__(self):
        terms = tuple((float(w), float(a), float(b)) for w, a, b in self.terms)
        object.__setattr__(self, "terms", terms)
        kinks = np.unique([-b / a for w, a, b in terms if a != 0.0 and w != 0.0])
        # probe one point per cell, including the two unbounded ones
        if kinks.size:
            gaps = np.diff(kinks)
            probes = np.concatenate([[kinks[0] - 1.0], kinks[:-1] + gaps / 2, [kinks[-1] + 1.0]])
        else:
            probes = np.array([0.0])
        alphas = np.zeros(probes.size)
        betas = np.zeros(probes.size)
        for w, a, b in terms:
            active = (a * probes + b) > 0
            alphas += np.where(active, w * a, 0.0)
            betas += np.where(active, w * b, 0.0)
        object.__setattr__(self, "kinks", kinks)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "end_values", (float(self(0.0)), float(self(1.0))))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, a, b in self.terms:
            out = out + w * np.maximum(a * x + b, 0.0)
        return out

    def __neg__(self):
        return ReluField1D(tuple((-w, a, b) for w, a, b in self.terms))

    def scaled(self, c):
        return ReluField1D(tuple((c * w, a, b) for w, a, b in self.terms))

    @property
    def weight_cost(self):
        return math.fsum(abs(w * a) for w, a, _ in self.terms)

    @property
    def interior_cost(self):
        """TV of ``f'`` over the open interval (0, 1)."""
        inside = (self.kinks > 0.0) & (self.kinks < 1.0)
        jumps = np.diff(self.alphas)[inside]
        return math.fsum(np.abs(jumps))

    def fixes_endpoints(self, tol=ENDPOINT_TOL):
        return abs(self.end_values[0]) <= tol and abs(self.end_values[1]) <= tol

    def is_member(self):
        return self.fixes_endpoints() and self.weight_cost <= 1.0 + 1e-12

    def cell_index(self, x, side):
        return np.searchsorted(self.kinks, x, side=side)


def flow_exact(field_: ReluField1D, t: float, x0):
    """Time-``t`` flow of ``field_`` applied to ``x0`` (scalar or array)."""
    scalar = np.ndim(x0) == 0
    x = np.array(x0, dtype=float, ndmin=1)
    if t == 0.0:
        return float(x[0]) if scalar else x
    if t < 0.0:
        field_, t = -field_, -t
    pinned = np.zeros(x.shape, dtype=bool)
    if field_.fixes_endpoints():
        pinned = (x == 0.0) | (x == 1.0)
    tau = np.where(pinned, 0.0, float(t))
    kinks, alphas, betas = field_.kinks, field_.alphas, field_.betas
    active = tau > 0.0
    for _ in range(kinks.size + 2):
        if not active.any():
            break
        xi = x[active]
        ti = tau[active]
        # cell containing xi, resolved toward the direction of motion
        f_left = alphas[field_.cell_index(xi, "left")] * xi + betas[field_.cell_index(xi, "left")]
        move_right = f_left > 0.0
        cell = np.where(move_right, field_.cell_index(xi, "right"), field_.cell_index(xi, "left"))
        al, be = alphas[cell], betas[cell]
        f0 = al * xi + be
        wall = np.where(f0 > 0.0,
                        np.where(cell < kinks.size, kinks[np.minimum(cell, kinks.size - 1)], np.inf),
                        np.where(cell > 0, kinks[np.maximum(cell - 1, 0)], -np.inf))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = wall - xi
            z = al * d / f0
            reach = np.isfinite(wall) & (f0 != 0.0) & (1.0 + z > 0.0)
            hit = np.where(reach, (d / f0) * _log1p_ratio(np.where(reach, z, 0.0)), np.inf)
        finish = ~(hit < ti)
        new_x = np.where(finish, xi + f0 * ti * _phi1(al * ti), wall)
        new_t = np.where(finish, 0.0, ti - hit)
        x[active] = new_x
        tau[active] = new_t
        active = tau > 0.0
    if active.any():
        raise MonotonicityViolation("event loop did not terminate")
    return float(x[0]) if scalar else x


@dataclass(frozen=True)
class ControlSchedule:
    segments: tuple = ()

    def __post_init__(self):
        segs = tuple((f, float(d)) for f, d in self.segments)
        if any(d < 0 for _, d in segs):
            raise DomainError("durations must be non-negative")
        object.__setattr__(self, "segments", segs)

    @property
    def total_time(self):
        return math.fsum(d for _, d in self.segments)

    def then(self, other: "ControlSchedule"):
        return ControlSchedule(self.segments + other.segments)

    def apply(self, x):
        x = np.array(x, dtype=float)
        for f, d in self.segments:
            x = flow_exact(f, d, x)
        return x


def _as_pwl(x0, x):
    if np.any(np.diff(x) <= 0):
        raise MonotonicityViolation("flow map lost monotonicity")
    return MonotonePwl(x0, x)


def flow_map(schedule: ControlSchedule, n: int = 1024) -> MonotonePwl:
    x0 = np.linspace(0.0, 1.0, n + 1)
    return _as_pwl(x0, schedule.apply(x0))


def resnet_iterate(schedule: ControlSchedule, steps: int, n: int = 1024) -> MonotonePwl:
    """Forward-Euler discretisation of ``schedule``: ``x <- x + dt f(x)``."""
    if steps < 1:
        raise DomainError("steps must be >= 1")
    x0 = np.linspace(0.0, 1.0, n + 1)
    x = x0.copy()
    for f, d in schedule.segments:
        dt = d / steps
        for _ in range(steps):
            x = x + dt * f(x)
    return _as_pwl(x0, x)


def log_slope_tv(x0, x) -> float:
    """TV of the log secant slopes of sampled map values."""
    s = np.diff(x) / np.diff(x0)
    return math.fsum(np.abs(np.diff(np.log(s))))


# ---------------------------------------------------------------------------
# geodesic realisation


def right_block(p: float, sign: float = 1.0) -> ReluField1D:
    """``relu(x - p) - (1 - p) relu(x)``: one interior kink, zero at 0 and 1."""
    return ReluField1D(((sign, 1.0, -p), (-sign * (1.0 - p), 1.0, 0.0)))


def left_block(p: float, sign: float = 1.0) -> ReluField1D:
    """``relu(p - x) - p relu(1 - x)``: one interior kink, zero at 0 and 1."""
    return ReluField1D(((sign, -1.0, p), (-sign * p, -1.0, 1.0)))


def witness_schedule(g_vals) -> ControlSchedule:
    """Schedule whose flow approximates ``x + g(x)`` to first order.

    Each interior witness term becomes a block with unit interior kink,
    flown for the absolute weight.  The linear boundary corrections inside
    the blocks sum to the witness's constant and boundary terms, so the
    blocks add up to the interpolant exactly.
    """
    prob = l1_interp.InterpProblem.from_values(g_vals)
    wit = l1_interp.witness(prob)
    N = prob.N
    segs = []
    for i in range(1, N):
        p = i / N
        if wit.w[i] != 0.0:
            segs.append((right_block(p, math.copysign(1.0, wit.w[i])), abs(wit.w[i])))
        if wit.v[i] != 0.0:
            segs.append((left_block(p, math.copysign(1.0, wit.v[i])), abs(wit.v[i])))
    return ControlSchedule(tuple(segs))


@dataclass
class RealizationReport:
    target: str
    k: int
    N: int
    total_time: float
    budget: float
    complexity: float
    sup_error: float
    relu_weight_time: float
    depth_tv: float
    schedule: ControlSchedule = field(repr=False, default_factory=ControlSchedule)
    trajectory: list = field(repr=False, default_factory=list)

    def as_dict(self):
        return {"target": self.target, "k": self.k, "N": self.N,
                "total_time": self.total_time, "budget": self.budget,
                "sup_error": self.sup_error}


def _label(psi):
    return psi.label if isinstance(psi, SmoothFunction) else "pwl"


def realize_geodesic(psi, delta: float = 0.15, k: int = 32, N: int = 64, *,
                     n_grid: int = 4096, n_eval: int = 1024, trajectory_points: int = 0,
                     label: str | None = None) -> RealizationReport:
    """Follow the minimal path from the identity to ``psi`` with ReLU flows.

    The path is cut into ``k`` steps.  At each step the displacement
    ``g = gamma_{j+1} o gamma_j^{-1} - id`` is sampled at ``N + 1`` uniform
    nodes, turned into a minimal-weight ReLU interpolant and realised by
    :func:`witness_schedule`.  Time is accounted by the interior kink mass of
    each field (its TV of ``f'``); ``relu_weight_time`` additionally reports
    the sum of ``|w a|`` including the boundary corrections.
    """
    c = complexity(psi)
    budget = (1.0 + delta) * c
    x0 = np.linspace(0.0, 1.0, n_eval + 1)
    x = x0.copy()
    nodes = np.linspace(0.0, 1.0, N + 1)
    traj_idx = (np.unique(np.linspace(0, n_eval, trajectory_points).round().astype(int))
                if trajectory_points else np.array([], dtype=int))
    traj = [(0.0, float(x0[i]), float(x[i])) for i in traj_idx]
    segments = []
    clock = 0.0

    identity = MonotonePwl.identity()
    gamma = [geodesic_point(identity, psi, j / k, n_grid) for j in range(k + 1)]
    for j in range(k):
        pre = gamma[j].inverse(nodes)
        g = gamma[j + 1](pre) - nodes
        g[0] = g[-1] = 0.0
        if not np.any(g):
            continue
        step = witness_schedule(g)
        x = step.apply(x)
        segments.extend(step.segments)
        clock += step.total_time
        traj.extend((clock, float(x0[i]), float(x[i])) for i in traj_idx)

    schedule = ControlSchedule(tuple(segments))
    total = schedule.total_time
    weight_time = math.fsum(d * f.weight_cost for f, d in segments)
    target_vals = np.asarray(psi(x0), dtype=float)
    if np.any(np.diff(x) <= 0):
        raise MonotonicityViolation("realised map lost monotonicity")
    report = RealizationReport(
        target=label or _label(psi), k=k, N=N, total_time=total, budget=budget,
        complexity=c, sup_error=float(np.max(np.abs(x - target_vals))),
        relu_weight_time=weight_time, depth_tv=log_slope_tv(x0, x),
        schedule=schedule, trajectory=traj)
    if total > budget + 1e-12:
        raise BudgetExceeded(f"total time {total:.6g} exceeds budget {budget:.6g}", report)
    return report
