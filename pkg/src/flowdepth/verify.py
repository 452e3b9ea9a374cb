"""Randomised invariant checks for every module, used by ``flowdepth verify``.

Each property returns ``(samples, worst_slack)``; it passes when the worst
slack is non-negative.  Slack is measured in the natural units of the
property (for an inequality ``a <= b + tol`` it is ``b + tol - a``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import circle_ln, core1d, flow_engine, l1_interp, lift2d, relu1d_metric, so3_metric
from .core1d import MonotonePwl, compose, random_pwl, random_step

DEFAULT_SEED = 20240917


@dataclass(frozen=True)
class Property:
    name: str
    module: str
    check: Callable


@dataclass(frozen=True)
class Outcome:
    name: str
    module: str
    samples: int
    worst_slack: float

    @property
    def passed(self):
        return self.worst_slack >= 0.0 and math.isfinite(self.worst_slack)

    def as_dict(self):
        return {"name": self.name, "module": self.module, "samples": self.samples,
                "worst_slack": self.worst_slack, "passed": self.passed}


def _worst(values):
    return float(min(values))


# core1d -------------------------------------------------------------------


def _tv_subadditive(rng):
    slack = []
    for _ in range(100):
        f, g = rng.normal(size=(2, 65))
        lhs = core1d.tv_of_samples(f + g)
        slack.append(core1d.tv_of_samples(f) + core1d.tv_of_samples(g) - lhs + 1e-12)
    return 100, _worst(slack)


def _step_triangle(rng):
    slack = []
    for _ in range(100):
        a, b, c = (random_step(rng, 5) for _ in range(3))
        d = core1d.tv_step_difference
        slack.append(d(a, b) + d(b, c) - d(a, c) + 1e-12)
    return 100, _worst(slack)


def _reparam_invariance(rng):
    slack = []
    for _ in range(100):
        a, phi = random_step(rng, 6), random_pwl(rng, 5)
        slack.append(1e-12 - abs(a.compose(phi).tv() - a.tv()))
    return 100, _worst(slack)


def _compose_associative(rng):
    x = np.linspace(0.0, 1.0, 1001)
    slack = []
    for _ in range(30):
        p, q, r = (random_pwl(rng, 5) for _ in range(3))
        lhs, rhs = compose(compose(p, q), r), compose(p, compose(q, r))
        slack.append(1e-12 - float(np.max(np.abs(lhs(x) - rhs(x)))))
    return 30, _worst(slack)


def _registry_diffeos(rng):
    maps = [core1d.smooth_map(n) for n in ("identity", "exp_map", "fig1", "fig2", "fig3")]
    maps += [core1d.smooth_map("eps_quad", 1.0), core1d.smooth_map("osc", 2.0)]
    slack = []
    for m in maps:
        ok, low = core1d.check_registry_map(m)
        slack.append(low if ok else -1.0)
    return len(maps), _worst(slack)


# relu1d_metric --------------------------------------------------------------


def _metric_axioms(rng):
    d = relu1d_metric.distance
    slack = []
    for _ in range(500):
        p, q, r = (random_pwl(rng, 6) for _ in range(3))
        slack.append(-abs(d(p, q) - d(q, p)))
        slack.append(d(p, q) + d(q, r) - d(p, r) + 1e-12)
        slack.append(-d(p, p))
    return 500, _worst(slack)


def _right_invariance(rng):
    d = relu1d_metric.distance
    slack = []
    for _ in range(100):
        p, q, phi = (random_pwl(rng, 5) for _ in range(3))
        slack.append(1e-12 * max(1.0, d(p, q)) - abs(d(compose(p, phi), compose(q, phi)) - d(p, q)))
    return 100, _worst(slack)


def _compositional_triangle(rng):
    c = relu1d_metric.complexity
    slack = []
    for _ in range(100):
        p, q = random_pwl(rng, 6), random_pwl(rng, 6)
        slack.append(c(p) + c(q) - c(compose(p, q)) + 1e-12)
    return 100, _worst(slack)


def _legacy_sharpening(rng):
    maps = [core1d.smooth_map(n) for n in ("exp_map", "fig1", "fig2", "fig3")]
    maps += [core1d.smooth_map("eps_quad", 1.0), core1d.smooth_map("osc", 2.0)]
    maps += [random_pwl(rng, 6) for _ in range(50)]
    slack = [relu1d_metric.legacy_upper_bound(m) - relu1d_metric.complexity(m) for m in maps]
    return len(maps), _worst(slack)


def _sampled_monotone(rng):
    slack = []
    psi = core1d.smooth_map("fig1")
    ident = core1d.smooth_map("identity")
    full = relu1d_metric.distance(ident, psi)
    prev = 0.0
    for j in range(1, 9):
        z = np.linspace(0.0, 1.0, 2 ** j + 1)
        v = relu1d_metric.sampled_distance(relu1d_metric.SampledPair.from_maps(ident, psi, z))
        slack += [v - prev + 1e-12, full + 1e-12 - v]
        prev = v
    return 8, _worst(slack)


# l1_interp -------------------------------------------------------------------


def _random_problem(rng, pinned=None):
    N = int(rng.integers(2, 13))
    u = rng.normal(size=N + 1)
    if pinned if pinned is not None else rng.random() < 0.5:
        u[0] = u[-1] = 0.0
    return l1_interp.InterpProblem.from_values(u)


def _lp_equivalence(rng):
    slack = []
    for _ in range(200):
        p = _random_problem(rng)
        slack.append(1e-8 - abs(float(l1_interp.min_weight(p)) - l1_interp.lp_oracle(p)))
    return 200, _worst(slack)


def _witness_feasible(rng):
    slack = []
    for _ in range(200):
        p = _random_problem(rng)
        w = l1_interp.witness(p)
        slack.append(1e-10 - w.residual(p))
        slack.append(1e-10 - abs(w.cost() - float(l1_interp.min_weight(p))))
    return 200, _worst(slack)


def _symmetric_form(rng):
    slack = []
    for _ in range(200):
        p = _random_problem(rng)
        slack.append(1e-10 - abs(l1_interp.min_weight(p) - l1_interp.min_weight_symmetric(p)))
    return 200, _worst(slack)


def _homogeneity(rng):
    slack = []
    for _ in range(100):
        p = _random_problem(rng)
        c = float(rng.normal(0.0, 3.0))
        q = l1_interp.InterpProblem(p.N, tuple(c * v for v in p.u_vals))
        slack.append(1e-10 - abs(l1_interp.min_weight(q) - abs(c) * l1_interp.min_weight(p)))
        r = _random_problem(rng)
        if r.N == p.N:
            s = l1_interp.InterpProblem(p.N, tuple(a + b for a, b in zip(p.u_vals, r.u_vals)))
            slack.append(l1_interp.min_weight(p) + l1_interp.min_weight(r)
                         - l1_interp.min_weight(s) + 1e-10)
    return 100, _worst(slack)


# flow_engine -----------------------------------------------------------------


def random_member(rng, kinks=3):
    """Random zero-boundary ReLU field with unit weight cost."""
    terms = []
    for q in rng.uniform(0.05, 0.95, kinks):
        c = float(rng.normal())
        block = flow_engine.right_block if rng.random() < 0.5 else flow_engine.left_block
        terms += [(c * w, a, b) for w, a, b in block(float(q)).terms]
    f = flow_engine.ReluField1D(tuple(terms))
    return f.scaled(1.0 / f.weight_cost)


def _random_schedule(rng, segments=4):
    return flow_engine.ControlSchedule(tuple(
        (random_member(rng), float(rng.uniform(0.1, 1.0))) for _ in range(segments)))


def _fixed_endpoints(rng):
    slack = []
    for _ in range(50):
        s = _random_schedule(rng)
        y = s.apply(np.array([0.0, 1.0]))
        slack.append(0.0 if (y[0] == 0.0 and y[1] == 1.0) else -1.0)
    return 50, _worst(slack)


def _depth_bound(rng):
    x0 = np.linspace(0.0, 1.0, 513)
    slack = []
    for _ in range(50):
        s = _random_schedule(rng)
        tv = flow_engine.log_slope_tv(x0, s.apply(x0))
        budget = math.fsum(d * f.interior_cost for f, d in s.segments)
        slack.append(budget + 1e-8 - tv)
    return 50, _worst(slack)


def _inverse_flow(rng):
    x0 = np.linspace(0.0, 1.0, 257)
    slack = []
    for _ in range(50):
        f, t = random_member(rng), float(rng.uniform(0.1, 2.0))
        back = flow_engine.flow_exact(-f, t, flow_engine.flow_exact(f, t, x0))
        slack.append(1e-10 - float(np.max(np.abs(back - x0))))
    return 50, _worst(slack)


def rk4_batch(fields, times, x0, max_step=1e-4):
    """Classic RK4 for many fields at once, straight from the ReLU terms.

    Each field ``i`` is integrated to ``times[i]`` with a fixed step no larger
    than ``max_step``; rows of the result follow ``fields``.
    """
    width = max(len(f.terms) for f in fields)
    W, A, B = (np.zeros((len(fields), width, 1)) for _ in range(3))
    for i, f in enumerate(fields):
        for j, (w, a, b) in enumerate(f.terms):
            W[i, j, 0], A[i, j, 0], B[i, j, 0] = w, a, b

    def rhs(x):
        return np.sum(W * np.maximum(A * x[:, None, :] + B, 0.0), axis=1)

    times = np.asarray(times, dtype=float)
    steps = int(math.ceil(float(times.max()) / max_step))
    h = (times / steps)[:, None]
    x = np.tile(np.asarray(x0, dtype=float), (len(fields), 1))
    for _ in range(steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def _rk4_crosscheck(rng):
    x0 = np.linspace(0.0, 1.0, 33)
    fields = [random_member(rng) for _ in range(50)]
    times = rng.uniform(0.2, 1.0, 50)
    approx = rk4_batch(fields, times, x0)
    slack = [1e-9 - float(np.max(np.abs(flow_engine.flow_exact(f, t, x0) - row)))
             for f, t, row in zip(fields, times, approx)]
    return 50, _worst(slack)


# lift2d ------------------------------------------------------------------------


def _factorization(rng):
    slack = []
    for name, kappa in (("square", 0.3), ("sin3", 0.2), ("zero", 0.3)):
        cfg = lift2d.LiftConfig(lift2d.scalar_target(name), (-1.0, 1.0), 0.5, kappa)
        slack.append(1e-7 - lift2d.verify_factorization(cfg, 1000))
    return 3, _worst(slack)


def _lift_reversible(rng):
    cfg = lift2d.LiftConfig(lift2d.scalar_target("square"), (-1.0, 1.0), 0.5, 0.3)
    r = np.sqrt(rng.uniform(0.0, 4.0, 200))
    a = rng.uniform(0.0, 2 * math.pi, 200)
    p = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
    q = lift2d.lift_flow(cfg, 1.0, p)
    back = lift2d.lift_flow(cfg, -1.0, q)
    slack = [1e-7 - float(np.max(np.abs(back - p))),
             2.0 + 1e-9 - float(np.max(np.hypot(q[:, 0], q[:, 1])))]
    return 200, _worst(slack)


# so3 ---------------------------------------------------------------------------


def _log_sandwich(rng):
    slack = []
    for R in so3_metric.random_rotations(rng, 1000):
        b = so3_metric.d_l1_bounds(np.eye(3), R)
        slack += [b.log_upper - b.lower + 1e-10, math.sqrt(3) * b.lower - b.log_upper + 1e-10,
                  b.upper - b.lower + 1e-10]
    return 1000, _worst(slack)


def _euler_realizable(rng):
    slack = []
    for R in so3_metric.random_rotations(rng, 300):
        b = so3_metric.d_l1_bounds(np.eye(3), R)
        back = so3_metric.compose_axial(b.euler_sequence, b.euler_angles)
        slack.append(1e-9 - float(np.linalg.norm(back - R)))
    return 300, _worst(slack)


def _l2_triangle(rng):
    Rs = so3_metric.random_rotations(rng, 3000)
    d = so3_metric.d_l2
    slack = [d(a, b) + d(b, c) - d(a, c) + 1e-10 for a, b, c in zip(Rs[0::3], Rs[1::3], Rs[2::3])]
    return 1000, _worst(slack)


# circle_ln -----------------------------------------------------------------------


def _gb_quadrature(rng):
    n = 2 ** 16
    x = circle_ln.TWO_PI * np.arange(n) / n
    slack = []
    for beta in (math.pi / 3, circle_ln.DEFAULT_BETA, 2.5):
        g = circle_ln.gb_samples(beta, x)
        for k in range(65):
            q = float(np.mean(g * np.cos(k * x)))
            slack.append(1e-8 - abs(q - circle_ln.gb_coeff(k, beta)))
    return 195, _worst(slack)


def _deconvolve_roundtrip(rng):
    slack = []
    n = 256
    k = np.arange(1, 20)
    for _ in range(10):
        a, b = rng.normal(size=(2, k.size)) / k ** 2
        f = circle_ln.PeriodicGrid.sample(
            lambda x: np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b, n)
        slack.append(1e-8 - circle_ln.deconvolve(f).reconstruction_error)
    return 10, _worst(slack)


def _j_zero(rng):
    slack = []
    for c in (0.0, 0.05, 0.2):
        psi = circle_ln.CircleDiffeo(c, 2 if c > 0.1 else 1)
        g = circle_ln.global_bound_functional(psi, psi, 256)
        slack.append(-abs(g.J) - abs(g.sup_term))
    return 3, _worst(slack)


PROPERTIES = (
    Property("tv-subadditive", "core1d", _tv_subadditive),
    Property("step-tv-triangle", "core1d", _step_triangle),
    Property("reparameterization-invariance", "core1d", _reparam_invariance),
    Property("compose-associative", "core1d", _compose_associative),
    Property("registry-diffeomorphisms", "core1d", _registry_diffeos),
    Property("metric-axioms", "relu1d_metric", _metric_axioms),
    Property("right-invariance", "relu1d_metric", _right_invariance),
    Property("compositional-triangle", "relu1d_metric", _compositional_triangle),
    Property("legacy-bound-sharpening", "relu1d_metric", _legacy_sharpening),
    Property("sampled-distance-monotone", "relu1d_metric", _sampled_monotone),
    Property("lp-equivalence", "l1_interp", _lp_equivalence),
    Property("witness-feasibility", "l1_interp", _witness_feasible),
    Property("symmetric-form", "l1_interp", _symmetric_form),
    Property("homogeneity-subadditivity", "l1_interp", _homogeneity),
    Property("fixed-endpoints", "flow_engine", _fixed_endpoints),
    Property("depth-bound", "flow_engine", _depth_bound),
    Property("inverse-flow", "flow_engine", _inverse_flow),
    Property("rk4-crosscheck", "flow_engine", _rk4_crosscheck),
    Property("factorization", "lift2d", _factorization),
    Property("reversibility-ball", "lift2d", _lift_reversible),
    Property("log-sandwich", "so3", _log_sandwich),
    Property("euler-realizability", "so3", _euler_realizable),
    Property("l2-triangle", "so3", _l2_triangle),
    Property("gb-quadrature", "circle_ln", _gb_quadrature),
    Property("deconvolve-roundtrip", "circle_ln", _deconvolve_roundtrip),
    Property("J-vanishes-on-diagonal", "circle_ln", _j_zero),
)

MODULES = tuple(dict.fromkeys(p.module for p in PROPERTIES))


def run(filters=None, seed: int = DEFAULT_SEED, fault: str | None = None):
    """Run the selected properties; returns the JSON-ready report."""
    # seeds follow the position in the full table so a filtered run
    # reproduces the same samples as the full run
    selected = [(i, p) for i, p in enumerate(PROPERTIES)
                if not filters or p.module in filters or p.name in filters]
    outcomes = []
    for i, prop in selected:
        rng = np.random.default_rng([seed, i])
        if fault:
            with l1_interp.inject_fault(fault):
                samples, slack = prop.check(rng)
        else:
            samples, slack = prop.check(rng)
        outcomes.append(Outcome(prop.name, prop.module, samples, slack))
    return {
        "seed": seed,
        "fault": fault,
        "passed": all(o.passed for o in outcomes),
        "failed": [o.name for o in outcomes if not o.passed],
        "properties": [o.as_dict() for o in outcomes],
    }
