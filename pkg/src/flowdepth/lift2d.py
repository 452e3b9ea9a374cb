"""Dimension-doubling factorisation of a scalar map through a planar flow.

A target ``f`` on ``K`` is written as ``beta o Phi_1 o alpha`` with

    alpha(u)   = (lambda u, 0)
    beta(u, v) = v / kappa
    X(u, v)    = eta(|(u, v)|) * (0, kappa f(u / lambda))

where ``eta`` is a quintic smoothstep equal to 1 on the unit disc and 0
outside radius 3/2.  Inside the unit disc the flow of ``X`` is a straight
vertical drift, so the lifted points travel exactly to ``kappa f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigViolation, DomainError

INNER_RADIUS = 1.0
OUTER_RADIUS = 1.5
SEGMENT_MARGIN = 0.1
RK_TOL = 1e-10


@dataclass(frozen=True)
class ScalarTarget:
    name: str
    fn: Callable = None

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


_TARGETS = {
    "zero": lambda x: np.zeros_like(x),
    "square": lambda x: x * x,
    "sin3": lambda x: np.sin(3 * x),
    "cube": lambda x: x ** 3,
    "tanh": np.tanh,
}
TARGET_NAMES = tuple(_TARGETS)


def scalar_target(name: str) -> ScalarTarget:
    try:
        return ScalarTarget(name, _TARGETS[name])
    except KeyError:
        raise DomainError(f"unknown target {name!r}; choose from {', '.join(TARGET_NAMES)}") from None


def eta(r):
    """C^2 cutoff: 1 for r <= 1, 0 for r >= 3/2, quintic smoothstep between."""
    s = np.clip((np.asarray(r, dtype=float) - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS), 0.0, 1.0)
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


@dataclass(frozen=True)
class LiftConfig:
    f: ScalarTarget
    K: tuple
    lam: float
    kappa: float

    def __post_init__(self):
        k0, k1 = (float(v) for v in self.K)
        if not k0 < k1:
            raise DomainError("domain must be an interval [k0, k1] with k0 < k1")
        if self.lam <= 0 or self.kappa <= 0:
            raise DomainError("lambda and kappa must be positive")
        object.__setattr__(self, "K", (k0, k1))

    @classmethod
    def auto(cls, f: ScalarTarget, K=(-1.0, 1.0), m=1000):
        """Scalings that leave ``SEGMENT_MARGIN`` of room inside the unit disc."""
        k0, k1 = K
        lam = 0.5 / max(abs(k0), abs(k1))
        fmax = float(np.max(np.abs(f(np.linspace(k0, k1, m)))))
        room = (1.0 - SEGMENT_MARGIN) ** 2 - 0.25
        kappa = 1.0 if fmax == 0.0 else min(1.0, math.sqrt(room) / fmax)
        return cls(f, (k0, k1), lam, kappa)

    def alpha(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack([self.lam * u, np.zeros_like(u)], axis=-1)

    def beta(self, p):
        return np.asarray(p, dtype=float)[..., 1] / self.kappa

    def field(self, p):
        p = np.asarray(p, dtype=float)
        r = np.hypot(p[..., 0], p[..., 1])
        out = np.zeros_like(p)
        inside = r < OUTER_RADIUS
        if np.any(inside):
            q = p[inside]
            out[inside, 1] = eta(r[inside]) * self.kappa * self.f(q[:, 0] / self.lam)
        return out

    def segment_margin(self, m=1000):
        """``1 - max`` radius of the drift segments, on an ``m``-point grid of ``K``."""
        u = np.linspace(self.K[0], self.K[1], m)
        ends = np.hypot(self.lam * u, self.kappa * self.f(u))
        starts = np.abs(self.lam * u)
        return 1.0 - float(max(ends.max(), starts.max()))


def _rk4_step(F, y, h):
    k1 = F(y)
    k2 = F(y + 0.5 * h * k1)
    k3 = F(y + 0.5 * h * k2)
    k4 = F(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(F, y0, t, tol=RK_TOL, h0=0.05):
    """Adaptive RK4 by step doubling; the step is shared by the whole batch."""
    y = np.array(y0, dtype=float)
    if t == 0.0:
        return y
    direction = math.copysign(1.0, t)
    remaining = abs(t)
    h = min(h0, remaining)
    while remaining > 0.0:
        h = min(h, remaining)
        full = _rk4_step(F, y, direction * h)
        half = _rk4_step(F, y, direction * h / 2)
        half = _rk4_step(F, half, direction * h / 2)
        err = float(np.max(np.abs(full - half))) if y.size else 0.0
        if err <= tol or h < 1e-9:
            y = half + (half - full) / 15.0
            remaining -= h
            h = h * min(4.0, 0.9 * (tol / err) ** 0.2) if err > 0 else 4.0 * h
        else:
            h *= max(0.1, 0.9 * (tol / err) ** 0.2)
    return y


def lift_flow(config: LiftConfig, t: float, points):
    """Time-``t`` flow of the cutoff field; negative ``t`` runs it backward."""
    p = np.array(points, dtype=float)
    flat = p.reshape(-1, 2)
    r = np.hypot(flat[:, 0], flat[:, 1])
    moving = r < OUTER_RADIUS
    out = flat.copy()
    if np.any(moving) and t != 0.0:
        out[moving] = integrate(config.field, flat[moving], t)
    return out.reshape(p.shape)


def verify_factorization(config: LiftConfig, m: int = 1000) -> float:
    margin = config.segment_margin(m)
    if margin <= 0.0:
        raise ConfigViolation(f"drift segments leave the unit disc (margin {margin:.3g})")
    u = np.linspace(config.K[0], config.K[1], m)
    out = lift_flow(config, 1.0, config.alpha(u))
    return float(np.max(np.abs(config.beta(out) - config.f(u))))
