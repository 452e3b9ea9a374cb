"""Monotone maps of [0, 1], step functions and total-variation calculus.

Three representations are used throughout the package:

* :class:`MonotonePwl` -- a strictly increasing piecewise-linear map fixing
  0 and 1.  Its derivative is a :class:`StepFunction`, so every TV quantity
  built from it is computed exactly on merged breakpoints.
* :class:`GridFunction` -- samples of a scalar function at ``i/n``.
* :class:`SmoothFunction` -- a registry entry carrying analytic derivatives,
  used whenever a closed form exists so that TV quadrature never falls back
  to finite differences.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BoundaryViolation, DomainError, NonPositiveSlope

POSITIVITY_FLOOR = 1e-12
MERGE_TOL = 1e-14


def _as_float_array(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def merge_breakpoints(*arrays):
    """Sorted union of breakpoint arrays, collapsing points closer than MERGE_TOL."""
    pts = np.unique(np.concatenate([np.asarray(a, dtype=float) for a in arrays]))
    if pts.size < 2:
        return pts
    keep = np.ones(pts.size, dtype=bool)
    keep[1:] = np.diff(pts) > MERGE_TOL
    pts = pts[keep]
    # snap the ends back onto exact 0 and 1 if collapsing moved them
    if pts[0] != 0.0 and abs(pts[0]) <= MERGE_TOL:
        pts[0] = 0.0
    if pts[-1] != 1.0 and abs(pts[-1] - 1.0) <= MERGE_TOL:
        pts[-1] = 1.0
    return pts


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous step function on [0, 1].

    ``values[i]`` is the value on ``[breaks[i], breaks[i+1])``.
    """

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = _as_float_array(self.breaks, "breaks")
        v = _as_float_array(self.values, "values")
        if b.size != v.size + 1 or v.size < 1:
            raise DomainError("a step function needs len(breaks) == len(values) + 1")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise DomainError("step functions live on [0, 1]")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, c=0.0):
        return cls(np.array([0.0, 1.0]), np.array([float(c)]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, self.values.size - 1)
        return self.values[idx]

    def jumps(self):
        return np.diff(self.values)

    def tv(self):
        return math.fsum(np.abs(self.jumps()))

    def resample(self, breaks):
        """Same function written on a finer breakpoint set."""
        breaks = np.asarray(breaks, dtype=float)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        return StepFunction(breaks, self(mids))

    def compose(self, phi: "MonotonePwl"):
        """The step function ``self o phi``; its TV equals ``self.tv()``."""
        inner = phi.inverse(self.breaks[1:-1])
        breaks = merge_breakpoints([0.0, 1.0], inner)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        return StepFunction(breaks, self(phi(mids)))

    def __sub__(self, other: "StepFunction"):
        breaks = merge_breakpoints(self.breaks, other.breaks)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        return StepFunction(breaks, self(mids) - other(mids))


@dataclass(frozen=True, eq=False)
class MonotonePwl:
    """Strictly increasing piecewise-linear map of [0, 1] onto itself."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = _as_float_array(self.breakpoints, "breakpoints")
        y = _as_float_array(self.values, "values")
        if x.size != y.size or x.size < 2:
            raise DomainError("breakpoints and values must have equal length >= 2")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise DomainError("breakpoints must start at 0 and end at 1")
        if y[0] != 0.0 or y[-1] != 1.0:
            raise BoundaryViolation("a diffeomorphism of [0, 1] must fix 0 and 1")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise DomainError("degenerate or unsorted breakpoints")
        slopes = np.diff(y) / dx
        if np.any(slopes <= POSITIVITY_FLOOR):
            i = int(np.argmin(slopes))
            raise NonPositiveSlope(f"slope {slopes[i]:.3e} on [{x[i]:.6g}, {x[i + 1]:.6g}]")
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", y)

    @classmethod
    def identity(cls):
        return cls(np.array([0.0, 1.0]), np.array([0.0, 1.0]))

    @classmethod
    def from_function(cls, fn: Callable, n: int | None = None, nodes=None):
        """Interpolate ``fn`` at ``nodes`` (default: ``i/n``)."""
        if nodes is None:
            nodes = np.linspace(0.0, 1.0, n + 1)
        nodes = np.asarray(nodes, dtype=float)
        y = np.asarray(fn(nodes), dtype=float)
        y[0], y[-1] = 0.0, 1.0
        return cls(nodes, y)

    @property
    def slopes(self):
        return np.diff(self.values) / np.diff(self.breakpoints)

    def __call__(self, x):
        return np.interp(x, self.breakpoints, self.values)

    def inverse(self, y):
        return np.interp(y, self.values, self.breakpoints)

    def inverse_map(self):
        return MonotonePwl(self.values.copy(), self.breakpoints.copy())

    def derivative(self):
        return StepFunction(self.breakpoints, self.slopes)

    def __len__(self):
        return self.breakpoints.size

    def sup_distance(self, other, n=None):
        pts = merge_breakpoints(self.breakpoints, _breaks_of(other))
        if n is not None:
            pts = merge_breakpoints(pts, np.linspace(0.0, 1.0, n + 1))
        return float(np.max(np.abs(self(pts) - _evaluate(other, pts))))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``values[i] = u(i/n)`` of a scalar function on [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = _as_float_array(self.values, "values")
        if v.size < 3:
            raise DomainError("a grid function needs n >= 2")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size - 1

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.n + 1)

    @classmethod
    def sample(cls, fn: Callable, n: int):
        return cls(np.asarray(fn(np.linspace(0.0, 1.0, n + 1)), dtype=float))

    def __call__(self, x):
        return np.interp(x, self.nodes, self.values)

    def derivative(self):
        return StepFunction(self.nodes, np.diff(self.values) * self.n)

    def vanishes_at_ends(self, tol=1e-12):
        return abs(self.values[0]) <= tol and abs(self.values[-1]) <= tol


# ---------------------------------------------------------------------------
# smooth registry


@dataclass(frozen=True, eq=False)
class SmoothFunction:
    """A scalar function on [0, 1] with analytic derivatives up to order 3."""

    name: str
    params: tuple
    derivs: tuple = field(repr=False)

    def __call__(self, x):
        return self.derivs[0](np.asarray(x, dtype=float))

    def d(self, order, x):
        return self.derivs[order](np.asarray(x, dtype=float))

    @property
    def label(self):
        if not self.params:
            return self.name
        return f"{self.name}({','.join(f'{p:g}' for p in self.params)})"


def _const(c):
    return lambda x: np.full(np.shape(x), float(c))


def _identity():
    return (lambda x: x * 1.0, _const(1.0), _const(0.0), _const(0.0))


def _exp_map():
    z = math.e - 1.0
    return (lambda x: np.expm1(x) / z, lambda x: np.exp(x) / z,
            lambda x: np.exp(x) / z, lambda x: np.exp(x) / z)


def _eps_quad(eps):
    if eps <= 0:
        raise DomainError("eps_quad needs eps > 0")
    s = 1.0 + eps
    return (lambda x: (eps * x + x * x) / s, lambda x: (eps + 2 * x) / s,
            _const(2.0 / s), _const(0.0))


def _osc(n):
    w = n * math.pi
    return (lambda x: x + np.sin(w * x) / (2 * w),
            lambda x: 1 + 0.5 * np.cos(w * x),
            lambda x: -0.5 * w * np.sin(w * x),
            lambda x: -0.5 * w * w * np.cos(w * x))


def _trig2(p, q):
    # x + p sin(2 pi x)/(7 pi) + q sin(4 pi x)/(7 pi)
    a, b = 2 * math.pi, 4 * math.pi
    c = 7 * math.pi
    return (lambda x: x + (p * np.sin(a * x) + q * np.sin(b * x)) / c,
            lambda x: 1 + (p * a * np.cos(a * x) + q * b * np.cos(b * x)) / c,
            lambda x: -(p * a * a * np.sin(a * x) + q * b * b * np.sin(b * x)) / c,
            lambda x: -(p * a ** 3 * np.cos(a * x) + q * b ** 3 * np.cos(b * x)) / c)


def barycentric_map(a, b, c):
    """``a*fig1 + b*fig2 + c*fig3``; the centre (1/3, 1/3, 1/3) is the identity."""
    return SmoothFunction("bary", (a, b, c), _trig2(a - c, b - c))


_MAPS = {
    "identity": (0, lambda: SmoothFunction("identity", (), _identity())),
    "exp_map": (0, lambda: SmoothFunction("exp_map", (), _exp_map())),
    "eps_quad": (1, lambda e: SmoothFunction("eps_quad", (e,), _eps_quad(e))),
    "osc": (1, lambda n: SmoothFunction("osc", (n,), _osc(n))),
    "fig1": (0, lambda: SmoothFunction("fig1", (), _trig2(1.0, 0.0))),
    "fig2": (0, lambda: SmoothFunction("fig2", (), _trig2(0.0, 1.0))),
    "fig3": (0, lambda: SmoothFunction("fig3", (), _trig2(-1.0, -1.0))),
    "bary": (3, barycentric_map),
}

_BV = {
    "zero": lambda: SmoothFunction("zero", (), (_const(0.0),) * 4),
    "bump": lambda: SmoothFunction(
        "bump", (), (lambda x: x * (1 - x), lambda x: 1 - 2 * x, _const(-2.0), _const(0.0))),
    "sine": lambda: SmoothFunction(
        "sine", (), (lambda x: np.sin(math.pi * x) / math.pi, lambda x: np.cos(math.pi * x),
                     lambda x: -math.pi * np.sin(math.pi * x),
                     lambda x: -math.pi ** 2 * np.cos(math.pi * x))),
}

MAP_NAMES = tuple(_MAPS)
BV_NAMES = tuple(_BV)

_SPEC_RE = re.compile(r"^\s*([A-Za-z_][\w]*)\s*(?:[(:]\s*([^)]*?)\s*\)?)?\s*$")


def _split_spec(spec: str):
    m = _SPEC_RE.match(spec)
    if not m:
        raise DomainError(f"cannot parse map spec {spec!r}")
    name, args = m.group(1), m.group(2)
    params = [] if not args else [float(a) for a in re.split(r"[,\s]+", args) if a]
    return name, params


def smooth_map(name: str, *params) -> SmoothFunction:
    try:
        arity, make = _MAPS[name]
    except KeyError:
        raise DomainError(f"unknown map {name!r}; choose from {', '.join(MAP_NAMES)}") from None
    if len(params) != arity:
        raise DomainError(f"{name} takes {arity} parameter(s), got {len(params)}")
    return make(*[float(p) for p in params])


def bv_function(name: str) -> SmoothFunction:
    """Registry of test velocities u with u(0) = u(1) = 0."""
    try:
        return _BV[name]()
    except KeyError:
        raise DomainError(f"unknown function {name!r}; choose from {', '.join(BV_NAMES)}") from None


def parse_map(spec: str):
    """Resolve a CLI map spec: a registry entry like ``eps_quad(1)`` or a ``.csv`` path."""
    if spec.lower().endswith(".csv"):
        return read_pwl_csv(spec)
    name, params = _split_spec(spec)
    return smooth_map(name, *params)


def check_registry_map(fm: SmoothFunction, n=10_000):
    x = np.linspace(0.0, 1.0, n + 1)
    d1 = fm.d(1, x)
    ok_ends = abs(float(fm(0.0))) < 1e-12 and abs(float(fm(1.0)) - 1.0) < 1e-12
    return ok_ends and float(np.min(d1)) > POSITIVITY_FLOOR, float(np.min(d1))


# ---------------------------------------------------------------------------
# total variation


def tv_of_samples(g) -> float:
    """Sum of absolute increments of sampled values."""
    vals = g.values if isinstance(g, GridFunction) else np.asarray(g, dtype=float)
    if vals.size < 3:
        raise DomainError("need at least three samples")
    return math.fsum(np.abs(np.diff(vals)))


def _critical_points(dg, x):
    d = dg(x)
    out = []
    for i in np.nonzero(d[:-1] * d[1:] < 0)[0]:
        out.append(brentq(dg, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return np.asarray(out)


def tv_smooth(g: Callable, dg: Callable, *, n0=256, rtol=1e-6, max_level=16) -> float:
    """TV of a smooth ``g`` on [0, 1] given its analytic derivative ``dg``.

    Zeros of ``dg`` are bracketed on a dyadic grid and polished with Brent's
    method, so between consecutive points ``g`` is monotone and the increment
    sum is exact.  The grid is doubled until two levels agree to ``rtol``.
    """
    prev = None
    n = n0
    for _ in range(max_level):
        x = np.linspace(0.0, 1.0, n + 1)
        pts = np.sort(np.concatenate([x, _critical_points(dg, x)]))
        cur = math.fsum(np.abs(np.diff(g(pts))))
        if prev is not None and abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    return prev


def log_slope(psi: MonotonePwl) -> StepFunction:
    """``ln psi'`` as a step function on the breakpoints of ``psi``."""
    return StepFunction(psi.breakpoints, np.log(psi.slopes))


def tv_step_difference(a: StepFunction, b: StepFunction) -> float:
    return (a - b).tv()


def compose(psi1: MonotonePwl, psi2: MonotonePwl) -> MonotonePwl:
    """Exact ``psi1 o psi2``."""
    inner = psi2.inverse(psi1.breakpoints[1:-1])
    x = merge_breakpoints(psi2.breakpoints, inner)
    y = psi1(psi2(x))
    y[0], y[-1] = 0.0, 1.0
    return MonotonePwl(x, y)


def _breaks_of(f):
    if isinstance(f, MonotonePwl):
        return f.breakpoints
    if isinstance(f, StepFunction):
        return f.breaks
    return np.array([0.0, 1.0])


def _evaluate(f, x):
    return np.asarray(f(x), dtype=float)


# ---------------------------------------------------------------------------
# CSV


def _read_two_columns(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise DomainError(f"{path}: expected header {','.join(header)}")
    data = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    try:
        arr = np.array([[float(c) for c in r] for r in data], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns")
    return arr[:, 0], arr[:, 1]


def _write_two_columns(path_or_fh, header, a, b):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for p, q in zip(a, b):
            w.writerow([repr(float(p)), repr(float(q))])

    if hasattr(path_or_fh, "write"):
        emit(path_or_fh)
    else:
        with open(path_or_fh, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def read_pwl_csv(path) -> MonotonePwl:
    x, y = _read_two_columns(path, ("x", "y"))
    return MonotonePwl(x, y)


def write_pwl_csv(psi: MonotonePwl, path_or_fh):
    _write_two_columns(path_or_fh, ("x", "y"), psi.breakpoints, psi.values)


def read_grid_csv(path) -> GridFunction:
    x, u = _read_two_columns(path, ("x", "u"))
    n = x.size - 1
    if n < 2 or not np.allclose(x, np.linspace(0.0, 1.0, n + 1), atol=1e-12, rtol=0):
        raise DomainError(f"{path}: x column must be the uniform grid i/n")
    return GridFunction(u)


def write_grid_csv(g: GridFunction, path_or_fh):
    _write_two_columns(path_or_fh, ("x", "u"), g.nodes, g.values)


def uniform(values: Sequence[float]) -> bool:
    v = np.asarray(values, dtype=float)
    return np.allclose(v, np.linspace(0.0, 1.0, v.size), atol=1e-12, rtol=0)


def random_pwl(rng, pieces: int = 6, min_slope: float = 0.2) -> MonotonePwl:
    """Random strictly increasing pwl map with ``pieces`` linear pieces."""
    inner = np.sort(rng.uniform(0.05, 0.95, pieces - 1))
    x = merge_breakpoints([0.0, 1.0], inner)
    s = rng.uniform(min_slope, 1.0 / min_slope, x.size - 1)
    y = np.concatenate([[0.0], np.cumsum(s * np.diff(x))])
    y /= y[-1]
    y[-1] = 1.0
    return MonotonePwl(x, y)


def random_step(rng, pieces: int = 6, scale: float = 1.0) -> StepFunction:
    inner = np.sort(rng.uniform(0.0, 1.0, pieces - 1))
    breaks = merge_breakpoints([0.0, 1.0], inner)
    return StepFunction(breaks, rng.normal(0.0, scale, breaks.size - 1))
