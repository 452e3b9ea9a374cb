"""Layer-normalised ReLU fields on the circle.

The family is generated by rotations of the kernel
``g_b(x) = relu(cos x - cos beta)``.  Its cosine coefficients have a closed
form, which lets a target field be deconvolved against the kernel; the
resulting density bounds the local cost.  Along the straight line between
two lifts the cost integrates to a functional of the derivative ratio
``rho = (psi1'/psi2') o psi2^-1``.

Convolution here is normalised, ``(g * r)(x) = (1/2pi) int g(x - y) r(y) dy``,
so Fourier coefficients multiply: ``hat(g * r)(n) = hat g(n) hat r(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fft as _fft
from .errors import DomainError, NonInvertible, NonPositiveRho, ZeroDivisor

TWO_PI = 2.0 * math.pi
DEFAULT_BETA = math.pi * (math.sqrt(5.0) - 1.0) / 2.0
ZERO_DIVISOR_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class PeriodicGrid:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = v.size
        if v.ndim != 1 or n < 16 or n & (n - 1):
            raise DomainError("periodic grids need a power-of-two size >= 16")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    @property
    def nodes(self):
        return TWO_PI * np.arange(self.n) / self.n

    @classmethod
    def sample(cls, fn, n):
        return cls(fn(TWO_PI * np.arange(n) / n))

    def coefficients(self):
        """Complex Fourier coefficients ``(1/2pi) int f e^{-ikx}`` in transform order."""
        return _fft.fft(self.values) / self.n

    def truncated(self, M):
        c = self.coefficients()
        c[np.abs(_fft.frequencies(self.n)) > M] = 0.0
        return PeriodicGrid(np.real(_fft.ifft(c) * self.n))


def _check_beta(beta):
    if not 0.0 < beta < math.pi:
        raise DomainError("beta must lie in (0, pi)")


def gb_coeff(n: int, beta: float) -> float:
    """``(1/2pi) int relu(cos x - cos beta) cos(n x) dx``."""
    _check_beta(beta)
    n = abs(int(n))
    if n == 0:
        return (math.sin(beta) - beta * math.cos(beta)) / math.pi
    if n == 1:
        return (beta - math.sin(2 * beta) / 2) / TWO_PI
    return (math.sin((n - 1) * beta) / (n * (n - 1))
            - math.sin((n + 1) * beta) / (n * (n + 1))) / TWO_PI


def gb_samples(beta, x):
    return np.maximum(np.cos(np.asarray(x, dtype=float)) - math.cos(beta), 0.0)


def _kernel_coefficients(n, beta):
    k = _fft.frequencies(n)
    return np.array([gb_coeff(int(m), beta) for m in k])


@dataclass(frozen=True)
class Deconvolution:
    rho: PeriodicGrid
    l2_bound: float
    l1_bound: float
    reconstruction_error: float
    modes: int


def deconvolve(f: PeriodicGrid, beta: float = DEFAULT_BETA, M: int | None = None) -> Deconvolution:
    """Density ``rho`` with ``g_b * rho`` equal to the ``M``-mode truncation of ``f``."""
    _check_beta(beta)
    n = f.n
    M = n // 4 if M is None else int(M)
    if not 0 <= M < n // 2:
        raise DomainError(f"mode cap must lie in [0, {n // 2 - 1}]")
    k = _fft.frequencies(n)
    keep = np.abs(k) <= M
    g = _kernel_coefficients(n, beta)
    small = keep & (np.abs(g) < ZERO_DIVISOR_TOL)
    if small.any():
        m = int(np.abs(k[small]).min())
        raise ZeroDivisor(m, gb_coeff(m, beta))
    fc = f.coefficients()
    rc = np.zeros(n, dtype=complex)
    rc[keep] = fc[keep] / g[keep]
    rho = PeriodicGrid(np.real(_fft.ifft(rc) * n))

    # round trip from the returned samples, with the kernel in closed form
    conv = np.where(keep, g * rho.coefficients(), 0.0)
    fm = np.where(keep, fc, 0.0)
    err = float(np.max(np.abs(_fft.ifft(conv - fm) * n)))
    l2 = math.sqrt(TWO_PI * float(np.sum(np.abs(rho.coefficients()) ** 2)))
    return Deconvolution(rho=rho, l2_bound=l2, l1_bound=math.sqrt(TWO_PI) * l2,
                         reconstruction_error=err, modes=M)


# ---------------------------------------------------------------------------
# circle diffeomorphisms


@dataclass(frozen=True)
class CircleDiffeo:
    """Lift ``theta + c sin(m (theta + shift))``; identity when ``c == 0``."""

    c: float = 0.0
    m: int = 1
    shift: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("m must be a positive integer")
        if abs(self.c * self.m) >= 1.0:
            raise NonInvertible(f"|c m| = {abs(self.c * self.m):g} >= 1")

    @property
    def label(self):
        if self.c == 0.0:
            return "identity"
        s = f",{self.shift:g}" if self.shift else ""
        return f"warp({self.c:g},{self.m:g}{s})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.c * np.sin(self.m * (x + self.shift))

    def d(self, order, x):
        x = np.asarray(x, dtype=float)
        ph = self.m * (x + self.shift)
        c, m = self.c, self.m
        if order == 1:
            return 1.0 + c * m * np.cos(ph)
        if order == 2:
            return -c * m * m * np.sin(ph)
        if order == 3:
            return -c * m ** 3 * np.cos(ph)
        raise ValueError("order must be 1, 2 or 3")

    def rotated(self, s):
        """``x -> psi(x + s) - s``."""
        return CircleDiffeo(self.c, self.m, self.shift + s)

    def inverse(self, y, tol=1e-12):
        """Monotone bisection on the lift."""
        y = np.asarray(y, dtype=float)
        r = abs(self.c) + 1e-15
        lo, hi = y - r, y + r
        while float(np.max(hi - lo)) > tol:
            mid = 0.5 * (lo + hi)
            below = self(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


def circle_map(spec: str) -> CircleDiffeo:
    """Parse ``identity`` or ``warp(c,m[,shift])``."""
    s = spec.strip().replace(" ", "")
    if s == "identity":
        return CircleDiffeo()
    if s.startswith("warp(") and s.endswith(")"):
        parts = [float(p) for p in s[5:-1].split(",") if p]
        if len(parts) in (2, 3):
            c, m = parts[0], parts[1]
            if m != int(m):
                raise DomainError("warp frequency must be an integer")
            return CircleDiffeo(c, int(m), parts[2] if len(parts) == 3 else 0.0)
    raise DomainError(f"unknown circle map {spec!r}; use identity or warp(c,m)")


def _trig_eval(coeffs, y, n):
    k = _fft.frequencies(n)
    keep = np.abs(k) < n // 2
    phase = np.exp(1j * np.outer(y, k[keep]))
    return np.real(phase @ coeffs[keep])


def local_bound(u: PeriodicGrid, psi: CircleDiffeo, beta: float = DEFAULT_BETA,
                c1: float = 1.0, c2: float = 1.0, M: int | None = None) -> float:
    """``c1 |(u o psi^-1)'''|_L2 + c2 |u o psi^-1|_sup`` on the grid of ``u``."""
    _check_beta(beta)
    n = u.n
    M = n // 4 if M is None else int(M)
    x = u.nodes
    if float(np.min(psi.d(1, x))) <= 0.0:
        raise NonInvertible("psi' vanishes on the grid")
    y = psi.inverse(x)
    h = PeriodicGrid(_trig_eval(u.coefficients(), y, n))
    k = _fft.frequencies(n)
    hc = h.coefficients()
    keep = np.abs(k) <= M
    third = math.sqrt(TWO_PI * float(np.sum((np.abs(k[keep]) ** 6) * np.abs(hc[keep]) ** 2)))
    return c1 * third + c2 * float(np.max(np.abs(h.values)))


# ---------------------------------------------------------------------------
# global functional


def coeff_A(r):
    r = np.asarray(r, dtype=float)
    return (67 * r**6 + 67 * r**5 + 67 * r**4 + 67 * r**3 + 172 * r**2 - 80 * r + 60) / (420 * r**7)


def coeff_B(r):
    r = np.asarray(r, dtype=float)
    return -(17 * r**6 + 34 * r**5 + 51 * r**4 + 68 * r**3 + 295 * r**2 - 150 * r + 105) / (140 * r**8)


def coeff_C(r):
    r = np.asarray(r, dtype=float)
    return 3 * (r**5 + 3 * r**4 + 6 * r**3 + 10 * r**2 + 15 * r + 21) / (56 * r**8)


def path_coefficients(r):
    """Coefficients obtained by integrating the squared third derivative over ``t``.

    With ``h = t + (1 - t) rho`` and ``dx = h dz``:
    ``int h^-7``, ``-6 int (1-t) h^-8`` and ``9 int (1-t)^2 h^-9`` over [0, 1].
    """
    r = np.asarray(r, dtype=float)
    a = (r**5 + r**4 + r**3 + r**2 + r + 1) / (6 * r**6)
    b = -(r**5 + 2 * r**4 + 3 * r**3 + 4 * r**2 + 5 * r + 6) / (7 * r**7)
    return a, b, coeff_C(r)


@dataclass(frozen=True)
class RhoProfile:
    rho: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def rho_profile(psi1: CircleDiffeo, psi2: CircleDiffeo, n: int) -> RhoProfile:
    """``rho = (psi1'/psi2') o psi2^-1`` with its first two derivatives."""
    x = TWO_PI * np.arange(n) / n
    y = psi2.inverse(x)
    p1, p2, p3 = (psi1.d(k, y) for k in (1, 2, 3))
    q1, q2, q3 = (psi2.d(k, y) for k in (1, 2, 3))
    rho = p1 / q1
    if float(np.min(rho)) <= 1e-12:
        raise NonPositiveRho(f"min rho = {float(np.min(rho)):.3e}")
    num = p2 * q1 - p1 * q2
    dnum = p3 * q1 - p1 * q3
    rho_y = num / q1**2
    rho_yy = (dnum * q1 - 2 * num * q2) / q1**3
    D1 = rho_y / q1
    D2 = (rho_yy * q1 - rho_y * q2) / q1**3
    return RhoProfile(rho, D1, D2)


@dataclass(frozen=True)
class GlobalBound:
    J: float
    sup_term: float
    J_path: float

    def bound(self, c3=1.0, c4=1.0):
        return c3 * self.J + c4 * self.sup_term


def _integrand(prof, coeffs):
    a, b, c = coeffs
    return a * prof.d2**2 + b * prof.d1**2 * prof.d2 + c * prof.d1**4


def global_bound_functional(psi1: CircleDiffeo, psi2: CircleDiffeo, n: int = 1024) -> GlobalBound:
    """``J`` with the rational coefficients above, the sup term, and the path version of ``J``."""
    if n < 16 or n & (n - 1):
        raise DomainError("grid must be a power of two >= 16")
    prof = rho_profile(psi1, psi2, n)
    w = TWO_PI / n
    r = prof.rho
    J = w * math.fsum(_integrand(prof, (coeff_A(r), coeff_B(r), coeff_C(r))))
    J_path = w * math.fsum(_integrand(prof, path_coefficients(r)))
    x = TWO_PI * np.arange(n) / n
    sup = float(np.max(np.abs(psi1(x) - psi2(x))))
    return GlobalBound(J=J, sup_term=sup, J_path=J_path)


def path_energy(psi1: CircleDiffeo, psi2: CircleDiffeo, n: int = 1024, t_nodes: int = 32) -> float:
    """``int_0^1 |(u o psi_t^-1)'''|_L2^2 dt`` by direct quadrature, ``u = psi2 - psi1``.

    Independent of the coefficient formulas: for each Gauss-Legendre ``t`` the
    third derivative is formed in the ``z = psi2(y)`` variable and integrated
    against ``dx = h dz``.
    """
    prof = rho_profile(psi1, psi2, n)
    ts, ws = np.polynomial.legendre.leggauss(t_nodes)
    ts, ws = 0.5 * (ts + 1.0), 0.5 * ws
    total = []
    for t, wt in zip(ts, ws):
        h = t + (1 - t) * prof.rho
        third = -prof.d2 / h**4 + 3 * (1 - t) * prof.d1**2 / h**5
        total.append(wt * (TWO_PI / n) * float(np.sum(third**2 * h)))
    return math.fsum(total)


def an_checksum(beta: float, M: int) -> float:
    return math.fsum(gb_coeff(k, beta) for k in range(1, M + 1))
