"""Rotation-group transport times: principal log, angle metric, l1 bounds.

With unit-speed rotations about arbitrary axes the minimal time between two
rotations is the angle of ``R2 R1^T``.  With the three coordinate axes as
the only generators (l1 cost) the minimal time is bracketed below by the
same angle and above by the l1 norm of the principal log vector, or by the
cheapest three-factor axial decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import DomainError

ORTHO_TOL = 1e-10
DEGENERATE_TOL = 0.0
_AXES = "XYZ"

PROPER_SEQUENCES = ("ZXZ", "ZYZ", "XYX", "XZX", "YXY", "YZY")
TAIT_BRYAN_SEQUENCES = ("XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX")
EULER_SEQUENCES = PROPER_SEQUENCES + TAIT_BRYAN_SEQUENCES


def check_rotation(R):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise DomainError("a rotation is a 3x3 matrix")
    if np.linalg.norm(R.T @ R - np.eye(3)) > ORTHO_TOL or abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
        raise DomainError("matrix is not a proper rotation")
    return R


def hat(w):
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(W):
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def exp_so3(omega):
    """Rodrigues' formula."""
    omega = np.asarray(omega, dtype=float)
    th = float(np.linalg.norm(omega))
    K = hat(omega)
    if th < 1e-8:
        return np.eye(3) + K + 0.5 * K @ K
    return np.eye(3) + (math.sin(th) / th) * K + ((1 - math.cos(th)) / th ** 2) * K @ K


def axis_rotation(axis, angle):
    axis = np.asarray(axis, dtype=float)
    return exp_so3(axis / np.linalg.norm(axis) * angle)


def _elementary(i, angle):
    c, s = math.cos(angle), math.sin(angle)
    j, k = (i + 1) % 3, (i + 2) % 3
    R = np.eye(3)
    R[j, j] = R[k, k] = c
    R[k, j] = s
    R[j, k] = -s
    return R


def quaternion(R):
    """Unit quaternion (w, x, y, z) with w >= 0, by Shepperd's method."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    d = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    i = int(np.argmax(d))
    if i == 0:
        w = 0.5 * math.sqrt(max(1.0 + tr, 0.0))
        q = np.array([w, (R[2, 1] - R[1, 2]) / (4 * w), (R[0, 2] - R[2, 0]) / (4 * w),
                      (R[1, 0] - R[0, 1]) / (4 * w)])
    else:
        a = i - 1
        b, c = (a + 1) % 3, (a + 2) % 3
        va = 0.5 * math.sqrt(max(1.0 + 2 * R[a, a] - tr, 0.0))
        q = np.empty(4)
        q[1 + a] = va
        q[0] = (R[c, b] - R[b, c]) / (4 * va)
        q[1 + b] = (R[b, a] + R[a, b]) / (4 * va)
        q[1 + c] = (R[c, a] + R[a, c]) / (4 * va)
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


@dataclass(frozen=True, eq=False)
class AxisAngle:
    axis: np.ndarray
    theta: float

    @property
    def vector(self):
        return self.theta * self.axis


def principal_log(R) -> AxisAngle:
    """Axis and angle in [0, pi] with ``exp(theta * hat(axis)) = R``.

    Extracted through the unit quaternion, which stays well conditioned at
    both ends of the angle range.
    """
    q = quaternion(check_rotation(R))
    s = float(np.linalg.norm(q[1:]))
    theta = 2.0 * math.atan2(s, q[0])
    if s == 0.0:
        return AxisAngle(np.zeros(3), 0.0)
    return AxisAngle(q[1:] / s, theta)


def log_vector(R):
    return principal_log(R).vector


def angle(R) -> float:
    return principal_log(R).theta


def d_l2(R1, R2) -> float:
    return angle(np.asarray(R2) @ np.asarray(R1).T)


# ---------------------------------------------------------------------------
# axial decompositions


def _relabel(seq):
    """Proper signed permutation sending the sequence axes to a canonical frame.

    Returns ``(P, signs, canonical)``: ``P R P^T`` factors along the canonical
    sequence ``ZYZ`` or ``XYZ`` with angles ``signs * original``.
    """
    first, second, third = (_AXES.index(c) for c in seq)
    if first == third:
        canonical = "ZYZ"
        rest = ({0, 1, 2} - {first, second}).pop()
        targets = {first: 2, second: 1, rest: 0}
    else:
        canonical = "XYZ"
        targets = {first: 0, second: 1, third: 2}
    P = np.zeros((3, 3))
    for src, dst in targets.items():
        P[dst, src] = 1.0
    sign = {a: 1.0 for a in range(3)}
    if np.linalg.det(P) < 0:
        # flip the axis that is not used or, for three-axis sequences, the last
        flip = rest if first == third else third
        P[targets[flip], flip] = -1.0
        sign[flip] = -1.0
    signs = np.array([sign[_AXES.index(c)] for c in seq])
    return P, signs, canonical


def _wrap(a):
    return (a + math.pi) % (2 * math.pi) - math.pi if not -math.pi < a <= math.pi else a


def _residual_angle(R, first, second, a, b, last):
    # the rotation left after peeling off the first two factors, read as a
    # rotation about the last axis; this absorbs any error in ``a`` near lock
    M = (_elementary(first, a) @ _elementary(second, b)).T @ R
    j, k = (last + 1) % 3, (last + 2) % 3
    return math.atan2(M[k, j] - M[j, k], M[j, j] + M[k, k])


def _canonical_branches(R, canonical):
    if canonical == "ZYZ":
        s = math.hypot(R[0, 2], R[1, 2])
        b = math.atan2(s, R[2, 2])
        a = math.atan2(R[1, 2], R[0, 2]) if s > DEGENERATE_TOL else 0.0
        pairs = [(a, b), (_wrap(a + math.pi), -b)] if s > DEGENERATE_TOL else [(a, b)]
        axes = (2, 1, 2)
    else:
        c = math.hypot(R[0, 0], R[0, 1])
        b = math.atan2(R[0, 2], c)
        a = math.atan2(-R[1, 2], R[2, 2]) if c > DEGENERATE_TOL else 0.0
        pairs = [(a, b), (_wrap(a + math.pi), _wrap(math.pi - b))] if c > DEGENERATE_TOL else [(a, b)]
        axes = (0, 1, 2)
    return [(a, b, _residual_angle(R, axes[0], axes[1], a, b, axes[2])) for a, b in pairs]


def compose_axial(seq, angles):
    R = np.eye(3)
    for c, a in zip(seq, angles):
        R = R @ _elementary(_AXES.index(c), a)
    return R


def euler_decompositions(R, sequences=EULER_SEQUENCES):
    """All ``(sequence, angles, cost)`` candidates over sequences and branches."""
    R = np.asarray(R, dtype=float)
    out = []
    for seq in sequences:
        P, signs, canonical = _relabel(seq)
        Rc = P @ R @ P.T
        for branch in _canonical_branches(Rc, canonical):
            angles = tuple(float(s * a) for s, a in zip(signs, branch))
            out.append((seq, angles, math.fsum(abs(a) for a in angles)))
    return out


def best_euler(R, sequences=EULER_SEQUENCES):
    return min(euler_decompositions(R, sequences), key=lambda c: (c[2], c[0]))


@dataclass(frozen=True)
class L1Bounds:
    lower: float
    log_upper: float
    euler_upper: float
    euler_sequence: str
    euler_angles: tuple

    @property
    def upper(self):
        return min(self.log_upper, self.euler_upper)


def d_l1_bounds(R1, R2, sequences=EULER_SEQUENCES) -> L1Bounds:
    R = check_rotation(np.asarray(R2) @ check_rotation(R1).T)
    log = principal_log(R)
    seq, angles, cost = best_euler(R, sequences)
    return L1Bounds(lower=log.theta, log_upper=float(np.abs(log.vector).sum()),
                    euler_upper=cost, euler_sequence=seq, euler_angles=angles)


def random_rotations(rng, count):
    q = rng.normal(size=(count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return [quaternion_to_matrix(v) for v in q]


def quaternion_to_matrix(q):
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])

