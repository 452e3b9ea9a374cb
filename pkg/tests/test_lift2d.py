import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from flowdepth import lift2d
from flowdepth.errors import ConfigViolation, DomainError


def config(name="square", kappa=0.3, lam=0.5, K=(-1.0, 1.0)):
    return lift2d.LiftConfig(lift2d.scalar_target(name), K, lam, kappa)


def disc_points(rng, count, radius=2.0):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    a = rng.uniform(0.0, 2 * math.pi, count)
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=1)


def test_cutoff_profile():
    r = np.array([0.0, 0.5, 1.0, 1.25, 1.5, 1.8])
    e = lift2d.eta(r)
    np.testing.assert_array_equal(e[[0, 1, 2]], 1.0)
    np.testing.assert_array_equal(e[[4, 5]], 0.0)
    assert e[3] == pytest.approx(0.5)
    rr = np.linspace(1.0, 1.5, 1001)
    assert np.all(np.diff(lift2d.eta(rr)) <= 0)


def test_field_vanishes_outside_support():
    rng = np.random.default_rng(0)
    r = rng.uniform(1.5 + 1e-12, 2.0, 1000)
    a = rng.uniform(0, 2 * math.pi, 1000)
    p = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
    assert np.all(config().field(p) == 0.0)


def test_zero_time_and_far_points_are_fixed():
    cfg = config()
    rng = np.random.default_rng(1)
    p = disc_points(rng, 50)
    np.testing.assert_array_equal(lift2d.lift_flow(cfg, 0.0, p), p)
    far = np.array([[1.8, 0.0], [0.0, -1.6], [1.2, 1.2]])
    for t in (0.3, 1.0, -1.0):
        np.testing.assert_array_equal(lift2d.lift_flow(cfg, t, far), far)


def test_straight_line_flow_inside_unit_disc():
    out = lift2d.lift_flow(config(), 1.0, np.array([[0.4, 0.0]]))
    np.testing.assert_allclose(out[0], [0.4, 0.192], atol=1e-8)


@pytest.mark.parametrize("name,kappa", [("square", 0.3), ("sin3", 0.2)])
def test_factorization_reproduces_target(name, kappa):
    assert lift2d.verify_factorization(config(name, kappa), 1000) < 1e-7


def test_zero_target_gives_zero_error():
    assert lift2d.verify_factorization(config("zero"), 1000) == 0.0


@pytest.mark.parametrize("name", lift2d.TARGET_NAMES)
def test_auto_scaling_leaves_margin(name):
    cfg = lift2d.LiftConfig.auto(lift2d.scalar_target(name), (-2.0, 3.0))
    assert cfg.segment_margin() >= lift2d.SEGMENT_MARGIN - 1e-12
    assert cfg.lam * 3.0 < 1.0
    assert lift2d.verify_factorization(cfg) < 1e-7


def test_segment_violation_is_an_error():
    with pytest.raises(ConfigViolation):
        lift2d.verify_factorization(config("square", kappa=2.0))
    with pytest.raises(DomainError):
        config(lam=-1.0)
    with pytest.raises(DomainError):
        config(K=(1.0, 0.0))


def test_injective_on_grid_and_stays_in_ball():
    cfg = config()
    g = np.linspace(-1.4, 1.4, 50)
    p = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    p = p[np.hypot(p[:, 0], p[:, 1]) <= 2.0]
    q = lift2d.lift_flow(cfg, 1.0, p)
    assert np.max(np.hypot(q[:, 0], q[:, 1])) <= 2.0 + 1e-9
    d = np.hypot(q[:, None, 0] - q[None, :, 0], q[:, None, 1] - q[None, :, 1])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-9


def test_reversibility():
    cfg = config("sin3", 0.2)
    rng = np.random.default_rng(2)
    p = disc_points(rng, 300)
    back = lift2d.lift_flow(cfg, -1.0, lift2d.lift_flow(cfg, 1.0, p))
    assert np.max(np.abs(back - p)) <= 1e-7


def test_matches_scipy_integrator():
    cfg = config("sin3", 0.2)
    rng = np.random.default_rng(3)
    p = disc_points(rng, 20, radius=1.5)
    ours = lift2d.lift_flow(cfg, 0.7, p)
    for start, end in zip(p, ours):
        sol = solve_ivp(lambda _, y: cfg.field(y[None, :])[0], (0.0, 0.7), start,
                        method="DOP853", rtol=1e-12, atol=1e-13)
        np.testing.assert_allclose(end, sol.y[:, -1], atol=1e-8)
