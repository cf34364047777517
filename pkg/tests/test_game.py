import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcfgame.game import (CarolMove, FunctionPaul, GameConfig, GameState, PaulMove, play, round_count, step)
from mcfgame.strategies import (ConcentricPaul, FixedFramePaul, QuitWhenCarol, QuitWhenPaul,
                                RandomCarol, SignRuleCarol, adversary_panel)


def zero(x):
    return np.zeros(len(np.atleast_2d(x)))


def const(c):
    return lambda x: np.full(len(np.atleast_2d(x)), float(c))


@pytest.mark.parametrize("t,eps,n", [(1.0, 0.1, 100), (0.05, 0.3, 1), (1.0, 0.3, 12)])
def test_round_count(t, eps, n):
    assert round_count(t, eps) == n


@pytest.mark.parametrize("t,eps", [(0.0, 0.1), (1.0, 0.0), (-1.0, 0.1)])
def test_round_count_rejects_nonpositive(t, eps):
    with pytest.raises(ValueError):
        round_count(t, eps)


@given(st.floats(1e-3, 10), st.floats(1e-2, 1))
def test_round_count_is_ceiling(t, eps):
    n = round_count(t, eps)
    assert n * eps ** 2 >= t * (1 - 1e-9)
    assert (n - 1) * eps ** 2 < t or n == 1


# -- step -------------------------------------------------------------------

def test_step_planar():
    cfg = GameConfig(d=2, epsilon=0.1, u0=zero)
    s = step(GameState(np.zeros(2)), PaulMove.play([[1, 0]]), CarolMove.signs([1]), cfg)
    assert s.position == pytest.approx([math.sqrt(2) * 0.1, 0.0], abs=1e-15)
    assert s.round == 1


def test_step_with_drift():
    cfg = GameConfig(d=2, epsilon=0.1, nu=1.0, u0=zero)
    s = step(GameState(np.zeros(2)), PaulMove.play([[1, 0]], w=[0, 1]), CarolMove.signs([-1]), cfg)
    assert s.position == pytest.approx([-0.1414213562373095, 0.01], abs=1e-15)


def test_step_three_dimensional():
    cfg = GameConfig(d=3, epsilon=0.1, u0=zero)
    s = step(GameState(np.zeros(3)), PaulMove.play([[1, 0, 0], [0, 1, 0]]), CarolMove.signs([1, -1]), cfg)
    assert s.position == pytest.approx(math.sqrt(2) * 0.1 * np.array([1, -1, 0]), abs=1e-15)


def test_step_negative_drift_uses_carols_w():
    cfg = GameConfig(d=2, epsilon=0.1, nu=-1.0, u0=zero)
    s = step(GameState(np.zeros(2)), PaulMove.play([[1, 0]]), CarolMove.signs([1], w=[0, 1]), cfg)
    assert s.position == pytest.approx([math.sqrt(2) * 0.1, -0.01], abs=1e-15)


def test_step_invalid_frame():
    cfg = GameConfig(d=3, epsilon=0.1, u0=zero)
    with pytest.raises(ValueError, match="invalid frame"):
        step(GameState(np.zeros(3)), PaulMove.play([[1, 0, 0], [1, 1e-6, 0]]), CarolMove.signs([1, 1]), cfg)
    with pytest.raises(ValueError, match="invalid frame"):
        step(GameState(np.zeros(3)), PaulMove.play([[1.001, 0, 0], [0, 1, 0]]), CarolMove.signs([1, 1]), cfg)


def test_step_accrues_running_cost_at_old_position():
    cfg = GameConfig(d=2, epsilon=0.1, u0=zero, f=lambda x: np.atleast_2d(x)[:, 0] + 2.0)
    s = step(GameState(np.array([1.0, 0.0]), 0, 0.5), PaulMove.play([[1, 0]]), CarolMove.signs([1]), cfg)
    assert s.accumulated_running_cost == pytest.approx(0.5 + 0.01 * 3.0)


def test_step_past_horizon():
    cfg = GameConfig(d=2, epsilon=0.5, horizon_t=0.25, u0=zero)
    with pytest.raises(ValueError):
        step(GameState(np.zeros(2), 1), PaulMove.play([[1, 0]]), CarolMove.signs([1]), cfg)


# -- play -------------------------------------------------------------------

def test_paul_quits_at_round_one():
    cfg = GameConfig(d=2, epsilon=0.1, u0=zero, psi_minus=const(0.7), psi_plus=const(5.0))
    paul = QuitWhenPaul(ConcentricPaul(np.zeros(2)), lambda x, n: np.full(len(x), n == 0))
    out = play(cfg, paul, RandomCarol(0), np.array([1.0, 0.0]))
    assert out.cost == 0.7
    assert str(out.termination) == "paul_quit(1)"
    assert len(out.trajectory) == 1


def test_paul_quits_before_carol_in_same_round():
    cfg = GameConfig(d=2, epsilon=0.1, u0=zero, psi_minus=const(-0.2), psi_plus=const(0.3))
    always = lambda x, n: np.full(len(x), n == 3)
    paul = QuitWhenPaul(ConcentricPaul(np.zeros(2)), always)
    carol = QuitWhenCarol(SignRuleCarol("plus"), always)
    out = play(cfg, paul, carol, np.array([1.0, 0.0]))
    assert out.termination.kind == "paul_quit" and out.cost == -0.2
    carol_only = play(cfg, ConcentricPaul(np.zeros(2)), carol, np.array([1.0, 0.0]))
    assert str(carol_only.termination) == "carol_quit(4)" and carol_only.cost == 0.3


def test_stopping_cost_excludes_running_cost():
    cfg = GameConfig(d=2, epsilon=0.1, u0=zero, psi_minus=const(0.7), f=const(1.0))
    paul = QuitWhenPaul(ConcentricPaul(np.zeros(2)), lambda x, n: np.full(len(x), n == 10))
    out = play(cfg, paul, SignRuleCarol("plus"), np.array([1.0, 0.0]))
    assert out.cost == 0.7
    assert out.running_cost[-1] == pytest.approx(10 * 0.01)


def test_constant_running_cost_accumulates():
    c = 0.37
    g = lambda x: np.hypot(*np.atleast_2d(x).T)
    cfg = GameConfig(d=2, epsilon=0.1, horizon_t=0.5, u0=g, f=const(c))
    x0 = np.array([0.3, -0.2])
    out = play(cfg, ConcentricPaul(np.zeros(2)), SignRuleCarol("alternate"), x0)
    N = cfg.n_rounds
    assert out.termination.kind == "horizon"
    assert out.cost == pytest.approx(g(out.trajectory[-1])[0] + N * 0.01 * c, abs=1e-12)


def test_concentric_paul_radial_cost_matches_closed_form():
    # ordinary radial profile g(r) = 1 - r^2 evaluated at the closed-form radius
    g = lambda x: 1.0 - np.sum(np.atleast_2d(x) ** 2, axis=1)
    eps, t = 0.05, 0.5
    cfg = GameConfig(d=2, epsilon=eps, horizon_t=t, u0=g)
    N = cfg.n_rounds
    expect = 1.0 - (1.0 + 2 * N * eps ** 2)
    x0 = np.tile([1.0, 0.0], (20, 1))
    outs = play(cfg, ConcentricPaul(np.zeros(2)), adversary_panel("carol", np.zeros(2), seed=4), x0)
    for o in outs:
        assert o.cost == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_concentric_paul_distance_law_any_signs(d):
    eps, rounds = 0.02, 2000
    cfg = GameConfig(d=d, epsilon=eps, horizon_t=rounds * eps ** 2, u0=zero)
    z = np.linspace(0.1, 0.3, d)
    x0 = z + np.eye(d)[0] * 0.5
    outs = play(cfg, ConcentricPaul(z), RandomCarol(11), np.tile(x0, (5, 1)))
    n = np.arange(rounds + 1)
    law = np.sqrt(0.25 + 2 * (d - 1) * n * eps ** 2)
    for o in outs:
        r = np.linalg.norm(o.trajectory - z, axis=1)
        assert np.max(np.abs(r - law) / law) <= 1e-10


def test_rotation_invariance_of_cost():
    th = 0.7
    Q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    c0 = np.array([0.2, -0.1])
    u0 = lambda x: 0.5 - np.linalg.norm(np.atleast_2d(x) - c0, axis=1)
    f = lambda x: np.atleast_2d(x)[:, 0] ** 2
    psi = lambda x: -0.3 + 0.1 * np.atleast_2d(x)[:, 1]
    # rotated data: u(Q^T x)
    rot = lambda fn: (lambda x: fn(np.atleast_2d(x) @ Q))
    V = np.array([[0.6, 0.8]])
    x0 = np.array([0.4, 0.1])
    base = GameConfig(d=2, epsilon=0.1, nu=0.5, horizon_t=0.3, u0=u0, f=f, psi_minus=psi)
    turned = GameConfig(d=2, epsilon=0.1, nu=0.5, horizon_t=0.3, u0=rot(u0), f=rot(f), psi_minus=rot(psi))
    w = np.array([0.0, 1.0])
    a = play(base, FixedFramePaul(V, w), SignRuleCarol("alternate"), x0)
    b = play(turned, FixedFramePaul(V @ Q.T, Q @ w), SignRuleCarol("alternate"), Q @ x0)
    assert a.cost == pytest.approx(b.cost, abs=1e-12)
    assert np.allclose(a.trajectory @ Q.T, b.trajectory, atol=1e-12)


def test_tangential_freedom():
    # Carol always answers +1; Paul steers the angle to a target by choosing the
    # orientation of the tangent, and the radius follows the concentric law.
    eps = 0.05
    target = math.pi / 2
    z = np.zeros(2)

    def paul(state, cfg):
        x = state.position - z
        ang = math.atan2(x[1], x[0])
        tang = np.array([-x[1], x[0]]) / np.linalg.norm(x)
        return PaulMove.play([tang if ang < target else -tang])

    rounds = 400
    cfg = GameConfig(d=2, epsilon=eps, horizon_t=rounds * eps ** 2, u0=zero)
    out = play(cfg, FunctionPaul(paul), SignRuleCarol("plus"), np.array([1.0, 0.0]))
    r = np.linalg.norm(out.trajectory, axis=1)
    law = np.sqrt(1 + 2 * np.arange(rounds + 1) * eps ** 2)
    assert np.all(np.abs(r / law - 1) <= eps)
    ang = np.arctan2(out.trajectory[:, 1], out.trajectory[:, 0])
    reached = np.nonzero(ang >= target)[0]
    assert len(reached) > 0
    # after reaching the target the angle stays within one step of it
    step_angle = math.sqrt(2) * eps / r[reached[0]]
    assert np.all(np.abs(ang[reached[0]:] - target) <= 2 * step_angle)


def test_psi_order_violation_is_an_error():
    cfg = GameConfig(d=2, epsilon=0.1, u0=zero, psi_minus=const(1.0), psi_plus=const(0.0))
    with pytest.raises(ValueError, match="psi_minus exceeds psi_plus"):
        play(cfg, ConcentricPaul(np.zeros(2)), SignRuleCarol("plus"), np.array([1.0, 0.0]))


def test_config_validation():
    with pytest.raises(ValueError):
        GameConfig(d=1, u0=zero)
    with pytest.raises(ValueError):
        GameConfig(epsilon=0.0, u0=zero)
    with pytest.raises(ValueError):
        GameConfig()
