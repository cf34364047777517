import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mcfgame.dpp import Grid
from mcfgame.estimators import GameValueSolver, LevelSetPDESolver


def test_params_round_trip_and_clone():
    est = GameValueSolver("stick-disc", epsilon=0.2, M=16)
    p = est.get_params()
    assert p["scenario"] == "stick-disc" and p["epsilon"] == 0.2 and p["M"] == 16
    c = clone(est).set_params(M=32)
    assert c.M == 32 and est.M == 16


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        GameValueSolver().predict([[0.0, 0.0]])


def test_game_value_solver_fit_predict():
    est = GameValueSolver("shrinking-circle", epsilon=0.2, t=0.04).fit()
    assert isinstance(est.grid_, Grid)
    u = est.predict([[0.0, 0.0], [5.0, 5.0]])
    # centre of B_1 after a short time: still inside; far away: the floor a
    assert u[0] > 0.5 and u[1] == -0.25
    with pytest.raises(ValueError):
        est.predict([[0.0, 0.0, 0.0]])
    assert len(est.zero_set().contours) == 1


def test_pde_solver_fit_predict_and_score():
    est = LevelSetPDESolver("shrinking-circle", t=0.05, h=0.04).fit()
    X = np.array([[0.0, 0.0], [0.3, 0.2], [0.5, -0.4]])
    y = est.predict(X)
    assert est.score(X, y) == 1.0
    assert y[0] > y[2]


def test_nu_override():
    a = GameValueSolver("shrinking-circle", epsilon=0.2, t=0.04, nu=1.0).fit()
    b = GameValueSolver("shrinking-circle", epsilon=0.2, t=0.04).fit()
    assert a.config_.nu == 1.0
    X = np.array([[0.9, 0.0]])
    assert a.predict(X)[0] >= b.predict(X)[0]
