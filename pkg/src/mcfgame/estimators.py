"""scikit-learn style wrappers: fit solves a scenario, predict samples the field.

    >>> est = GameValueSolver("shrinking-circle", epsilon=0.1).fit()
    >>> est.predict([[0.0, 0.0]])
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .dpp import asymptotic_run, extract_zero_set, solve
from .pde import solve_reference
from .scenarios import Scenario, load_scenario


def _scenario(src) -> Scenario:
    return src if isinstance(src, Scenario) else load_scenario(src)


class _FieldEstimator(RegressorMixin, BaseEstimator):
    """predict(X) = field value at the rows of X (n, 2); score is R^2."""

    def predict(self, X):
        check_is_fitted(self, "field_")
        X = np.atleast_2d(np.asarray(X, float))
        if X.shape[1] != 2:
            raise ValueError("points must be planar (n, 2)")
        return self.field_.at(X)

    def zero_set(self, level: float = 0.0):
        check_is_fitted(self, "field_")
        return extract_zero_set(self.field_, level)

    def _config(self):
        sc = _scenario(self.scenario)
        if self.nu is not None:
            sc = replace(sc, nu=float(self.nu))
        return sc, sc.game_config(self.epsilon, self.t)


class GameValueSolver(_FieldEstimator):
    """Game value u^eps(., t) of a scenario by backward value iteration.

    ``X`` and ``y`` of ``fit`` are ignored; the scenario defines the problem.
    """

    def __init__(self, scenario="shrinking-circle", epsilon: Optional[float] = None, nu: Optional[float] = None,
                 t: Optional[float] = None, M: int = 32, h: Optional[float] = None, n_jobs: int = 1,
                 w_mode: str = "gradient"):
        self.scenario = scenario
        self.epsilon = epsilon
        self.nu = nu
        self.t = t
        self.M = M
        self.h = h
        self.n_jobs = n_jobs
        self.w_mode = w_mode

    def fit(self, X=None, y=None):
        sc, cfg = self._config()
        params = sc.solver_params(M=self.M, h=self.h, n_jobs=self.n_jobs, w_mode=self.w_mode)
        grid = sc.grid(cfg.epsilon, params)
        self.config_ = cfg
        self.grid_ = grid
        self.field_ = solve(cfg, params, grid)
        return self

    def shape_report(self):
        """Asymptotic-shape run against the scenario target."""
        sc, cfg = self._config()
        params = sc.solver_params(M=self.M, h=self.h, n_jobs=self.n_jobs, w_mode=self.w_mode)
        grid = sc.grid(cfg.epsilon, params)
        target = sc.target_boundary(grid.h)
        return asymptotic_run(cfg, target, sc.checkpoints, params, grid)


class LevelSetPDESolver(_FieldEstimator):
    """Finite-difference reference solution of the obstacle level-set equation."""

    def __init__(self, scenario="shrinking-circle", t: Optional[float] = None, h: float = 0.01,
                 nu: Optional[float] = None, epsilon: Optional[float] = None):
        self.scenario = scenario
        self.t = t
        self.h = h
        self.nu = nu
        self.epsilon = epsilon

    def fit(self, X=None, y=None):
        sc, cfg = self._config()
        self.config_ = cfg
        self.field_ = solve_reference(cfg, cfg.horizon_t, h=self.h)
        self.grid_ = self.field_.grid
        return self
