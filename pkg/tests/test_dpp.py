import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcfgame.dpp import (Grid, SolverParams, ValueField, dpp_update, extract_zero_set, marching_squares,
                         refine_study, solve)
from mcfgame.game import GameConfig
from mcfgame.geometry import Disc, hausdorff


def lin(p):
    p = np.asarray(p, float)
    return lambda x: np.atleast_2d(x) @ p


def radial(r0):
    return lambda x: r0 - np.linalg.norm(np.atleast_2d(x), axis=1)


GRID = Grid.centered(1.2, 0.02)


# -- single update ----------------------------------------------------------

def test_zero_levels_returns_u0():
    cfg = GameConfig(epsilon=0.1, horizon_t=0.5, u0=Disc((0.1, 0), 0.5, a=-0.3))
    fld = solve(cfg, SolverParams(), GRID, n_levels=0)
    assert np.array_equal(fld.values, np.maximum(-0.3, GRID.sample(cfg.source("u0").sdf)))
    assert fld.k == 0


def test_psi_minus_clamps_update():
    cfg = GameConfig(epsilon=0.1, horizon_t=0.01, u0=radial(0.5), psi_minus=lambda x: np.full(len(x), 2.0))
    fld = ValueField(GRID, GRID.sample(radial(0.5)), 0, cfg, -1.0)
    assert dpp_update(fld, (0.0, 0.0), SolverParams.pure(), cfg) == 2.0


def _linear_oracle(p, x, eps, M):
    # exact: bilinear interpolation reproduces a linear function
    th = np.pi * np.arange(M // 2) / (M // 2)
    best = -np.inf
    for t in th:
        v = np.array([math.cos(t), math.sin(t)])
        vals = [p @ (x + b * math.sqrt(2) * eps * v) for b in (1.0, -1.0)]
        best = max(best, min(vals))
    return best


@given(st.floats(0, 2 * math.pi), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
@settings(max_examples=30, deadline=None)
def test_linear_u0_update_against_bruteforce(angle, x, y):
    p = np.array([math.cos(angle), math.sin(angle)])
    cfg = GameConfig(epsilon=0.1, horizon_t=0.01, u0=lin(p))
    fld = ValueField(GRID, GRID.sample(lin(p)), 0, cfg, -10.0)
    got = dpp_update(fld, (x, y), SolverParams.pure(M=32), cfg)
    assert got == pytest.approx(_linear_oracle(p, np.array([x, y]), 0.1, 32), abs=1e-12)


def test_linear_u0_is_preserved():
    p = np.array([0.6, -0.8])
    eps = 0.1
    cfg = GameConfig(epsilon=eps, horizon_t=0.05, u0=lin(p))
    fld = solve(cfg, SolverParams(), GRID)
    # nodes whose 5-step reach stays inside the box
    inner = np.all(np.abs(GRID.nodes()) <= 1.2 - 5 * math.sqrt(2) * eps - 0.05, axis=1)
    err = np.abs(fld.values.ravel() - GRID.sample(lin(p)).ravel())[inner]
    assert err.max() <= 1e-12


def test_pure_solve_matches_node_updates():
    cfg = GameConfig(epsilon=0.1, horizon_t=0.01, u0=radial(0.4))
    p = SolverParams.pure(M=16, mode="literal")
    u0 = ValueField(GRID, GRID.sample(radial(0.4)), 0, cfg, -1.0)
    one = solve(cfg, p, GRID, n_levels=1)
    for node in [(0.0, 0.0), (0.3, 0.1), (-0.22, 0.4), (0.5, -0.5)]:
        i, j = (int(round((node[0] - GRID.x0) / GRID.h)), int(round((node[1] - GRID.y0) / GRID.h)))
        xy = (GRID.xs[i], GRID.ys[j])
        assert one.values[i, j] == pytest.approx(dpp_update(u0, xy, p, cfg), abs=1e-14)


def test_lifted_resample_keeps_far_field_kink_sharp():
    # bilinear reproduces a linear raw field, so the clamp lands exactly
    coarse = Grid.centered(1.0, 0.1)
    fine = Grid.centered(0.9, 0.0125)
    raw = coarse.sample(lin([1.0, 0.5]))
    fld = ValueField(coarse, np.maximum(-0.25, raw), 0, None, -0.25, raw)
    got = fld.resample(fine).values
    assert np.max(np.abs(got - np.maximum(-0.25, fine.sample(lin([1.0, 0.5]))))) <= 1e-12
    # the clamped values alone would cut the corner of the kink
    flat = ValueField(coarse, np.maximum(-0.25, raw), 0, None, -0.25).resample(fine).values
    assert np.max(flat - got) > 0.01


# -- sweeps -----------------------------------------------------------------

def _small(u0, **kw):
    return GameConfig(epsilon=0.1, horizon_t=0.1, u0=u0, **kw)


def test_obstacle_sandwich():
    # the psi_plus plateau (radius 0.5) is still present after 5 levels
    cfg = GameConfig(epsilon=0.1, horizon_t=0.05, u0=Disc((0, 0), 0.6, a=-0.3),
                     psi_minus=Disc((0.3, 0), 0.05, a=-0.3), psi_plus=lambda x: 0.1 + np.zeros(len(x)))
    fld = solve(cfg, SolverParams(mode="literal"), GRID)
    lo = GRID.sample(cfg.psi_minus)
    assert np.all(fld.values >= lo) and np.all(fld.values <= 0.1)
    assert np.any(fld.values == lo) and np.any(fld.values == 0.1)


def test_radial_field_stays_radial():
    cfg = _small(Disc((0, 0), 0.6, a=-0.3))
    fld = solve(cfg, SolverParams(), GRID)
    rng = np.random.default_rng(0)
    P = rng.uniform(-0.8, 0.8, (300, 2))
    worst = 0.0
    for th in rng.uniform(0, 2 * np.pi, 5):
        Q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        worst = max(worst, np.max(np.abs(fld.at(P) - fld.at(P @ Q.T))))
    assert worst <= GRID.h + 1 / 32 ** 2


def test_monotone_in_u0_and_obstacles():
    p = SolverParams()
    lo = solve(_small(Disc((0, 0), 0.5, a=-0.3)), p, GRID).values
    hi = solve(_small(Disc((0, 0), 0.6, a=-0.3)), p, GRID).values
    assert np.all(lo <= hi)
    obs_lo = solve(_small(Disc((0, 0), 0.5, a=-0.3), psi_minus=Disc((0, 0), 0.1, a=-0.3)), p, GRID).values
    obs_hi = solve(_small(Disc((0, 0), 0.5, a=-0.3), psi_minus=Disc((0, 0), 0.3, a=-0.3)), p, GRID).values
    assert np.all(obs_lo <= obs_hi)
    assert np.all(lo <= obs_lo)


def test_direction_refinement_is_monotone_and_cauchy():
    cfg = _small(lambda x: 0.5 - np.abs(np.atleast_2d(x)[:, 0]) - 0.5 * np.abs(np.atleast_2d(x)[:, 1]))
    fields = [solve(cfg, SolverParams.pure(M=M), GRID).values for M in (16, 32, 64, 128)]
    for a, b in zip(fields, fields[1:]):
        assert np.all(b >= a)
    gaps = [np.max(b - a) for a, b in zip(fields, fields[1:])]
    assert gaps[-1] <= gaps[0]


def test_drift_modes_agree_roughly():
    cfg = GameConfig(epsilon=0.1, nu=1.0, horizon_t=0.1, u0=Disc((0, 0), 0.5, a=-0.3))
    g = solve(cfg, SolverParams(w_mode="gradient"), GRID).values
    pr = solve(cfg, SolverParams(w_mode="product", M=16), GRID).values
    # the product search is a superset of the gradient drift up to refinement
    assert np.max(np.abs(g - pr)) <= 0.01


def test_worker_count_is_bitwise_irrelevant():
    cfg = _small(Disc((0.1, 0), 0.6, a=-0.3), psi_minus=Disc((0.2, 0), 0.2, a=-0.3))
    a = solve(cfg, SolverParams(n_jobs=1), GRID).values
    b = solve(cfg, SolverParams(n_jobs=3), GRID).values
    assert np.array_equal(a, b)


def test_memory_guard():
    cfg = _small(Disc((0, 0), 0.6, a=-0.3))
    with pytest.raises(MemoryError, match="coarsen"):
        solve(cfg, SolverParams(max_nodes=1000), GRID)


def test_params_validation():
    with pytest.raises(ValueError):
        SolverParams(M=7)
    with pytest.raises(ValueError):
        SolverParams(M=6)
    with pytest.raises(ValueError):
        SolverParams(w_mode="none")


# -- zero sets --------------------------------------------------------------

def test_zero_set_of_cone_is_unit_circle():
    g = Grid.centered(1.5, 0.01)
    fld = ValueField(g, g.sample(radial(1.0)), 0)
    zs = extract_zero_set(fld)
    assert len(zs.contours) == 1 and zs.contours[0].closed
    th = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    circle = np.column_stack([np.cos(th), np.sin(th)])
    assert hausdorff(zs.points(), circle) <= 2 * g.h


def test_zero_set_empty():
    g = Grid.centered(1.0, 0.1)
    zs = extract_zero_set(ValueField(g, -np.ones(g.shape), 0))
    assert zs.empty and zs.contours == []


def test_zero_set_reports_fattening():
    g = Grid.centered(1.0, 0.05)
    vals = np.where(np.abs(g.nodes()[:, 0]) < 0.3, 0.0, -1.0).reshape(g.shape)
    zs = extract_zero_set(ValueField(g, vals, 0))
    assert zs.fattened_nodes > 0 and not zs.positive.any()


@pytest.mark.parametrize("mean_inside", [True, False])
def test_saddle_rule(mean_inside):
    g = Grid(0.0, 0.0, 1.0, 2, 2)
    s = 0.5 if mean_inside else -0.5
    # corners (0,0) and (1,1) inside, (1,0) and (0,1) outside
    vals = np.array([[1.0 + s, -1.0 + s], [-1.0 + s, 1.0 + s]])
    lines = marching_squares(vals, g)
    assert len(lines) == 2
    corners = {(0, 0): vals[0, 0] > 0, (1, 0): vals[1, 0] > 0, (0, 1): vals[0, 1] > 0, (1, 1): vals[1, 1] > 0}
    for pl in lines:
        mid = pl.points.mean(axis=0)
        near = min(corners, key=lambda c: math.dist(c, mid))
        # joined inside corners leave the outside corners cut off, and vice versa
        assert bool(corners[near]) == (not mean_inside)


# -- refinement study -------------------------------------------------------

def test_far_probe_is_far_field_value():
    def make(e):
        return GameConfig(epsilon=e, horizon_t=0.02, u0=Disc((0, 0), 0.3, a=-0.25))
    tab = refine_study(make, [0.1, 0.07, 0.05], [[5.0, 5.0], [0.0, 0.0]], SolverParams(),
                       make_grid=lambda c: Grid.centered(0.8, c.epsilon ** 2 * 4))
    assert np.all(tab.values[:, 0] == -0.25)


def test_refine_study_rejects_bad_ladder():
    with pytest.raises(ValueError):
        refine_study(lambda e: None, [0.1, 0.1, 0.05], [[0, 0]])
    with pytest.raises(ValueError):
        refine_study(lambda e: None, [0.1, 0.05], [[0, 0]])


def test_solver_is_planar():
    with pytest.raises(ValueError):
        solve(GameConfig(d=3, u0=lambda x: np.zeros(len(x))), SolverParams(), GRID)
