"""Property suites for the radius recurrences and the named strategies.

Every check produces one ``Check`` line: name, bound, measured value, pass.
Suites:

- ``recurrences``: fixed point and monotonicity of the drift recurrence,
  one-step bounds, comparison with half steps, exit-time lower and upper
  bounds (toward and away forms), superadditivity of exit times.
- ``concentric``: exact distance laws of concentric play against a panel of
  20 opponents, for d = 2, 3 and with drift.
- ``containment``: moving-circle pushes and the curve-tube strategy keep the
  trajectory where they promise, against 20 opponents in 3 (nu, delta)
  settings.

Small rounding allowances (a few ulps of the quantities compared) are stated
in each check's bound column.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .game import GameConfig, play
from .recurrence import DriftRecurrence, apply_T, exit_count, exit_time, iterate_T
from .strategies import (ChasingSchedule, ConcentricCarol, ConcentricPaul, LinearSchedule, PanelCarol,
                         PanelPaul, RandomCarol, RandomPaul, SignRuleCarol, TubeCurve, adversary_panel,
                         push_by_moving_circle, tube_strategy)

ULP = 8 * np.finfo(float).eps


@dataclass
class Check:
    name: str
    bound: str
    measured: float
    passed: bool

    def line(self) -> str:
        return f"{self.name}\t{self.bound}\t{self.measured:.6g}\t{'pass' if self.passed else 'FAIL'}"


@dataclass
class SuiteReport:
    suite: str
    checks: List[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, bound, measured, passed):
        self.checks.append(Check(name, bound, float(measured), bool(passed)))

    def lines(self) -> List[str]:
        return [c.line() for c in self.checks]


# ---------------------------------------------------------------------------
# recurrences


def _fixed_point_checks(rep: SuiteReport):
    worst_fix = 0.0
    worst_lim = 0.0
    mono_ok = True
    side_ok = True
    for nu in (0.5, 1.0, 2.0):
        for eps in (0.2, 0.1, 0.05):
            h = eps * eps
            rec = DriftRecurrence(nu, h, "toward")
            S = rec.fixed_point
            R = iterate_T(rec, S, 200)
            worst_fix = max(worst_fix, float(np.max(np.abs(R - S)) / S))
            n = int(math.ceil(40.0 / (nu * nu * h)))
            for R0, above in ((S + 0.01, True), (2 * S, True), (5 * S, True),
                              (nu * h, False), (S / 2, False), (S - 0.01, False)):
                R = iterate_T(rec, R0, n)
                gap = R - S
                worst_lim = max(worst_lim, abs(gap[-1]))
                live = np.abs(gap[:-1]) > 1e-12
                d = np.diff(R)
                if above:
                    mono_ok &= bool(np.all(d[live] < 0)) and bool(np.all(d <= S * ULP))
                    side_ok &= bool(np.all(gap > -S * ULP))
                else:
                    mono_ok &= bool(np.all(d[live] > 0)) and bool(np.all(d >= -S * ULP))
                    side_ok &= bool(np.all(gap < S * ULP))
    rep.add("fixed_point_invariant", "max|R_n-S|/S<=1e-12", worst_fix, worst_fix <= 1e-12)
    rep.add("monotone_toward_fixed_point", "strict while |R_n-S|>1e-12", float(not mono_ok), mono_ok)
    rep.add("iterates_stay_on_start_side", "R_n-S keeps sign (8 ulp)", float(not side_ok), side_ok)
    rep.add("limit_is_fixed_point", "|R_n-S|<=1e-9", worst_lim, worst_lim <= 1e-9)


def _one_step_checks(rep: SuiteReport, rng):
    worst_up = -np.inf
    worst_lo = -np.inf
    for _ in range(200):
        nu = rng.uniform(0.2, 3.0)
        eps = rng.uniform(0.01, min(0.3, math.sqrt(2) / nu))
        h = eps * eps
        rec = DriftRecurrence(nu, h, "toward")
        R0 = rng.uniform(nu * h, 4.0 / nu)
        R = iterate_T(rec, R0, 50)
        a, b = R[:-1], R[1:]
        up = (b - a) - (h / a - nu * h + nu * nu * h * h / (2 * a))
        worst_up = max(worst_up, float(np.max(up / np.maximum(a, 1.0))))
        inc = b >= a
        if inc.any():
            lo = (h / b[inc] - nu * h + nu * nu * h * h / (2 * b[inc])) - (b[inc] - a[inc])
            worst_lo = max(worst_lo, float(np.max(lo / np.maximum(a[inc], 1.0))))
    rep.add("one_step_upper_bound", "excess<=8ulp", worst_up, worst_up <= ULP)
    rep.add("one_step_lower_bound_when_increasing", "excess<=8ulp", worst_lo, worst_lo <= ULP)


def _T_order_checks(rep: SuiteReport, rng, n=1000):
    nu = rng.uniform(0.2, 3.0, n)
    h = rng.uniform(1e-4, 0.04, n)
    R = nu * h + rng.uniform(0, 3, n) / nu
    R2 = R * (1 + rng.uniform(1e-6, 1.0, n))
    TR = np.sqrt((R - nu * h) ** 2 + 2 * h)
    TR2 = np.sqrt((R2 - nu * h) ** 2 + 2 * h)
    gap = float(np.min(TR2 - TR))
    rep.add("T_increasing", "min T(R')-T(R)>0", gap, gap > 0)
    half = np.empty(n)
    for k in range(n):
        rec = DriftRecurrence(nu[k], h[k], "toward")
        half[k] = iterate_T(rec.halved(), R[k], 2)[-1]
    gap2 = float(np.min(TR - half))
    rep.add("T_h_exceeds_two_half_steps", "min T_h(R)-T_{h/2}^2(R)>0", gap2, gap2 > 0)


def _log_lower_bound(rep: SuiteReport):
    worst = np.inf
    for nu in (0.5, 1.0, 2.0):
        for k in range(4, 11):
            eps = 2.0 ** -k
            rec = DriftRecurrence(nu, eps * eps, "toward")
            t = exit_time(rec, 1 / nu - eps, 1 / nu)
            bound = math.log2(1 / eps) / (3 * nu * nu * (nu + 1))
            worst = min(worst, t / bound)
    rep.add("exit_time_log_lower_bound", "min t/bound>=1 over eps=2^-4..2^-10, nu in {0.5,1,2}",
            worst, worst >= 1)


def _exit_upper_bound(rep: SuiteReport):
    worst = 0.0
    for nu in (0.5, 1.0, 2.0):
        for frac in (0.1, 0.5, 0.9):
            delta = frac / nu
            M = (1 / nu - delta) * (2 - delta * nu) / (delta * nu * nu)
            for eps in (delta / 4, delta / 8, delta / 16):
                eps = min(eps, 0.1)
                rec = DriftRecurrence(nu, eps * eps, "toward")
                for a in np.linspace(0, 1 / nu - delta, 5):
                    worst = max(worst, exit_time(rec, a, 1 / nu - delta) / M)
    rep.add("exit_time_upper_bound", "max t/M<=1", worst, worst <= 1)


def _exit_time_bounds(rep: SuiteReport):
    worst = np.inf
    for nu in (0.5, 1.0, 2.0):
        for frac in (0.1, 0.3, 0.6, 1.0):
            delta = frac / nu
            for eps in (0.1, 0.05, 0.02):
                if nu * eps * eps > delta:
                    continue
                rec = DriftRecurrence(nu, eps * eps, "toward")
                for r1 in (0.0, delta / 2, delta):
                    for r2 in np.linspace(delta, 1 / nu, 4)[1:]:
                        if r2 <= delta:
                            continue
                        lb = (r2 - delta) / (1 / delta - nu / 2)
                        worst = min(worst, exit_time(rec, r1, r2) / lb)
    rep.add("exit_time_lower_bound_toward", "min t/((r2-delta)/(1/delta-nu/2))>=1", worst, worst >= 1)
    worst = np.inf
    for nu in (0.5, 1.0, 2.0):
        for delta in (0.1, 0.5, 1.0):
            for eps in (0.1, 0.05, 0.02):
                if nu * nu * eps * eps > 2 * delta:
                    continue
                rec = DriftRecurrence(nu, eps * eps, "away")
                for r1 in (0.0, delta / 2, delta):
                    for r2 in np.linspace(delta, delta + 3.0, 4)[1:]:
                        lb = (r2 - delta) / (1 / delta + nu + 1)
                        worst = min(worst, exit_time(rec, r1, r2) / lb)
    rep.add("exit_time_lower_bound_away", "min t/((r2-delta)/(1/delta+nu+1))>=1", worst, worst >= 1)


def _superadditivity(rep: SuiteReport, rng):
    worst = np.inf
    for _ in range(200):
        nu = rng.choice([0.5, 1.0, 2.0])
        eps = rng.choice([0.1, 0.05])
        rec = DriftRecurrence(nu, eps * eps, "toward")
        a, b, c = np.sort(rng.uniform(0, 1 / nu, 3))
        lhs = exit_time(rec, a, c)
        rhs = exit_time(rec, a, b) + exit_time(rec, b, c) - eps * eps
        worst = min(worst, lhs - rhs)
    rep.add("exit_time_superadditive", "min t(a,c)-t(a,b)-t(b,c)+eps^2>=-1e-12", worst, worst >= -1e-12)


def suite_recurrences(seed: int = 0) -> SuiteReport:
    rng = np.random.default_rng(seed)
    rep = SuiteReport("recurrences")
    t0 = time.perf_counter()
    _fixed_point_checks(rep)
    _one_step_checks(rep, rng)
    _T_order_checks(rep, rng)
    _log_lower_bound(rep)
    _exit_upper_bound(rep)
    _exit_time_bounds(rep)
    _superadditivity(rep, rng)
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# concentric distance laws


def _radii(outcomes, z) -> np.ndarray:
    return np.stack([np.linalg.norm(o.trajectory - z, axis=1) for o in outcomes], axis=1)


def _paul_panel(d, z, seed):
    if d == 2:
        return adversary_panel("paul", z, seed=seed)
    return PanelPaul([RandomPaul(seed)], [20])


def concentric_closed_form(d: int, rounds: int = 10_000, eps: float = 0.01, seed: int = 0):
    """Max relative error of |x_n - z| against sqrt(R0^2 + 2(d-1)n eps^2)."""
    z = np.zeros(d)
    cfg = GameConfig(d=d, epsilon=eps, nu=0.0, horizon_t=rounds * eps * eps * (1 - 1e-9), u0=0.0)
    assert cfg.n_rounds == rounds
    x0 = np.zeros((20, d))
    x0[:, 0] = 1.0
    outs = play(cfg, ConcentricPaul(z), adversary_panel("carol", z, seed=seed), x0)
    r = _radii(outs, z)
    n = np.arange(rounds + 1)[:, None]
    exact = np.sqrt(1.0 + 2 * (d - 1) * n * eps * eps)
    return float(np.max(np.abs(r - exact) / exact))


def suite_concentric(seed: int = 0) -> SuiteReport:
    rep = SuiteReport("concentric")
    t0 = time.perf_counter()
    for d in (2, 3):
        err = concentric_closed_form(d, seed=seed)
        rep.add(f"paul_concentric_closed_form_d{d}", "rel err<=1e-10 over 1e4 rounds x 20 carols", err, err <= 1e-10)
    for d in (2, 3):
        z = np.zeros(d)
        eps = 0.02
        cfg = GameConfig(d=d, epsilon=eps, nu=0.0, horizon_t=2000 * eps * eps * (1 - 1e-9), u0=0.0)
        x0 = np.zeros((20, d))
        x0[:, 0] = 0.5
        outs = play(cfg, _paul_panel(d, z, seed), ConcentricCarol(z), x0)
        r = _radii(outs, z)
        n = np.arange(r.shape[0])[:, None]
        low = np.sqrt(0.25 + 2 * (d - 1) * n * eps * eps)
        worst = float(np.min((r - low) / low))
        rep.add(f"carol_concentric_lower_bound_d{d}", "min (d_n-R_n)/R_n>=-1e-12", worst, worst >= -1e-12)
    nu, eps = 1.0, 0.05
    cfg = GameConfig(d=2, epsilon=eps, nu=nu, horizon_t=2000 * eps * eps * (1 - 1e-9), u0=0.0)
    z = np.zeros(2)
    rec = DriftRecurrence(nu, eps * eps, "toward")
    starts = np.column_stack([np.linspace(0.1, 2.5, 20), np.zeros(20)])
    outs = play(cfg, ConcentricPaul(z), adversary_panel("carol", z, seed=seed), starts)
    r = _radii(outs, z)
    ref = np.stack([iterate_T(rec, s, r.shape[0] - 1) for s in starts[:, 0]], axis=1)
    err = float(np.max(np.abs(r - ref) / ref))
    rep.add("paul_drift_concentric_recurrence", "rel err<=1e-10", err, err <= 1e-10)
    outs = play(cfg, adversary_panel("paul", z, seed=seed), ConcentricCarol(z), starts)
    r = _radii(outs, z)
    worst = float(np.min((r - ref) / ref))
    rep.add("carol_drift_concentric_lower_bound", "min (d_n-R_n)/R_n>=-1e-12", worst, worst >= -1e-12)
    away = DriftRecurrence(nu, eps * eps, "away")
    outs = play(cfg, adversary_panel("paul", z, seed=seed), ConcentricCarol(z, reversed=True), starts)
    r = _radii(outs, z)
    P = np.stack([iterate_T(away, s, r.shape[0] - 1) for s in starts[:, 0]], axis=1)
    worst = float(np.max((r - P) / P))
    rep.add("carol_reversed_upper_bound", "max (d_n-P_n)/P_n<=1e-12", worst, worst <= 1e-12)
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# containment

SETTINGS = ((1.0, 0.2), (2.0, 0.1), (0.5, 0.3))


def small_eps(nu: float, delta: float) -> float:
    """Working threshold for 'sufficiently small eps': delta^2 nu / 10."""
    return delta * delta * nu / 10.0


def _config(nu, eps, rounds):
    return GameConfig(d=2, epsilon=eps, nu=nu, horizon_t=rounds * eps * eps * (1 - 1e-9), u0=0.0)


def _centre_history(strategy, outs, schedule):
    """Replay the schedule on the recorded positions to get z_n per round."""
    traj = np.stack([o.trajectory for o in outs], axis=1)  # (n+1, B, 2)
    z = schedule.initial(traj.shape[1], 2)
    hist = [z]
    for n in range(1, traj.shape[0]):
        z = schedule.checked_advance(z, traj[n], n - 1)
        hist.append(z)
    return traj, np.stack(hist)


def push_outside(nu, delta, side, rounds=1000, seed=0, schedule_kind="chase"):
    """Min over rounds and opponents of |x_n - z_n| - (1/nu - delta); > 0 required."""
    eps = small_eps(nu, delta)
    C = 0.5 * delta * nu * nu * eps * eps
    cfg = _config(nu, eps, rounds)
    th = np.linspace(0, 2 * np.pi, 20, endpoint=False)
    r0 = 1 / nu - delta + 1e-3 * delta
    x0 = r0 * np.column_stack([np.cos(th), np.sin(th)])

    def sched():
        if schedule_kind == "chase":
            return ChasingSchedule(np.zeros(2), C, toward=True)
        return LinearSchedule(np.zeros(2), np.array([C, 0.0]))

    s = sched()
    pusher = push_by_moving_circle(s, side)
    if side == "carol":
        outs = play(cfg, adversary_panel("paul", None, seed=seed), pusher, x0)
    else:
        outs = play(cfg, pusher, adversary_panel("carol", None, seed=seed), x0)
    traj, Z = _centre_history(pusher, outs, sched())
    d = np.linalg.norm(traj - Z, axis=2)
    return float(np.min(d - (1 / nu - delta)))


def push_inside(nu, delta, rounds=1000, seed=0, schedule_kind="flee"):
    """Max over rounds and opponents of |x_n - z_n| - (1/nu + delta); <= 0 required."""
    eps = small_eps(nu, delta)
    C = nu * nu * delta / (2 * (1 + nu * delta)) * eps * eps
    cfg = _config(nu, eps, rounds)
    th = np.linspace(0, 2 * np.pi, 20, endpoint=False)
    x0 = (1 / nu + delta) * np.column_stack([np.cos(th), np.sin(th)])

    def sched():
        if schedule_kind == "flee":
            return ChasingSchedule(np.zeros(2), C, toward=False)
        return LinearSchedule(np.zeros(2), np.array([C, 0.0]))

    pusher = push_by_moving_circle(sched(), "paul")
    outs = play(cfg, pusher, adversary_panel("carol", None, seed=seed), x0)
    traj, Z = _centre_history(pusher, outs, sched())
    d = np.linalg.norm(traj - Z, axis=2)
    return float(np.max(d - (1 / nu + delta)))


def tube_curve(nu: float, n: int = 600) -> TubeCurve:
    """A cosine graph with curvature at most 0.8 nu spanning about 3/nu."""
    lam = 2.0 / nu
    amp = 0.8 * nu * (lam / (2 * np.pi)) ** 2
    return TubeCurve.from_graph(lambda p: amp * np.cos(2 * np.pi * p / lam), -1.5 / nu, 1.5 / nu, n, nu)


def _curve_distance(curve: TubeCurve, pts: np.ndarray, chunk: int = 2000) -> np.ndarray:
    return np.concatenate([curve.distance(pts[i:i + chunk]) for i in range(0, len(pts), chunk)])


def tube_containment(nu, delta, rounds=1000, seed=0):
    """Count of rounds that start in the tube away from the end balls and leave it."""
    eps = small_eps(nu, delta)
    curve = tube_curve(nu)
    cfg = _config(nu, eps, rounds)
    s = np.linspace(-0.95, 0.95, 20) * delta
    x0 = np.column_stack([np.zeros(20), curve.points[len(curve.points) // 2, 1] + s])
    outs = play(cfg, tube_strategy(curve), adversary_panel("carol", np.zeros(2), seed=seed), x0)
    traj = np.stack([o.trajectory for o in outs], axis=1)
    T, B, _ = traj.shape
    flat = traj.reshape(-1, 2)
    dist = _curve_distance(curve, flat).reshape(T, B)
    e0, e1 = curve.endpoints
    away = (np.linalg.norm(traj - e0, axis=2) >= delta) & (np.linalg.norm(traj - e1, axis=2) >= delta)
    pre = (dist[:-1] < delta) & away[:-1]
    viol = int(np.sum(pre & (dist[1:] >= delta)))
    return viol, int(pre.sum()), float(dist.max())


def suite_containment(seed: int = 0) -> SuiteReport:
    rep = SuiteReport("containment")
    t0 = time.perf_counter()
    for nu, delta in SETTINGS:
        tag = f"nu={nu:g},delta={delta:g}"
        for side in ("paul", "carol"):
            for kind in ("chase", "linear"):
                m = push_outside(nu, delta, side, seed=seed, schedule_kind=kind)
                rep.add(f"push_outside_{side}_{kind}[{tag}]", "min |x_n-z_n|-(1/nu-delta)>0", m, m > 0)
        for kind in ("flee", "linear"):
            m = push_inside(nu, delta, seed=seed, schedule_kind=kind)
            # x_0 sits on the sphere of radius 1/nu + delta up to rounding
            allow = ULP * (1 / nu + delta)
            rep.add(f"push_inside_paul_{kind}[{tag}]", "max |x_n-z_n|-(1/nu+delta)<=8ulp", m, m <= allow)
        viol, tested, _ = tube_containment(nu, delta, seed=seed)
        rep.add(f"tube_containment[{tag}]", f"violations==0 of {tested} steps", viol, viol == 0 and tested > 0)
    rep.seconds = time.perf_counter() - t0
    return rep


SUITES: Dict[str, Callable[..., SuiteReport]] = {
    "recurrences": suite_recurrences,
    "concentric": suite_concentric,
    "containment": suite_containment,
}


def run_suites(names=None, seed: int = 0) -> List[SuiteReport]:
    names = list(SUITES) if names in (None, "all") else ([names] if isinstance(names, str) else list(names))
    out = []
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {n!r}; choose from {sorted(SUITES)}")
        out.append(SUITES[n](seed=seed))
    return out
