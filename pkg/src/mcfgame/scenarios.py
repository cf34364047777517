"""Scenario files, preset scenes and the candidate limit sets.

A scenario is a JSON document: initial set D0, obstacle components O_minus
(their union is the inner obstacle), outer obstacle O_plus, drift nu, time
horizon with checkpoints, solver settings and a target describing the
expected limit shape.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
from scipy.spatial import cKDTree

from .dpp import Grid, SolverParams, default_grid
from .game import GameConfig
from .geometry import (Polyline, Region, Union, convex_hull, interior_samples,
                       region_from_dict)
from .strategies import TubeCurve

_REGION = {"type": "object", "required": ["kind"], "properties": {"kind": {"type": "string"}}}

SCHEMA = {
    "type": "object",
    "required": ["name", "epsilon", "nu", "t_max", "D0"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "d": {"type": "integer", "const": 2},
        "epsilon": {"oneOf": [
            {"type": "number", "exclusiveMinimum": 0},
            {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1}]},
        "nu": {"type": "number"},
        "t_max": {"type": "number", "exclusiveMinimum": 0},
        "checkpoints": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "a": {"type": "number", "exclusiveMaximum": 0},
        "D0": _REGION,
        "O_minus": {"type": "array", "items": _REGION},
        "O_plus": {"oneOf": [_REGION, {"type": "null"}]},
        "f": {"oneOf": [{"type": "null"}, {"type": "number"}]},
        "target": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["hull", "obstacle", "ball-intersection", "ball-union", "none",
                                  "extinction", "region"]},
                "region": _REGION,
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "M": {"type": "integer", "minimum": 8, "multipleOf": 2},
                "refine_iters": {"type": "integer", "minimum": 0},
                "grad_seed": {"type": "boolean"},
                "w_mode": {"enum": ["gradient", "uniform", "product"]},
                "h": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "mode": {"enum": ["auto", "lifted", "literal"]},
                "extent": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
        "curve": {
            "type": "object",
            "required": ["amplitude", "p0", "p1"],
            "properties": {"amplitude": {"type": "number"}, "wavelength": {"type": "number"},
                           "p0": {"type": "number"}, "p1": {"type": "number"}},
        },
        "params": {"type": "object"},
        "outputs": {"type": "object"},
        "seed": {"type": "integer"},
    },
}


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    epsilon: object
    nu: float
    t_max: float
    D0: Region
    O_minus: list = field(default_factory=list)
    O_plus: Optional[Region] = None
    f: Optional[float] = None
    target: dict = field(default_factory=lambda: {"kind": "none"})
    checkpoints: list = field(default_factory=list)
    solver: dict = field(default_factory=dict)
    a: float = -1.0
    curve: Optional[dict] = None
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    d: int = 2

    # -- construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        try:
            jsonschema.validate(doc, SCHEMA)
        except jsonschema.ValidationError as e:
            path = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise ScenarioError(f"schema violation at {path}: {e.message}") from None
        a = float(doc.get("a", -1.0))

        def reg(r):
            r = dict(r)
            r.setdefault("a", a)
            return region_from_dict(r)

        sc = cls(
            name=doc["name"],
            epsilon=copy.deepcopy(doc["epsilon"]),
            nu=float(doc["nu"]),
            t_max=float(doc["t_max"]),
            D0=reg(doc["D0"]),
            O_minus=[reg(r) for r in doc.get("O_minus", [])],
            O_plus=None if doc.get("O_plus") is None else reg(doc["O_plus"]),
            f=doc.get("f"),
            target=copy.deepcopy(doc.get("target", {"kind": "none"})),
            checkpoints=[float(t) for t in doc.get("checkpoints", [])],
            solver=copy.deepcopy(doc.get("solver", {})),
            a=a,
            curve=copy.deepcopy(doc.get("curve")),
            params=copy.deepcopy(doc.get("params", {})),
            outputs=copy.deepcopy(doc.get("outputs", {})),
            seed=int(doc.get("seed", 0)),
        )
        sc.validate()
        return sc

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "d": self.d,
            "epsilon": copy.deepcopy(self.epsilon),
            "nu": self.nu,
            "t_max": self.t_max,
            "checkpoints": list(self.checkpoints),
            "a": self.a,
            "D0": self.D0.to_dict(),
            "O_minus": [r.to_dict() for r in self.O_minus],
            "O_plus": None if self.O_plus is None else self.O_plus.to_dict(),
            "f": self.f,
            "target": copy.deepcopy(self.target),
            "solver": copy.deepcopy(self.solver),
            "params": copy.deepcopy(self.params),
            "outputs": copy.deepcopy(self.outputs),
            "seed": self.seed,
        }
        if self.curve is not None:
            doc["curve"] = copy.deepcopy(self.curve)
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # -- checks -------------------------------------------------------------

    def validate(self, n: int = 256):
        """O_minus inside D0 inside O_plus at sampled points; eps ladder order."""
        tol = 1e-9
        if isinstance(self.epsilon, list):
            e = self.epsilon
            if any(b >= c for c, b in zip(e, e[1:])):
                raise ScenarioError("epsilon list must be strictly decreasing")
        for k, c in enumerate(self.O_minus):
            pts = np.vstack([c.boundary_samples(n), interior_samples(c, n // 4)])
            bad = self.D0.sdf(pts) < -tol
            if bad.any():
                raise ScenarioError(f"O_minus component {k} not inside D0, e.g. at {pts[bad][0].round(6).tolist()}")
        if self.O_plus is not None:
            pts = np.vstack([self.D0.boundary_samples(n), interior_samples(self.D0, n // 4)])
            bad = self.O_plus.sdf(pts) < -tol
            if bad.any():
                raise ScenarioError(f"D0 not inside O_plus, e.g. at {pts[bad][0].round(6).tolist()}")
        for r in [self.D0, *self.O_minus] + ([self.O_plus] if self.O_plus is not None else []):
            if r.a != self.a:
                raise ScenarioError("all regions must share the far-field value a")
        if self.curve is not None:
            pts = self.tube_curve().points
            if np.any(self.D0.sdf(pts) <= 0):
                raise ScenarioError("connecting curve leaves D0")
            ob = self.obstacle
            if ob is None or not (ob.sdf(pts[:1]) > 0 and ob.sdf(pts[-1:]) > 0):
                raise ScenarioError("connecting curve must start and end inside O_minus")

    # -- derived objects ----------------------------------------------------

    @property
    def eps_list(self) -> list:
        return list(self.epsilon) if isinstance(self.epsilon, list) else [float(self.epsilon)]

    @property
    def obstacle(self) -> Optional[Region]:
        if not self.O_minus:
            return None
        if len(self.O_minus) == 1:
            return self.O_minus[0]
        return Union(tuple(self.O_minus), a=self.a)

    def game_config(self, epsilon: Optional[float] = None, t: Optional[float] = None) -> GameConfig:
        eps = self.eps_list[0] if epsilon is None else float(epsilon)
        return GameConfig(d=2, epsilon=eps, nu=self.nu, horizon_t=self.t_max if t is None else t,
                          u0=self.D0, psi_minus=self.obstacle, psi_plus=self.O_plus,
                          f=None if not self.f else float(self.f))

    def solver_params(self, **over) -> SolverParams:
        kw = {k: v for k, v in self.solver.items() if k != "extent"}
        kw.update(over)
        return SolverParams(**kw)

    def grid(self, epsilon: Optional[float] = None, params: Optional[SolverParams] = None) -> Grid:
        cfg = self.game_config(epsilon)
        params = params or self.solver_params()
        return default_grid(cfg, params, self.solver.get("extent"))

    def tube_curve(self) -> Optional[TubeCurve]:
        if self.curve is None:
            return None
        c = self.curve
        amp = float(c["amplitude"])
        lam = float(c.get("wavelength", 2 * (c["p1"] - c["p0"])))
        return TubeCurve.from_graph(lambda p: amp * np.cos(2 * np.pi * p / lam),
                                    float(c["p0"]), float(c["p1"]), 400, self.nu)

    def target_boundary(self, h: float = 0.005) -> np.ndarray:
        """Dense samples of the target's boundary (empty for extinction)."""
        kind = self.target["kind"]
        if kind in ("none", "extinction"):
            return np.empty((0, 2))
        if kind == "obstacle":
            return _boundary_of(self.obstacle, h)
        if kind == "hull":
            pts = np.vstack([c.boundary_samples(4096) for c in self.O_minus])
            hull = convex_hull(pts)
            return hull.boundary_points(h)
        if kind == "region":
            return _boundary_of(region_from_dict({**self.target["region"], "a": self.a}), h)
        res = candidate_set_A(self, h)
        return res.points


def _boundary_of(region: Region, h: float) -> np.ndarray:
    return region.boundary_samples(4096)


# ---------------------------------------------------------------------------
# candidate limit sets


@dataclass
class CandidateSet:
    boundary: Optional[Polyline]
    empty: bool = False
    unbounded: bool = False

    @property
    def points(self) -> np.ndarray:
        return np.empty((0, 2)) if self.boundary is None else self.boundary.points


def _ray_boundary(inside, c, rmax, n_dirs=720, iters=60):
    """Star-shaped boundary about c: largest s with inside(c + s e) per direction."""
    th = 2 * np.pi * np.arange(n_dirs) / n_dirs
    E = np.column_stack([np.cos(th), np.sin(th)])
    lo = np.zeros(n_dirs)
    hi = np.full(n_dirs, rmax)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = inside(c + mid[:, None] * E)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return c + lo[:, None] * E


def _min_enclosing_centre(P, iters=200):
    """Centre minimising the max distance to P (subgradient on the farthest point)."""
    from scipy.optimize import minimize
    c0 = P.mean(axis=0)
    res = minimize(lambda z: np.max(np.linalg.norm(P - z, axis=1)), c0, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return res.x, float(np.max(np.linalg.norm(P - res.x, axis=1)))


def candidate_set_A(scenario: Scenario, h: float = 0.005, n_dirs: int = 1440) -> CandidateSet:
    """Boundary of the ball-intersection or ball-union candidate set.

    ball-intersection: A = the intersection of closed radius-1/nu discs that
    contain O_minus. The feasible centres C = {z : O_minus in B(z, 1/nu)}
    form a convex set; x lies in A iff max_{z in C} |x - z| <= 1/nu, and the
    max is attained on the boundary of C. Both boundaries come from ray
    bisection. No feasible centre means A is the whole plane (unbounded).

    ball-union: A = union of open radius-1/nu discs inside O_plus; centres
    are the nodes (spacing h) where O_plus's signed distance is >= 1/nu, and
    x lies in A iff it is within 1/nu of one of them.
    """
    kind = scenario.target["kind"]
    if scenario.nu <= 0:
        raise ValueError("candidate sets need nu > 0")
    rho = 1.0 / scenario.nu
    if kind == "ball-intersection":
        P = np.vstack([c.boundary_samples(4096) for c in scenario.O_minus])
        P = P[convex_hull_indices(P)]
        c0, r0 = _min_enclosing_centre(P)
        if r0 > rho:
            return CandidateSet(None, empty=False, unbounded=True)

        def in_C(Z):
            return np.max(np.linalg.norm(Z[:, None, :] - P[None], axis=2), axis=1) <= rho

        Cb = _ray_boundary(in_C, c0, 2 * rho, n_dirs=720)
        Cb = Cb[convex_hull_indices(Cb)] if len(Cb) > 3 else Cb

        def in_A(X):
            return np.max(np.linalg.norm(X[:, None, :] - Cb[None], axis=2), axis=1) <= rho

        c = P.mean(axis=0)
        B = _ray_boundary(in_A, c, 2 * rho + 1.0, n_dirs=n_dirs)
        return CandidateSet(Polyline(B, closed=True))
    if kind == "ball-union":
        O = scenario.O_plus
        if O is None:
            return CandidateSet(None, unbounded=True)
        box = O.bbox() or scenario.D0.bbox()
        # centred lattice so symmetric scenes keep their centre as a node
        g = Grid.centered(float(np.max(np.abs(box))), h)
        nodes = g.nodes()
        Z = nodes[O.sdf(nodes) >= rho - 1e-9]
        if len(Z) == 0:
            return CandidateSet(None, empty=True)
        tree = cKDTree(Z)

        def in_A(X):
            d, _ = tree.query(X)
            return d < rho

        c = Z.mean(axis=0)
        B = _ray_boundary(in_A, c, 2 * rho + float(np.ptp(Z, axis=0).max()) + 1.0, n_dirs=n_dirs)
        return CandidateSet(Polyline(B, closed=True))
    raise ValueError(f"target kind {kind!r} has no candidate set")


def convex_hull_indices(P) -> np.ndarray:
    from scipy.spatial import ConvexHull
    if len(P) < 3:
        return np.arange(len(P))
    return ConvexHull(P).vertices


def pacman_closed_form(nu: float, R: float, n: int = 2000) -> np.ndarray:
    """Boundary samples of B_R minus {q >= sqrt(nu^-2 - p^2) + R/sqrt2 - sqrt(nu^-2 - R^2/2)}.

    The cap is the radius-1/nu arc through the mouth corners (+-R/sqrt2, R/sqrt2).
    """
    rho = 1.0 / nu
    k = R / math.sqrt(2.0)
    shift = k - math.sqrt(rho ** 2 - k ** 2)
    # outer arc of B_R below the corners, then the cap arc between them
    th = np.linspace(3 * math.pi / 4, 2 * math.pi + math.pi / 4, n)
    outer = R * np.column_stack([np.cos(th), np.sin(th)])
    p = np.linspace(k, -k, n)
    cap = np.column_stack([p, np.sqrt(rho ** 2 - p ** 2) + shift])
    return np.vstack([outer, cap])


# ---------------------------------------------------------------------------
# presets


def _disc(c, r):
    return {"kind": "disc", "center": list(c), "radius": r}


def _square(c, s):
    return {"kind": "square", "center": list(c), "side": s}


def _preset_docs():
    A = -0.25
    P = {}
    P["shrinking-circle"] = {
        "name": "shrinking-circle", "epsilon": 0.05, "nu": 0.0, "t_max": 0.3, "a": A,
        "checkpoints": [0.1, 0.2, 0.3], "D0": _disc((0, 0), 1.0), "O_minus": [],
        "target": {"kind": "region", "region": _disc((0, 0), math.sqrt(0.4))},
    }
    P["stick-disc"] = {
        "name": "stick-disc", "epsilon": 0.07, "nu": 0.0, "t_max": 1.0, "a": A,
        "checkpoints": [round(0.1 * k, 10) for k in range(1, 11)],
        "D0": _disc((0, 0), 1.0), "O_minus": [_disc((0, 0), 0.5)],
        "target": {"kind": "obstacle"},
    }
    P["two-squares"] = {
        "name": "two-squares", "epsilon": 0.07, "nu": 0.0, "t_max": 1.5, "a": A,
        "checkpoints": [round(0.25 * k, 10) for k in range(1, 7)],
        "D0": _disc((0, 0), 1.1), "O_minus": [_square((-0.7, 0), 0.4), _square((0.7, 0), 0.4)],
        "target": {"kind": "hull"},
    }
    P["two-squares-disconnected"] = {
        "name": "two-squares-disconnected", "epsilon": 0.07, "nu": 0.0, "t_max": 1.5, "a": A,
        "checkpoints": [round(0.25 * k, 10) for k in range(1, 7)],
        "D0": {"kind": "union", "parts": [_disc((-0.7, 0), 0.4), _disc((0.7, 0), 0.4)]},
        "O_minus": [_square((-0.7, 0), 0.4), _square((0.7, 0), 0.4)],
        "target": {"kind": "hull"},
    }
    P["two-discs"] = {
        "name": "two-discs", "epsilon": 0.07, "nu": 0.0, "t_max": 1.5, "a": A,
        "checkpoints": [round(0.25 * k, 10) for k in range(1, 7)],
        "D0": _disc((0, 0), 1.1), "O_minus": [_disc((-0.6, 0), 0.25), _disc((0.6, 0), 0.25)],
        "target": {"kind": "hull"},
    }
    P["multi-component"] = {
        "name": "multi-component", "epsilon": 0.07, "nu": 0.0, "t_max": 1.5, "a": A,
        "checkpoints": [round(0.25 * k, 10) for k in range(1, 7)],
        "D0": _disc((0, 0), 1.1),
        "O_minus": [_disc((-0.6, -0.35), 0.2), _disc((0.6, -0.35), 0.2), _square((0, 0.55), 0.3)],
        "target": {"kind": "hull"},
    }
    P["pacman"] = {
        "name": "pacman", "epsilon": 0.07, "nu": 1.0, "t_max": 2.0, "a": A,
        "checkpoints": [round(0.25 * k, 10) for k in range(1, 9)],
        "D0": {"kind": "offset", "base": {"kind": "pacman", "radius": 0.8}, "delta": 0.1},
        "O_minus": [{"kind": "pacman", "radius": 0.8}],
        "target": {"kind": "ball-intersection"},
        "params": {"R_prime": 0.8},
    }
    P["two-balls"] = {
        "name": "two-balls", "epsilon": 0.07, "nu": 1.0, "t_max": 2.0, "a": A,
        "checkpoints": [round(0.25 * k, 10) for k in range(1, 9)],
        "D0": _disc((0, 0), 0.85),
        "O_minus": [_disc((-0.5, 0), 0.2), _disc((0.5, 0), 0.2)],
        "curve": {"amplitude": 0.05, "p0": -0.5, "p1": 0.5, "wavelength": 2.0},
        "target": {"kind": "ball-intersection"},
    }
    r2 = math.sqrt(2.0)
    # O_plus is the open diamond {|p| + |q| < R}; D0 = O_plus
    for key, R, tgt in (("square-box-critical", r2, "ball-union"),
                        ("square-box-small", 1.0, "ball-union"),
                        ("square-box-large", 1.8, "ball-union")):
        P[key] = {
            "name": key, "epsilon": 0.07, "nu": 1.0, "t_max": 3.0, "a": A,
            "checkpoints": [round(0.25 * k, 10) for k in range(1, 13)],
            "D0": {"kind": "diamond", "R": R}, "O_minus": [],
            "O_plus": {"kind": "diamond", "R": R},
            "target": {"kind": tgt}, "params": {"R": R},
        }
    # eps^2 halves along the ladder so t / eps^2 is an integer for every t listed
    P["initial-condition"] = {
        "name": "initial-condition", "epsilon": [0.05, 0.05 / math.sqrt(2.0), 0.025], "nu": 0.0, "t_max": 0.01,
        "a": A, "D0": _disc((0, 0), 0.6), "O_minus": [], "target": {"kind": "none"},
        "params": {"probes": [[0.3, 0.0], [0.0, 0.45], [0.5, 0.2], [0.58, 0.0], [0.2, -0.2]],
                   "t_ladder": [0.01, 0.0075, 0.005]},
    }
    return P


PRESETS = _preset_docs()


def preset_names():
    return sorted(PRESETS)


def load_scenario(src) -> Scenario:
    """A preset name, a path to a JSON file, or a dict."""
    if isinstance(src, dict):
        return Scenario.from_dict(src)
    s = str(src)
    if s in PRESETS:
        return Scenario.from_dict(copy.deepcopy(PRESETS[s]))
    p = Path(s)
    if not p.exists():
        raise ScenarioError(f"no preset or file named {s!r}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{p}: invalid JSON: {e}") from None
    return Scenario.from_dict(doc)


def save_scenario(sc: Scenario, path):
    Path(path).write_text(sc.dumps())
