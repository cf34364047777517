"""The two-player game: moves, one-step dynamics, stopping rights and play.

Positions move by sqrt(2) eps sum_j b_j v_j + nu eps^2 w per round. Paul
(maximiser) may quit first at cost psi_minus, then Carol (minimiser) at cost
psi_plus; otherwise the game ends after N = ceil(t / eps^2) rounds at cost
u0(x_N) plus the accrued running cost eps^2 sum f(x_i).

``play`` runs a batch of independent games in lockstep so that a panel of
opponents costs one vectorised pass per round.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

FRAME_TOL = 1e-12


def as_function(obj) -> Optional[Callable]:
    """Regions become their clamped profile; callables pass through."""
    if obj is None:
        return None
    if hasattr(obj, "profile"):
        return obj.profile
    if callable(obj):
        return obj
    c = float(obj)
    return lambda x: np.full(np.atleast_2d(x).shape[0], c)


def round_count(t: float, epsilon: float) -> int:
    """Smallest integer N with N eps^2 >= t."""
    if not (t > 0 and epsilon > 0):
        raise ValueError("round_count needs t > 0 and epsilon > 0")
    q = t / epsilon ** 2
    n = math.ceil(q)
    # guard against q = 12.000000000000002 from rounding of an exact ratio
    if n - q > 1 - 1e-9:
        n -= 1
    return max(int(n), 1)


@dataclass(frozen=True)
class GameConfig:
    d: int = 2
    epsilon: float = 0.1
    nu: float = 0.0
    horizon_t: float = 1.0
    u0: Callable = None
    psi_minus: Optional[Callable] = None
    psi_plus: Optional[Callable] = None
    f: Optional[Callable] = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.horizon_t > 0:
            raise ValueError("horizon_t must be positive")
        # keep the original objects: the grid solver wants Region signed distances
        object.__setattr__(self, "_sources", {n: getattr(self, n) for n in ("u0", "psi_minus", "psi_plus", "f")})
        for name in ("u0", "psi_minus", "psi_plus", "f"):
            object.__setattr__(self, name, as_function(getattr(self, name)))
        if self.u0 is None:
            raise ValueError("u0 is required")

    def source(self, name):
        """The object a callable field was built from (Region, callable or constant)."""
        return self._sources[name]

    @property
    def n_rounds(self) -> int:
        return round_count(self.horizon_t, self.epsilon)

    def obstacles(self, x: np.ndarray):
        """(psi_minus, psi_plus) at the points, with the order checked."""
        lo = self.psi_minus(x) if self.psi_minus is not None else np.full(len(x), -np.inf)
        hi = self.psi_plus(x) if self.psi_plus is not None else np.full(len(x), np.inf)
        if np.any(lo > hi):
            raise ValueError("psi_minus exceeds psi_plus at a queried point")
        return lo, hi

    def running(self, x: np.ndarray) -> np.ndarray:
        if self.f is None:
            return np.zeros(len(x))
        return np.asarray(self.f(x), float)


@dataclass(frozen=True)
class GameState:
    position: np.ndarray
    round: int = 0
    accumulated_running_cost: float = 0.0


@dataclass(frozen=True)
class PaulMove:
    quit: bool = False
    v: Optional[np.ndarray] = None   # (d-1, d) orthonormal rows
    w: Optional[np.ndarray] = None   # (d,) unit, only when nu > 0

    @classmethod
    def play(cls, v, w=None):
        return cls(False, np.atleast_2d(np.asarray(v, float)), None if w is None else np.asarray(w, float))

    @classmethod
    def stop(cls):
        return cls(True)


@dataclass(frozen=True)
class CarolMove:
    quit: bool = False
    b: Optional[np.ndarray] = None   # (d-1,) entries +-1
    w: Optional[np.ndarray] = None   # only when nu < 0

    @classmethod
    def signs(cls, b, w=None):
        return cls(False, np.atleast_1d(np.asarray(b, float)), None if w is None else np.asarray(w, float))

    @classmethod
    def stop(cls):
        return cls(True)


@dataclass(frozen=True)
class Termination:
    kind: str                 # "paul_quit", "carol_quit" or "horizon"
    round: Optional[int] = None

    def __str__(self):
        return self.kind if self.round is None else f"{self.kind}({self.round})"


@dataclass
class Outcome:
    cost: float
    trajectory: np.ndarray          # (n+1, d) including the start
    termination: Termination
    running_cost: np.ndarray = field(default=None)  # accrued cost after each recorded position

    def to_csv(self, path):
        from .export import write_trajectory_csv
        write_trajectory_csv(path, self)


def check_frames(V: np.ndarray, tol: float = FRAME_TOL):
    """V: (B, d-1, d). Raise unless each frame is orthonormal within tol."""
    G = np.einsum("bij,bkj->bik", V, V)
    eye = np.eye(V.shape[1])
    if not np.all(np.abs(G - eye) <= tol):
        raise ValueError("invalid frame")


def check_units(W: np.ndarray, tol: float = FRAME_TOL):
    if not np.all(np.abs(np.einsum("bi,bi->b", W, W) - 1.0) <= 2 * tol):
        raise ValueError("invalid frame")


def displacement(config: GameConfig, V, b, W) -> np.ndarray:
    """Batched move: sqrt(2) eps sum_j b_j v_j + nu eps^2 w."""
    eps = config.epsilon
    dx = math.sqrt(2.0) * eps * np.einsum("bj,bjd->bd", b, V)
    if config.nu != 0.0:
        if W is None:
            raise ValueError("drift direction missing")
        dx = dx + config.nu * eps ** 2 * W
    return dx


def step(state: GameState, paul: PaulMove, carol: CarolMove, config: GameConfig) -> GameState:
    if state.round >= config.n_rounds:
        raise ValueError("game already finished")
    if paul.quit or carol.quit:
        raise ValueError("step needs playing moves, not quits")
    d = config.d
    V = np.asarray(paul.v, float).reshape(1, d - 1, d)
    b = np.asarray(carol.b, float).reshape(1, d - 1)
    if not np.all(np.abs(b) == 1):
        raise ValueError("signs must be +1 or -1")
    check_frames(V)
    W = None
    if config.nu > 0:
        if paul.w is None:
            raise ValueError("Paul must choose w when nu > 0")
        W = np.asarray(paul.w, float).reshape(1, d)
    elif config.nu < 0:
        if carol.w is None:
            raise ValueError("Carol must choose w when nu < 0")
        W = np.asarray(carol.w, float).reshape(1, d)
    if W is not None:
        check_units(W)
    x = np.asarray(state.position, float).reshape(1, d)
    fx = float(config.running(x)[0])
    new = x + displacement(config, V, b, W)
    return GameState(new[0], state.round + 1,
                     state.accumulated_running_cost + config.epsilon ** 2 * fx)


# ---------------------------------------------------------------------------
# strategies: batched interface


class PaulStrategy:
    """Batched Paul. ``moves`` maps positions (B, d) at round n to
    (quit (B,), V (B, d-1, d), W (B, d) or None)."""

    def reset(self, batch: int, config: GameConfig):
        pass

    def moves(self, x, n, config):
        raise NotImplementedError

    def __call__(self, state: GameState, config: GameConfig) -> PaulMove:
        q, V, W = self.moves(np.atleast_2d(state.position), state.round, config)
        if q[0]:
            return PaulMove.stop()
        return PaulMove(False, V[0], None if W is None else W[0])


class CarolStrategy:
    """Batched Carol. ``moves`` maps (x, n, V, W) to
    (quit (B,), b (B, d-1), W (B, d) or None)."""

    def reset(self, batch: int, config: GameConfig):
        pass

    def moves(self, x, n, V, W, config):
        raise NotImplementedError

    def __call__(self, state: GameState, paul: PaulMove, config: GameConfig) -> CarolMove:
        V = paul.v[None]
        W = None if paul.w is None else paul.w[None]
        q, b, Wc = self.moves(np.atleast_2d(state.position), state.round, V, W, config)
        if q[0]:
            return CarolMove.stop()
        return CarolMove(False, b[0], None if Wc is None else Wc[0])


class FunctionPaul(PaulStrategy):
    """Adapter for a plain function (GameState, GameConfig) -> PaulMove."""

    def __init__(self, fn):
        self.fn = fn

    def moves(self, x, n, config):
        B, d = x.shape
        q = np.zeros(B, bool)
        V = np.zeros((B, d - 1, d))
        W = np.zeros((B, d)) if config.nu > 0 else None
        for k in range(B):
            m = self.fn(GameState(x[k], n), config)
            if m.quit:
                q[k] = True
                V[k] = np.eye(d)[1:]
                if W is not None:
                    W[k, 0] = 1.0
                continue
            V[k] = m.v
            if W is not None:
                W[k] = m.w
        return q, V, W


class FunctionCarol(CarolStrategy):
    def __init__(self, fn):
        self.fn = fn

    def moves(self, x, n, V, W, config):
        B, d = x.shape
        q = np.zeros(B, bool)
        b = np.ones((B, d - 1))
        Wc = np.zeros((B, d)) if config.nu < 0 else None
        for k in range(B):
            pm = PaulMove(False, V[k], None if W is None else W[k])
            m = self.fn(GameState(x[k], n), pm, config)
            if m.quit:
                q[k] = True
                if Wc is not None:
                    Wc[k, 0] = 1.0
                continue
            b[k] = m.b
            if Wc is not None:
                Wc[k] = m.w
        return q, b, Wc


def _as_paul(s):
    return s if isinstance(s, PaulStrategy) else FunctionPaul(s)


def _as_carol(s):
    return s if isinstance(s, CarolStrategy) else FunctionCarol(s)


def play(config: GameConfig, paul_strategy, carol_strategy, x0, record: bool = True):
    """Play from x0 (d,) or a batch (B, d); returns one Outcome or a list.

    Per round: Paul may quit (cost psi_minus at the current position), then
    Carol (cost psi_plus), then the moves are made. The stopping cost
    replaces everything downstream and does not include the running cost
    accrued so far.
    """
    paul = _as_paul(paul_strategy)
    carol = _as_carol(carol_strategy)
    x0 = np.asarray(x0, float)
    single = x0.ndim == 1
    x = np.atleast_2d(x0).copy()
    B, d = x.shape
    if d != config.d:
        raise ValueError(f"start point has dimension {d}, config has {config.d}")
    N = config.n_rounds
    paul.reset(B, config)
    carol.reset(B, config)
    alive = np.ones(B, bool)
    cost = np.zeros(B)
    kind = np.array(["horizon"] * B, dtype=object)
    qround = np.full(B, -1)
    run = np.zeros(B)
    last = np.zeros(B, int)
    traj = np.empty((N + 1, B, d)) if record else None
    runs = np.empty((N + 1, B)) if record else None
    if record:
        traj[0] = x
        runs[0] = 0.0
    eps2 = config.epsilon ** 2
    for n in range(N):
        if not alive.any():
            break
        if config.psi_minus is not None or config.psi_plus is not None:
            lo, hi = config.obstacles(x)
        else:
            lo = hi = None
        qp, V, Wp = paul.moves(x, n, config)
        qp = np.asarray(qp, bool) & alive
        if qp.any():
            if lo is None or config.psi_minus is None:
                raise ValueError("Paul cannot quit without psi_minus")
            cost[qp] = lo[qp]
            kind[qp] = "paul_quit"
            qround[qp] = n + 1
            alive &= ~qp
        qc, b, Wc = carol.moves(x, n, V, Wp, config)
        qc = np.asarray(qc, bool) & alive
        if qc.any():
            if hi is None or config.psi_plus is None:
                raise ValueError("Carol cannot quit without psi_plus")
            cost[qc] = hi[qc]
            kind[qc] = "carol_quit"
            qround[qc] = n + 1
            alive &= ~qc
        if not alive.any():
            break
        a = alive
        Va = V[a]
        check_frames(Va)
        ba = np.asarray(b, float)[a]
        if not np.all(np.abs(ba) == 1):
            raise ValueError("signs must be +1 or -1")
        W = None
        if config.nu > 0:
            if Wp is None:
                raise ValueError("Paul must choose w when nu > 0")
            W = Wp[a]
        elif config.nu < 0:
            if Wc is None:
                raise ValueError("Carol must choose w when nu < 0")
            W = Wc[a]
        if W is not None:
            check_units(W)
        run[a] += eps2 * config.running(x[a])
        x[a] = x[a] + displacement(config, Va, ba, W)
        last[a] = n + 1
        if record:
            traj[n + 1] = x
            runs[n + 1] = run
    done = kind == "horizon"
    if done.any():
        cost[done] = np.asarray(config.u0(x[done]), float) + run[done]
    outs = []
    for k in range(B):
        t = Termination(kind[k], None if kind[k] == "horizon" else int(qround[k]))
        if record:
            tr = traj[: last[k] + 1, k].copy()
            rc = runs[: last[k] + 1, k].copy()
        else:
            tr = x[k][None].copy()
            rc = np.array([run[k]])
        outs.append(Outcome(float(cost[k]), tr, t, rc))
    return outs[0] if single else outs
