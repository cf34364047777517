"""Named players for the game engine.

All strategies are batched: ``moves`` receives positions of shape (B, d)
and answers for every row at once. A strategy that keeps per-game state
(moving centres, random streams) re-initialises it in ``reset``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .game import CarolStrategy, GameConfig, PaulStrategy

# ---------------------------------------------------------------------------
# frames


def complement_frame(n: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of unit vectors n (B, d).

    Candidates are the coordinate axes other than the largest |n_i|, in
    increasing order, orthogonalised against n and each other (two passes of
    Gram-Schmidt). Deterministic, so runs are reproducible.
    Returns (B, d-1, d).
    """
    n = np.atleast_2d(n)
    B, d = n.shape
    piv = np.argmax(np.abs(n), axis=1)
    out = np.empty((B, d - 1, d))
    idx = np.arange(d)
    if d == 2:
        # rotate by -90 degrees: (n_y, -n_x); matches Gram-Schmidt up to sign
        out[:, 0, 0] = n[:, 1]
        out[:, 0, 1] = -n[:, 0]
        return out
    # candidate axes per row, pivot removed, increasing order
    cand = np.tile(idx, (B, 1))
    cand = cand[cand != piv[:, None]].reshape(B, d - 1)
    basis = [n]
    for j in range(d - 1):
        e = np.zeros((B, d))
        e[np.arange(B), cand[:, j]] = 1.0
        for _ in range(2):
            for q in basis:
                e = e - np.einsum("bd,bd->b", e, q)[:, None] * q
        e /= np.linalg.norm(e, axis=1, keepdims=True)
        basis.append(e)
        out[:, j] = e
    return out


def _unit_rel(x, z):
    """(x - z)/|x - z| with a canonical axis where x == z."""
    rel = x - z
    r = np.linalg.norm(rel, axis=1)
    n = np.zeros_like(rel)
    ok = r > 0
    n[ok] = rel[ok] / r[ok, None]
    n[~ok, 0] = 1.0
    return n, r


# ---------------------------------------------------------------------------
# concentric players


class ConcentricPaul(PaulStrategy):
    """Keep every frame vector orthogonal to x - z; with nu > 0 drift toward z."""

    def __init__(self, z):
        self.z = np.asarray(z, float)

    def centres(self, x, n):
        return np.broadcast_to(self.z, x.shape)

    def moves(self, x, n, config: GameConfig):
        z = self.centres(x, n)
        nrm, _ = _unit_rel(x, z)
        V = complement_frame(nrm)
        W = -nrm if config.nu > 0 else None
        return np.zeros(len(x), bool), V, W


class ConcentricCarol(CarolStrategy):
    """Choose b^j so that <b^j v^j, x + nu eps^2 w - z> >= 0 (ties: +1).

    ``reversed=True`` flips the inequality (pull toward z). When nu < 0 Carol
    also picks w, pushing x away from z (toward it when reversed).
    """

    def __init__(self, z, reversed: bool = False):
        self.z = np.asarray(z, float)
        self.reversed = reversed

    def centres(self, x, n):
        return np.broadcast_to(self.z, x.shape)

    def moves(self, x, n, V, W, config: GameConfig):
        z = self.centres(x, n)
        base = x - z
        Wc = None
        if config.nu > 0 and W is not None:
            base = base + config.nu * config.epsilon ** 2 * W
        elif config.nu < 0:
            nrm, _ = _unit_rel(x, z)
            Wc = np.sign(config.nu) * nrm
            if self.reversed:
                Wc = -Wc
            base = base + config.nu * config.epsilon ** 2 * Wc
        s = np.einsum("bjd,bd->bj", V, base)
        if self.reversed:
            b = np.where(s <= 0, 1.0, -1.0)
        else:
            b = np.where(s >= 0, 1.0, -1.0)
        return np.zeros(len(x), bool), b, Wc


def concentric_paul(z) -> ConcentricPaul:
    return ConcentricPaul(z)


def concentric_carol(z, reversed: bool = False) -> ConcentricCarol:
    return ConcentricCarol(z, reversed)


# ---------------------------------------------------------------------------
# moving centres


class CenterSchedule:
    """Rule producing z_n per game with |z_{n+1} - z_n| <= C.

    ``initial`` gives z_0 for a batch; ``advance`` maps (z_n, x_{n+1}, n) to
    z_{n+1}. Adaptive rules may look at the new position.
    """

    C: float = 0.0

    def initial(self, batch: int, d: int) -> np.ndarray:
        raise NotImplementedError

    def advance(self, z, x, n) -> np.ndarray:
        raise NotImplementedError

    def checked_advance(self, z, x, n):
        z2 = self.advance(z, x, n)
        jump = np.linalg.norm(z2 - z, axis=1)
        if np.any(jump > self.C * (1 + 1e-12) + 1e-15):
            raise ValueError(f"centre moved {jump.max():.3g} > C = {self.C:.3g}")
        return z2


class ConstantSchedule(CenterSchedule):
    def __init__(self, z0):
        self.z0 = np.asarray(z0, float)
        self.C = 0.0

    def initial(self, batch, d):
        return np.tile(self.z0, (batch, 1))

    def advance(self, z, x, n):
        return z


class LinearSchedule(CenterSchedule):
    """z_n = z_0 + n * velocity."""

    def __init__(self, z0, velocity, C: Optional[float] = None):
        self.z0 = np.asarray(z0, float)
        self.velocity = np.asarray(velocity, float)
        speed = float(np.linalg.norm(self.velocity))
        self.C = speed if C is None else float(C)
        if speed > self.C * (1 + 1e-12):
            raise ValueError("velocity exceeds the displacement bound C")

    def initial(self, batch, d):
        return np.tile(self.z0, (batch, 1))

    def advance(self, z, x, n):
        return z + self.velocity


class ChasingSchedule(CenterSchedule):
    """Move z by C toward the newest position (away from it with toward=False)."""

    def __init__(self, z0, C: float, toward: bool = True):
        self.z0 = np.asarray(z0, float)
        self.C = float(C)
        self.toward = toward

    def initial(self, batch, d):
        return np.tile(self.z0, (batch, 1))

    def advance(self, z, x, n):
        nrm, r = _unit_rel(x, z)
        step = np.minimum(self.C, r) if self.toward else np.full(len(z), self.C)
        sgn = 1.0 if self.toward else -1.0
        return z + sgn * step[:, None] * nrm


class _Tracked:
    """Mixin holding z_n per game; the centre advances once per round."""

    def _init_track(self, schedule):
        self.schedule = schedule
        self._z = None
        self._n = -1

    def reset(self, batch, config):
        self._z = self.schedule.initial(batch, config.d)
        self._n = 0

    def centres(self, x, n):
        if self._z is None or self._z.shape[0] != x.shape[0]:
            self._z = self.schedule.initial(x.shape[0], x.shape[1])
            self._n = 0
        while self._n < n:
            self._z = self.schedule.checked_advance(self._z, x, self._n)
            self._n += 1
        return self._z

    @property
    def current_centres(self):
        return None if self._z is None else self._z.copy()


class MovingCirclePaul(_Tracked, ConcentricPaul):
    def __init__(self, schedule: CenterSchedule):
        self._init_track(schedule)


class MovingCircleCarol(_Tracked, ConcentricCarol):
    def __init__(self, schedule: CenterSchedule, reversed: bool = False):
        self.reversed = reversed
        self._init_track(schedule)


def push_by_moving_circle(schedule: CenterSchedule, side: str, reversed: bool = False):
    if side == "paul":
        return MovingCirclePaul(schedule)
    if side == "carol":
        return MovingCircleCarol(schedule, reversed)
    raise ValueError("side must be 'paul' or 'carol'")


# ---------------------------------------------------------------------------
# curve-following Paul


def circumradius(p, q, r) -> np.ndarray:
    """Circumradius of triangles (p, q, r), inf for collinear triples."""
    a = np.linalg.norm(q - r, axis=-1)
    b = np.linalg.norm(p - r, axis=-1)
    c = np.linalg.norm(p - q, axis=-1)
    cross = np.abs((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                   - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))
    with np.errstate(divide="ignore"):
        return np.where(cross > 0, a * b * c / (2 * cross), np.inf)


@dataclass(frozen=True)
class TubeCurve:
    """Polyline approximation of a planar curve with curvature at most nu."""

    points: np.ndarray
    nu: float
    tol: float = 0.05

    def __post_init__(self):
        P = np.asarray(self.points, float)
        if P.ndim != 2 or P.shape[1] != 2 or len(P) < 2:
            raise ValueError("curve needs at least two planar points")
        if not self.nu > 0:
            raise ValueError("curvature bound nu must be positive")
        object.__setattr__(self, "points", P)
        if len(P) >= 3:
            kappa = 1.0 / circumradius(P[:-2], P[1:-1], P[2:])
            worst = float(kappa.max())
            if worst > self.nu * (1 + self.tol):
                raise ValueError(f"curvature {worst:.4g} exceeds bound {self.nu:.4g}")

    @classmethod
    def from_graph(cls, f, p0: float, p1: float, n: int, nu: float, tol: float = 0.05):
        p = np.linspace(p0, p1, n)
        return cls(np.column_stack([p, f(p)]), nu, tol)

    @classmethod
    def arc(cls, centre, radius: float, theta0: float, theta1: float, n: int = 400, tol: float = 0.05):
        th = np.linspace(theta0, theta1, n)
        c = np.asarray(centre, float)
        pts = c + radius * np.column_stack([np.cos(th), np.sin(th)])
        return cls(pts, 1.0 / radius, tol)

    @property
    def endpoints(self):
        return self.points[0], self.points[-1]

    def project(self, x):
        """Nearest polyline point for each row of x, lowest segment index on ties.

        Returns (xhat (B, 2), segment index (B,), distance (B,)).
        """
        return self._project(x)[:3]

    def _project(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        A = self.points[:-1]
        D = self.points[1:] - A
        L2 = np.einsum("sd,sd->s", D, D)
        rel = x[:, None, :] - A[None]
        t = np.einsum("bsd,sd->bs", rel, D) / np.where(L2 > 0, L2, 1.0)
        t = np.clip(t, 0.0, 1.0)
        foot = A[None] + t[..., None] * D[None]
        dist = np.linalg.norm(x[:, None, :] - foot, axis=2)
        k = np.argmin(dist, axis=1)
        rows = np.arange(len(x))
        return foot[rows, k], k, dist[rows, k], t[rows, k]

    def left_normal(self, k):
        D = self.points[k + 1] - self.points[k]
        D = D / np.linalg.norm(D, axis=-1, keepdims=True)
        return np.column_stack([-D[..., 1], D[..., 0]])

    def distance(self, x):
        return self.project(x)[2]


class TubeStrategy(ConcentricPaul):
    """Paul plays concentric about z = xhat + (xhat - x)/(nu |xhat - x|).

    For x on the curve the centre sits on the left-normal side.
    """

    def __init__(self, curve: TubeCurve):
        self.curve = curve

    def centres(self, x, n):
        x = np.atleast_2d(x)
        xh, k, dist, t = self.curve._project(x)
        # foot inside a segment: the direction is that segment's normal, which
        # avoids dividing roundoff by roundoff when x sits on the curve
        nl = self.curve.left_normal(k)
        side = np.einsum("bd,bd->b", x - xh, nl)
        direction = np.where((side > 0)[:, None], -nl, nl)
        vertex = ((t <= 0.0) | (t >= 1.0)) & (dist > 0.0)
        direction[vertex] = (xh[vertex] - x[vertex]) / dist[vertex, None]
        return xh + direction / self.curve.nu

    def moves(self, x, n, config):
        if config.d != 2:
            raise ValueError("tube strategy is planar")
        return super().moves(x, n, config)


def tube_strategy(curve: TubeCurve) -> TubeStrategy:
    return TubeStrategy(curve)


# ---------------------------------------------------------------------------
# simple opponents


def random_frames(rng: np.random.Generator, batch: int, d: int) -> np.ndarray:
    if d == 2:
        th = rng.uniform(0, 2 * np.pi, batch)
        return np.stack([np.cos(th), np.sin(th)], axis=1)[:, None, :]
    G = rng.standard_normal((batch, d, d))
    Q, R = np.linalg.qr(G)
    Q = Q * np.sign(np.einsum("bii->bi", R))[:, None, :]
    return np.transpose(Q, (0, 2, 1))[:, : d - 1, :].copy()


def random_units(rng, batch, d):
    g = rng.standard_normal((batch, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class RandomPaul(PaulStrategy):
    def __init__(self, seed=0):
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def reset(self, batch, config):
        self.rng = np.random.default_rng(self.seed)

    def moves(self, x, n, config):
        B, d = x.shape
        V = random_frames(self.rng, B, d)
        W = random_units(self.rng, B, d) if config.nu > 0 else None
        return np.zeros(B, bool), V, W


class RandomCarol(CarolStrategy):
    """Independent random signs; ``p_plus`` may be one value per batch row."""

    def __init__(self, seed=0, p_plus=0.5):
        self.seed = seed
        self.p_plus = np.asarray(p_plus, float)
        self.rng = np.random.default_rng(seed)

    def reset(self, batch, config):
        self.rng = np.random.default_rng(self.seed)

    def moves(self, x, n, V, W, config):
        B, d = x.shape
        p = self.p_plus if self.p_plus.ndim == 0 else self.p_plus[:, None]
        b = np.where(self.rng.random((B, d - 1)) < p, 1.0, -1.0)
        Wc = random_units(self.rng, B, d) if config.nu < 0 else None
        return np.zeros(B, bool), b, Wc


class SignRuleCarol(CarolStrategy):
    """Fixed sign pattern: 'plus', 'minus' or 'alternate'."""

    def __init__(self, rule: str = "plus"):
        if rule not in ("plus", "minus", "alternate"):
            raise ValueError(f"unknown sign rule {rule!r}")
        self.rule = rule

    def moves(self, x, n, V, W, config):
        B, d = x.shape
        s = {"plus": 1.0, "minus": -1.0}.get(self.rule, 1.0 if n % 2 == 0 else -1.0)
        Wc = None
        if config.nu < 0:
            Wc = np.zeros((B, d))
            Wc[:, 0] = 1.0
        return np.zeros(B, bool), np.full((B, d - 1), s), Wc


class FixedFramePaul(PaulStrategy):
    """Always the same frame (and drift)."""

    def __init__(self, V, w=None):
        self.V = np.atleast_2d(np.asarray(V, float))
        self.w = None if w is None else np.asarray(w, float)

    def moves(self, x, n, config):
        B, d = x.shape
        V = np.broadcast_to(self.V, (B, d - 1, d)).copy()
        W = None
        if config.nu > 0:
            w = self.w if self.w is not None else np.eye(d)[0]
            W = np.tile(w, (B, 1))
        return np.zeros(B, bool), V, W


class QuitWhenPaul(PaulStrategy):
    """Wrap a Paul strategy; quit on rows where ``predicate(x, n)`` is true."""

    def __init__(self, inner: PaulStrategy, predicate):
        self.inner = inner
        self.predicate = predicate

    def reset(self, batch, config):
        self.inner.reset(batch, config)

    def moves(self, x, n, config):
        q, V, W = self.inner.moves(x, n, config)
        return np.asarray(q, bool) | np.asarray(self.predicate(x, n), bool), V, W


class QuitWhenCarol(CarolStrategy):
    def __init__(self, inner: CarolStrategy, predicate):
        self.inner = inner
        self.predicate = predicate

    def reset(self, batch, config):
        self.inner.reset(batch, config)

    def moves(self, x, n, V, W, config):
        q, b, Wc = self.inner.moves(x, n, V, W, config)
        return np.asarray(q, bool) | np.asarray(self.predicate(x, n), bool), b, Wc


class _Panel:
    """Split the batch among members.

    With ``counts`` and a batch of exactly sum(counts) rows, member k plays
    a contiguous block of counts[k] rows; otherwise rows go round-robin.
    """

    def __init__(self, members: Sequence, counts: Optional[Sequence[int]] = None):
        self.members = list(members)
        if not self.members:
            raise ValueError("empty panel")
        self.counts = None if counts is None else [int(c) for c in counts]

    def reset(self, batch, config):
        if self.counts is not None and sum(self.counts) == batch:
            edges = np.cumsum([0] + self.counts)
            self._groups = [np.arange(edges[k], edges[k + 1]) for k in range(len(self.members))]
        else:
            self._groups = [np.arange(k, batch, len(self.members)) for k in range(len(self.members))]
        for k, m in enumerate(self.members):
            m.reset(len(self._groups[k]), config)


class PanelPaul(_Panel, PaulStrategy):
    """Row k of the batch is played by member k mod len(members)."""

    def moves(self, x, n, config):
        B, d = x.shape
        q = np.zeros(B, bool)
        V = np.zeros((B, d - 1, d))
        W = np.zeros((B, d)) if config.nu > 0 else None
        for m, rows in zip(self.members, self._groups):
            if len(rows) == 0:
                continue
            qm, Vm, Wm = m.moves(x[rows], n, config)
            q[rows], V[rows] = qm, Vm
            if W is not None:
                W[rows] = Wm
        return q, V, W


class PanelCarol(_Panel, CarolStrategy):
    def moves(self, x, n, V, W, config):
        B, d = x.shape
        q = np.zeros(B, bool)
        b = np.ones((B, d - 1))
        Wc = np.zeros((B, d)) if config.nu < 0 else None
        for m, rows in zip(self.members, self._groups):
            if len(rows) == 0:
                continue
            qm, bm, Wm = m.moves(x[rows], n, V[rows], None if W is None else W[rows], config)
            q[rows], b[rows] = qm, bm
            if Wc is not None:
                Wc[rows] = Wm
        return q, b, Wc


def adversary_panel(side: str, z=None, size: int = 20, seed: int = 0):
    """A mixed panel of opponents: random players plus structured ones.

    For Carol: random sign streams, constant signs, and (given z) the
    reversed concentric rule that pulls toward z. For Paul: random frames
    plus fixed frames.
    """
    members = []
    if side == "carol":
        if z is not None:
            members.append(ConcentricCarol(z, reversed=True))
            members.append(ConcentricCarol(z))
        members += [SignRuleCarol("plus"), SignRuleCarol("minus"), SignRuleCarol("alternate")]
        members = members[:size]
        counts = [1] * len(members)
        rest = size - len(members)
        if rest > 0:
            # one vectorised member, one independent stream and bias per row
            members.append(RandomCarol(seed, p_plus=[(0.5, 0.2, 0.8)[k % 3] for k in range(rest)]))
            counts.append(rest)
        return PanelCarol(members, counts)
    if side == "paul":
        if z is not None:
            members.append(ConcentricPaul(z))
        members += [FixedFramePaul([[1.0, 0.0]], [1.0, 0.0]), FixedFramePaul([[0.0, 1.0]], [0.0, -1.0])]
        members = members[:size]
        counts = [1] * len(members)
        rest = size - len(members)
        if rest > 0:
            members.append(RandomPaul(seed))
            counts.append(rest)
        return PanelPaul(members, counts)
    raise ValueError("side must be 'paul' or 'carol'")
