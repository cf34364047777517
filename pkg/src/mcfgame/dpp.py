"""Backward value iteration of the game on a planar grid.

One level maps u(., t - eps^2) to

    u(x, t) = max{psi_minus, min{psi_plus,
                   sup_{v, w} min_{b=+-1} u(x + sqrt2 eps b v + nu eps^2 w) + eps^2 f(x)}}

with bilinear interpolation between nodes. The sup over the unit circle is
taken over M/2 lines (v and -v give the same min over b) and then refined by
a golden-section search around the best line. The drift w is the direction
of the discrete gradient (the first-order optimal choice), optionally
together with M uniform directions.

Lifted iteration
----------------
Clamped data max(a, d) have a flat plateau at the far-field value and a kink
at its rim. Interpolating across that kink makes the discrete sup miss
the narrow cone of good directions near the rim, which erodes the set. With
f = 0 the operator commutes with the monotone map s -> max(a, s), so when
u0 and the obstacles are Regions the solver iterates on their *unclamped*
signed distances and clamps only the output. Both computations agree exactly
off the grid; on the grid the lifted one keeps the field smooth at the rim.
Lookups outside the box return a sentinel below every field value, which is
sound because max(a, sentinel) = a is the clamped far-field value.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .game import GameConfig, round_count
from .geometry import Polyline, Region, hausdorff

log = logging.getLogger(__name__)

BYTES_PER_NODE = 8 * 8  # two levels, obstacles, running cost, mask, headroom


@dataclass(frozen=True)
class Grid:
    """Uniform node lattice: x_i = x0 + i h, y_j = y0 + j h."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least two nodes per axis")

    @classmethod
    def centered(cls, half_width: float, h: float, center=(0.0, 0.0)) -> "Grid":
        """Square box [c - L, c + L]^2 with the centre on a node."""
        m = int(math.ceil(half_width / h - 1e-9))
        cx, cy = center
        return cls(cx - m * h, cy - m * h, h, 2 * m + 1, 2 * m + 1)

    @classmethod
    def from_box(cls, xmin, xmax, ymin, ymax, h) -> "Grid":
        nx = int(math.ceil((xmax - xmin) / h - 1e-9)) + 1
        ny = int(math.ceil((ymax - ymin) / h - 1e-9)) + 1
        return cls(xmin, ymin, h, nx, ny)

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def xs(self):
        return self.x0 + self.h * np.arange(self.nx)

    @property
    def ys(self):
        return self.y0 + self.h * np.arange(self.ny)

    @property
    def box(self):
        return (self.x0, self.x0 + (self.nx - 1) * self.h, self.y0, self.y0 + (self.ny - 1) * self.h)

    def nodes(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def sample(self, fn) -> np.ndarray:
        return np.asarray(fn(self.nodes()), float).reshape(self.shape)

    def contains_ball(self, R: float, center=(0.0, 0.0)) -> bool:
        x0, x1, y0, y1 = self.box
        cx, cy = center
        return x0 <= cx - R and x1 >= cx + R and y0 <= cy - R and y1 >= cy + R

    def same_as(self, other: "Grid", tol: float = 1e-12) -> bool:
        return (self.shape == other.shape and abs(self.h - other.h) <= tol
                and abs(self.x0 - other.x0) <= tol and abs(self.y0 - other.y0) <= tol)


@dataclass(frozen=True)
class SolverParams:
    """Discretisation of the one-step operator.

    w_mode: "gradient" (drift along the discrete gradient), "uniform" (M
    equally spaced drifts) or "product" (both; the full M x M search).
    mode: "lifted", "literal" or "auto" (lifted when f = 0 and the data are
    Regions sharing one far-field value).
    """

    M: int = 32
    refine_iters: int = 16
    grad_seed: bool = True
    w_mode: str = "gradient"
    h: Optional[float] = None
    mode: str = "auto"
    n_jobs: int = 1
    max_nodes: int = 40_000_000
    margin: Optional[float] = None

    def __post_init__(self):
        if self.M < 8 or self.M % 2:
            raise ValueError("direction count M must be even and at least 8")
        if self.w_mode not in ("gradient", "uniform", "product"):
            raise ValueError(f"unknown w_mode {self.w_mode!r}")
        if self.mode not in ("auto", "lifted", "literal"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be nonnegative")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be at least 1")

    @classmethod
    def pure(cls, M: int = 32, **kw) -> "SolverParams":
        """Plain sup over the M fixed directions, no refinement or seeds."""
        return cls(M=M, refine_iters=0, grad_seed=False, **kw)

    def spacing(self, epsilon: float) -> float:
        return self.h if self.h is not None else epsilon ** 2

    @property
    def line_angles(self) -> np.ndarray:
        return np.pi * np.arange(self.M // 2) / (self.M // 2)

    @property
    def drift_angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M


@dataclass
class ValueField:
    """Grid values after ``k`` backward levels (time k eps^2)."""

    grid: Grid
    values: np.ndarray
    k: int
    config: Optional[GameConfig] = None
    far: float = -1.0
    raw: Optional[np.ndarray] = field(default=None, repr=False)  # lifted iterate
    t: Optional[float] = None  # explicit time (reference fields)

    @property
    def time(self) -> float:
        if self.t is not None:
            return self.t
        return self.k * self.config.epsilon ** 2 if self.config is not None else float("nan")

    def resample(self, grid: Grid) -> "ValueField":
        """Bilinear transfer onto another grid (far value outside this box).

        A lifted field interpolates its smooth unclamped iterate and clamps
        afterwards, so the kink at the far-field level is not smeared.
        """
        P = grid.nodes()
        if self.raw is None:
            return ValueField(grid, self.at(P).reshape(grid.shape), self.k, self.config, self.far, None, self.t)
        g = self.grid
        raw = _kernels.bilinear(self.raw, P, g.x0, g.y0, g.h, self.far).reshape(grid.shape)
        return ValueField(grid, np.maximum(self.far, raw), self.k, self.config, self.far, raw, self.t)

    def at(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, float))
        g = self.grid
        return _kernels.bilinear(self.values, pts, g.x0, g.y0, g.h, self.far)

    def zero_set(self, level: float = 0.0, tol: Optional[float] = None):
        return extract_zero_set(self, level, tol)

    def to_csv(self, path):
        from .export import write_field_csv
        write_field_csv(path, self)

    def to_pgm(self, path):
        from .export import write_pgm
        write_pgm(path, self.values)


# ---------------------------------------------------------------------------
# problem setup


def _is_zero(obj) -> bool:
    if obj is None:
        return True
    if isinstance(obj, (int, float)):
        return obj == 0
    return False


def lifted_ok(config: GameConfig) -> bool:
    """Can the solver iterate on unclamped signed distances?"""
    u0 = config.source("u0")
    if not isinstance(u0, Region) or not _is_zero(config.source("f")):
        return False
    for name in ("psi_minus", "psi_plus"):
        r = config.source(name)
        if r is not None and not (isinstance(r, Region) and r.a == u0.a):
            return False
    return True


def far_field(config: GameConfig, default: float = -1.0) -> float:
    u0 = config.source("u0")
    return u0.a if isinstance(u0, Region) else default


def step_length(config: GameConfig) -> float:
    return math.sqrt(2.0) * config.epsilon + abs(config.nu) * config.epsilon ** 2


def default_grid(config: GameConfig, params: SolverParams, extent: Optional[float] = None) -> Grid:
    """Box holding every region (and B_extent) plus a one-step margin.

    Beyond distance |a| of D0 the initial profile equals a; positions that
    far out cannot raise the value above a within the horizon, so the box
    covers D0 dilated by |a|, the obstacles, and the reach nu t of the drift.
    The drift reach is capped when the value is known to be a further out:
    outside psi_plus's region dilated by |a| (value <= psi_plus = a), and,
    when the data lie in B_rho(0) with rho <= S = 1/nu + nu eps^2 / 2,
    outside B_{S + |a|} (Carol's concentric play about 0 keeps |x_n| >= S).
    """
    h = params.spacing(config.epsilon)
    a = far_field(config)
    boxes = []
    for name in ("u0", "psi_minus"):
        r = config.source(name)
        if isinstance(r, Region) and r.bounded:
            boxes.append(np.asarray(r.bbox(), float))
    if extent is None:
        if not boxes:
            raise ValueError("cannot size a grid for unbounded data; pass extent")
        B = np.array(boxes)
        base = float(np.max(np.abs(B)))
        extent = base + abs(a) + max(config.nu, 0.0) * config.horizon_t
        caps = []
        hi = config.source("psi_plus")
        if isinstance(hi, Region) and hi.bounded and hi.a == a:
            caps.append(max(base, float(np.max(np.abs(hi.bbox())))) + abs(a))
        if config.nu > 0:
            S = 1.0 / config.nu + 0.5 * config.nu * config.epsilon ** 2
            rho = _data_radius(config)
            if rho <= S:
                caps.append(max(base, S) + abs(a))
        if caps:
            extent = min([extent] + caps)
    margin = params.margin if params.margin is not None else step_length(config) + 2 * h
    return Grid.centered(extent + margin, h)


def _data_radius(config: GameConfig) -> float:
    """Radius about 0 of a ball holding the regions of u0 and psi_minus."""
    rho = 0.0
    for name in ("u0", "psi_minus"):
        r = config.source(name)
        if r is None:
            continue
        if not (isinstance(r, Region) and r.bounded):
            return math.inf
        P = r.boundary_samples(4096)
        # chord sagitta of a 4096-gon is far below any grid spacing in use
        rho = max(rho, float(np.max(np.linalg.norm(P, axis=1))) * (1 + 1e-6))
    return rho


def _sample_data(config: GameConfig, grid: Grid, lifted: bool):
    nodes = grid.nodes()

    def get(name, default):
        src = config.source(name)
        if src is None:
            return np.full(grid.shape, default)
        if lifted:
            return np.asarray(src.sdf(nodes), float).reshape(grid.shape)
        return np.asarray(getattr(config, name)(nodes), float).reshape(grid.shape)

    u = get("u0", 0.0)
    lo = get("psi_minus", -np.inf)
    hi = get("psi_plus", np.inf)
    if np.any(lo > hi):
        bad = np.argwhere(lo > hi)[0]
        raise ValueError(f"psi_minus exceeds psi_plus at node {tuple(nodes[np.ravel_multi_index(bad, grid.shape)])}")
    f = config.running(nodes).reshape(grid.shape) * config.epsilon ** 2
    return u, lo, hi, f


def _memory_guard(grid: Grid, params: SolverParams):
    if grid.size > params.max_nodes:
        factor = math.sqrt(grid.size / params.max_nodes)
        raise MemoryError(
            f"grid of {grid.size} nodes exceeds the limit of {params.max_nodes}; "
            f"coarsen to h >= {grid.h * factor:.3g} or enlarge max_nodes")


class _Sweeper:
    """One backward level on row blocks; blocks write disjoint rows."""

    def __init__(self, config, params, grid, lo, hi, fterm):
        self.config = config
        self.p = params
        self.g = grid
        self.lo, self.hi, self.fterm = lo, hi, fterm
        self.active = np.ascontiguousarray(lo < hi)
        eps = config.epsilon
        self.step = math.sqrt(2.0) * eps
        self.drift = config.nu * eps ** 2
        nu = config.nu
        self.carol_w = nu < 0
        if nu == 0:
            self.uniform_w = np.empty(0)
            self.use_grad_w = False
        else:
            self.uniform_w = params.drift_angles if params.w_mode in ("uniform", "product") else np.empty(0)
            self.use_grad_w = params.w_mode in ("gradient", "product")
        # kernel applies nu eps^2 w with the sign folded into the drift length;
        # for nu < 0 Carol's w enters as |nu| eps^2 times her choice.
        self.drift_len = abs(self.drift)
        self.angles = params.line_angles
        n = min(params.n_jobs, grid.nx)
        edges = np.linspace(0, grid.nx, n + 1).astype(int)
        self.blocks = [(int(edges[k]), int(edges[k + 1])) for k in range(n)]
        self.pool = ThreadPoolExecutor(n) if n > 1 else None

    def __call__(self, u, out, far):
        g = self.g

        def run(b):
            _kernels.sweep_rows(u, out, self.lo, self.hi, self.fterm, self.active, b[0], b[1],
                                g.x0, g.y0, g.h, far, self.step, self.drift_len, self.angles,
                                self.p.refine_iters, self.uniform_w, self.use_grad_w,
                                self.carol_w, self.p.grad_seed)

        if self.pool is None:
            for b in self.blocks:
                run(b)
        else:
            list(self.pool.map(run, self.blocks))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def solve(config: GameConfig, params: SolverParams = SolverParams(), grid: Optional[Grid] = None,
          checkpoints: Sequence[float] = (), n_levels: Optional[int] = None, callback=None):
    """Run N = ceil(t / eps^2) levels and return the final ValueField.

    ``checkpoints`` are times; the field after ceil(t_c / eps^2) levels is
    passed to ``callback(field)`` and collected in ``field.history``.
    """
    if config.d != 2:
        raise ValueError("the grid solver is planar (d = 2)")
    grid = grid or default_grid(config, params)
    _memory_guard(grid, params)
    lifted = params.mode == "lifted" or (params.mode == "auto" and lifted_ok(config))
    if params.mode == "lifted" and not lifted_ok(config):
        raise ValueError("lifted mode needs f = 0 and Region data with one far-field value")
    a = far_field(config)
    u, lo, hi, fterm = _sample_data(config, grid, lifted)
    u = np.ascontiguousarray(np.maximum(lo, np.minimum(hi, u)))
    N = config.n_rounds if n_levels is None else int(n_levels)
    marks = sorted({round_count(t, config.epsilon) for t in checkpoints if t > 0})
    sweeper = _Sweeper(config, params, grid, lo, hi, fterm)
    out = np.empty_like(u)
    history = []

    def emit(k, raw):
        vals = np.maximum(a, raw) if lifted else raw.copy()
        fld = ValueField(grid, vals, k, config, a, raw.copy() if lifted else None)
        return fld

    try:
        for k in range(1, N + 1):
            t0 = time.perf_counter()
            far = (min(a, float(u.min())) - 1.0) if lifted else a
            sweeper(u, out, far)
            u, out = out, u
            log.info("level %d/%d %.3fs", k, N, time.perf_counter() - t0)
            if k in marks:
                fld = emit(k, u)
                history.append(fld)
                if callback is not None:
                    callback(fld)
    finally:
        sweeper.close()
    final = emit(N, u)
    final.history = history
    final.lifted = lifted
    return final


def dpp_update(fld: ValueField, node, params: SolverParams, config: GameConfig) -> float:
    """One node of the next level by exhaustive search over the discrete
    direction set (M/2 lines times the drift set), with no refinement.

    Drifts: "uniform" and "product" use the M uniform angles; "gradient"
    uses the direction of the field's discrete gradient at the node.
    """
    x, y = map(float, node)
    g = fld.grid
    eps = config.epsilon
    u = np.ascontiguousarray(fld.raw if fld.raw is not None else fld.values)
    far = fld.far
    if fld.raw is not None:
        far = min(fld.far, float(u.min())) - 1.0
    nu = config.nu
    if nu == 0:
        wang = np.empty(0)
    elif params.w_mode == "gradient":
        d = g.h
        gx = fld_at(u, g, far, x + d, y) - fld_at(u, g, far, x - d, y)
        gy = fld_at(u, g, far, x, y + d) - fld_at(u, g, far, x, y - d)
        ang = math.atan2(gy, gx) if (gx or gy) else 0.0
        wang = np.array([ang + (math.pi if nu < 0 else 0.0)])
    else:
        wang = params.drift_angles
    table = _kernels.pair_table(u, x, y, g.x0, g.y0, g.h, far, math.sqrt(2) * eps,
                                abs(nu) * eps ** 2, params.line_angles, wang)
    inner = table.min(axis=1) if nu < 0 else table.max(axis=1)
    val = float(inner.max()) + eps ** 2 * float(config.running(np.array([[x, y]]))[0])
    lo, hi = config.obstacles(np.array([[x, y]]))
    val = max(float(lo[0]), min(float(hi[0]), val))
    if fld.raw is not None:
        val = max(fld.far, val)
    return val


def fld_at(u, g: Grid, far, x, y) -> float:
    return float(_kernels.bilinear(u, np.array([[x, y]]), g.x0, g.y0, g.h, far)[0])


# ---------------------------------------------------------------------------
# level sets


@dataclass
class ZeroSet:
    """Contours of a field at ``level`` plus the +-tol companions.

    ``positive`` marks nodes with u > level + tol and ``nonnegative`` those
    with u >= level - tol; a gap between the two shows fattening.
    """

    contours: list
    upper: list
    lower: list
    positive: np.ndarray
    nonnegative: np.ndarray
    tol: float
    grid: Grid

    def points(self, which: str = "contours") -> np.ndarray:
        lines = getattr(self, which)
        if not lines:
            return np.empty((0, 2))
        return np.vstack([p.points for p in lines])

    @property
    def empty(self) -> bool:
        return not self.contours

    @property
    def fattened_nodes(self) -> int:
        return int(np.count_nonzero(self.nonnegative & ~self.positive))


def marching_squares(values: np.ndarray, grid: Grid, level: float = 0.0) -> list:
    """Contour polylines of the bilinear field at ``level``.

    Inside means value > level. In a saddle cell (diagonal corners inside)
    the mean of the four corners decides: if it is inside, the inside
    corners are joined through the cell centre.
    """
    u = np.asarray(values, float) - level
    nx, ny = u.shape
    ins = u > 0
    c00 = ins[:-1, :-1]
    c10 = ins[1:, :-1]
    c11 = ins[1:, 1:]
    c01 = ins[:-1, 1:]
    code = c00.astype(np.int8) | (c10 << 1) | (c11 << 2) | (c01 << 3)
    cells = np.argwhere((code != 0) & (code != 15))
    if len(cells) == 0:
        return []
    nh = nx * ny  # horizontal edges (i,j)-(i+1,j) keyed i*ny + j

    def hkey(i, j):
        return i * ny + j

    def vkey(i, j):
        return nh + i * ny + j

    pts = {}

    def cross(key):
        if key in pts:
            return
        if key < nh:
            i, j = divmod(key, ny)
            a, b = u[i, j], u[i + 1, j]
            t = a / (a - b)
            pts[key] = (grid.x0 + (i + t) * grid.h, grid.y0 + j * grid.h)
        else:
            i, j = divmod(key - nh, ny)
            a, b = u[i, j], u[i, j + 1]
            t = a / (a - b)
            pts[key] = (grid.x0 + i * grid.h, grid.y0 + (j + t) * grid.h)

    adj = {}

    def link(p, q):
        cross(p)
        cross(q)
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)

    for i, j in cells:
        i = int(i)
        j = int(j)
        c = int(code[i, j])
        B, R, T, L = hkey(i, j), vkey(i + 1, j), hkey(i, j + 1), vkey(i, j)
        if c in (5, 10):
            centre = 0.25 * (u[i, j] + u[i + 1, j] + u[i + 1, j + 1] + u[i, j + 1]) > 0
            if c == 5:  # 00 and 11 inside
                if centre:
                    link(B, R)
                    link(T, L)
                else:
                    link(B, L)
                    link(R, T)
            else:       # 10 and 01 inside
                if centre:
                    link(B, L)
                    link(R, T)
                else:
                    link(B, R)
                    link(T, L)
            continue
        e = []
        if c00[i, j] != c10[i, j]:
            e.append(B)
        if c10[i, j] != c11[i, j]:
            e.append(R)
        if c11[i, j] != c01[i, j]:
            e.append(T)
        if c01[i, j] != c00[i, j]:
            e.append(L)
        link(e[0], e[1])

    # walk chains; open chains start at degree-one keys (box boundary)
    seen = set()
    lines = []
    order = sorted(adj)
    starts = [k for k in order if len(adj[k]) == 1] + order
    for s in starts:
        if s in seen:
            continue
        chain = [s]
        seen.add(s)
        prev, cur = None, s
        while True:
            nxt = [q for q in adj[cur] if q != prev and q not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)
        closed = len(adj[s]) == 2 and s in adj[chain[-1]] and len(chain) > 2
        P = np.array([pts[k] for k in chain])
        if len(P) >= 2:
            lines.append(Polyline(P, closed=closed))
    return lines


def extract_zero_set(fld, level: float = 0.0, tol: Optional[float] = None) -> ZeroSet:
    values = fld.values if isinstance(fld, ValueField) else np.asarray(fld[0])
    grid = fld.grid if isinstance(fld, ValueField) else fld[1]
    tol = 2 * grid.h if tol is None else tol
    return ZeroSet(
        contours=marching_squares(values, grid, level),
        upper=marching_squares(values, grid, level + tol),
        lower=marching_squares(values, grid, level - tol),
        positive=values > level + tol,
        nonnegative=values >= level - tol,
        tol=tol,
        grid=grid,
    )


def contour_radius(zs: ZeroSet, center=(0.0, 0.0)):
    """(mean, min, max) distance of contour vertices from ``center``."""
    P = zs.points()
    if len(P) == 0:
        return (0.0, 0.0, 0.0)
    r = np.linalg.norm(P - np.asarray(center), axis=1)
    return float(r.mean()), float(r.min()), float(r.max())


def shape_distance(zs: ZeroSet, target: np.ndarray, spacing: Optional[float] = None) -> float:
    """Hausdorff distance from the densified zero set to target boundary samples."""
    if zs.empty:
        return math.inf if len(target) else 0.0
    spacing = spacing or zs.grid.h
    P = np.vstack([p.densify(spacing) for p in zs.contours])
    return hausdorff(P, target)


# ---------------------------------------------------------------------------
# long runs and refinement studies


@dataclass
class AsymptoticReport:
    times: list
    distances: list
    tolerance: float
    first_hit: Optional[float]
    maintained: bool
    final_field: Optional[ValueField] = None
    extinct: bool = False

    @property
    def converged(self) -> bool:
        return self.first_hit is not None and self.maintained

    @property
    def stick_time(self):
        return self.first_hit if self.converged else None

    def lines(self):
        out = [f"{t:.4f} {d:.5f}" for t, d in zip(self.times, self.distances)]
        tail = "none" if self.stick_time is None else f"{self.stick_time:.4f}"
        out.append(f"tolerance {self.tolerance:.5f} first_hit {self.first_hit} maintained {self.maintained} stick_time {tail}")
        return out


def asymptotic_run(config: GameConfig, target: Optional[np.ndarray], checkpoints: Sequence[float],
                   params: SolverParams = SolverParams(), grid: Optional[Grid] = None,
                   tolerance: Optional[float] = None) -> AsymptoticReport:
    """Track Hausdorff(zero set, target boundary) over checkpoints.

    ``target`` is a sample of the target boundary; ``None`` or an empty
    array means the expected outcome is extinction (empty zero set).
    """
    grid = grid or default_grid(config, params)
    tol = tolerance if tolerance is not None else 3 * grid.h + 3 * config.epsilon
    target = np.empty((0, 2)) if target is None else np.asarray(target, float)
    dists = []
    times = []

    def measure(fld):
        zs = extract_zero_set(fld)
        if len(target) == 0:
            d = 0.0 if zs.empty else math.inf
        else:
            d = shape_distance(zs, target)
        dists.append(d)
        times.append(fld.time)
        log.info("checkpoint t=%.4f distance=%.5f", fld.time, d)

    marks = sorted(set(checkpoints) | {config.horizon_t})
    final = solve(config, params, grid, checkpoints=marks, callback=measure)
    hit = next((k for k, d in enumerate(dists) if d <= tol), None)
    maintained = hit is not None and all(d <= tol for d in dists[hit:])
    return AsymptoticReport(times, dists, tol, None if hit is None else times[hit], maintained,
                            final, extract_zero_set(final).empty)


@dataclass
class StudyTable:
    eps: list
    values: np.ndarray           # (n_eps, n_probes)
    reference: Optional[np.ndarray]
    successive: np.ndarray       # max_probe |u_k - u_{k+1}|
    errors: Optional[np.ndarray]  # max_probe |u_k - reference|

    @property
    def decreasing(self) -> bool:
        e = self.errors if self.errors is not None else self.successive
        return bool(np.all(np.diff(e) < 0))

    def lines(self):
        out = []
        for k, e in enumerate(self.eps):
            row = " ".join(f"{v:.6f}" for v in self.values[k])
            err = "" if self.errors is None else f" err {self.errors[k]:.6f}"
            out.append(f"eps {e:.5f} {row}{err}")
        out.append(f"decreasing {self.decreasing}")
        return out


def refine_study(make_config, eps_list: Sequence[float], probes, params: SolverParams = SolverParams(),
                 reference=None, make_grid=None) -> StudyTable:
    """u^eps at probe points for a strictly decreasing eps ladder.

    ``make_config(eps)`` builds the game; ``reference`` is either an array of
    per-probe values or a callable ``(eps, probes) -> values``.
    """
    eps_list = list(eps_list)
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing with at least 3 entries")
    probes = np.atleast_2d(np.asarray(probes, float))
    vals = []
    refs = []
    for e in eps_list:
        cfg = make_config(e)
        g = make_grid(cfg) if make_grid is not None else None
        fld = solve(cfg, params, g)
        vals.append(fld.at(probes))
        if reference is not None:
            refs.append(reference(e, probes) if callable(reference) else np.asarray(reference, float))
    vals = np.array(vals)
    succ = np.abs(np.diff(vals, axis=0)).max(axis=1)
    errs = None
    ref = None
    if reference is not None:
        ref = np.array(refs)
        errs = np.abs(vals - ref).max(axis=1)
    return StudyTable(eps_list, vals, ref, succ, errs)
