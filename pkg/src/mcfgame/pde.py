"""Explicit finite differences for the obstacle level-set equation

    u_t = nu |Du| + tr((I - p p^T / |p|^2) D^2 u) + f,   psi_minus <= u <= psi_plus.

Curvature term by central differences with |p|^2 regularised by sigma^2, the
drift term by Godunov upwinding, obstacles by projection after each step.
Boundary nodes of the box either stay at their initial values (bounded far
field) or are extrapolated linearly from the interior (signed distances,
which are close to affine far from the front).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .dpp import Grid, SolverParams, ValueField, default_grid, far_field, lifted_ok
from .game import GameConfig


@dataclass(frozen=True)
class PdeParams:
    grid: Grid
    dt: Optional[float] = None
    sigma: Optional[float] = None
    nu: float = 0.0
    f: Optional[object] = None

    @property
    def cfl_bound(self) -> float:
        h = self.grid.h
        return h * h / 4.0 / (1.0 + abs(self.nu) * h)

    @property
    def step(self) -> float:
        return self.cfl_bound if self.dt is None else self.dt

    @property
    def regulariser(self) -> float:
        s = 1e-6 * self.grid.h if self.sigma is None else self.sigma
        if not s > 0:
            raise ValueError("sigma must be positive")
        return s

    def check(self):
        if self.step > self.cfl_bound * (1 + 1e-12):
            raise ValueError(f"time step {self.step:.3g} violates the stability bound {self.cfl_bound:.3g}")


@njit(cache=True)
def _fd_kernel(u, out, dt, h, sigma2, nu, fvals, lo, hi, extrapolate):
    nx, ny = u.shape
    inv2h = 0.5 / h
    invh = 1.0 / h
    invh2 = 1.0 / (h * h)
    for i in range(nx):
        for j in range(ny):
            if i == 0 or j == 0 or i == nx - 1 or j == ny - 1:
                out[i, j] = min(max(u[i, j], lo[i, j]), hi[i, j])
                continue
            c = u[i, j]
            ux = (u[i + 1, j] - u[i - 1, j]) * inv2h
            uy = (u[i, j + 1] - u[i, j - 1]) * inv2h
            uxx = (u[i + 1, j] - 2.0 * c + u[i - 1, j]) * invh2
            uyy = (u[i, j + 1] - 2.0 * c + u[i, j - 1]) * invh2
            uxy = (u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]) * 0.25 * invh2
            p2 = ux * ux + uy * uy
            if p2 <= sigma2:
                # no direction to project out: the mean of the Hessian
                # eigenvalues, e.g. at the apex of a cone
                curv = 0.5 * (uxx + uyy)
            else:
                curv = (uxx * uy * uy - 2.0 * uxy * ux * uy + uyy * ux * ux) / (p2 + sigma2)
            drift = 0.0
            if nu != 0.0:
                # Godunov |Du| for u_t = nu |Du|; with nu > 0 a local maximum
                # must not rise (the exact flow takes a max over a ball)
                dxm = (c - u[i - 1, j]) * invh
                dxp = (u[i + 1, j] - c) * invh
                dym = (c - u[i, j - 1]) * invh
                dyp = (u[i, j + 1] - c) * invh
                if nu > 0:
                    ax = max(min(dxm, 0.0) ** 2, max(dxp, 0.0) ** 2)
                    ay = max(min(dym, 0.0) ** 2, max(dyp, 0.0) ** 2)
                else:
                    ax = max(max(dxm, 0.0) ** 2, min(dxp, 0.0) ** 2)
                    ay = max(max(dym, 0.0) ** 2, min(dyp, 0.0) ** 2)
                drift = nu * math.sqrt(ax + ay)
            v = c + dt * (curv + drift + fvals[i, j])
            if v > hi[i, j]:
                v = hi[i, j]
            if v < lo[i, j]:
                v = lo[i, j]
            out[i, j] = v
    if extrapolate:
        for j in range(1, ny - 1):
            out[0, j] = 2.0 * out[1, j] - out[2, j]
            out[nx - 1, j] = 2.0 * out[nx - 2, j] - out[nx - 3, j]
        for i in range(nx):
            out[i, 0] = 2.0 * out[i, 1] - out[i, 2]
            out[i, ny - 1] = 2.0 * out[i, ny - 2] - out[i, ny - 3]
        for i in range(nx):
            for j in (0, ny - 1):
                out[i, j] = min(max(out[i, j], lo[i, j]), hi[i, j])
        for j in range(1, ny - 1):
            for i in (0, nx - 1):
                out[i, j] = min(max(out[i, j], lo[i, j]), hi[i, j])


def project(u, lo=None, hi=None):
    """Obstacle projection max(lo, min(hi, u))."""
    if hi is not None:
        u = np.minimum(hi, u)
    if lo is not None:
        u = np.maximum(lo, u)
    return u


def fd_step(u: np.ndarray, params: PdeParams, lo=None, hi=None, fvals=None,
            extrapolate: bool = False) -> np.ndarray:
    params.check()
    u = np.ascontiguousarray(u, dtype=float)
    shape = u.shape
    lo = np.full(shape, -np.inf) if lo is None else np.ascontiguousarray(lo, float)
    hi = np.full(shape, np.inf) if hi is None else np.ascontiguousarray(hi, float)
    if fvals is None:
        if params.f is None:
            fvals = np.zeros(shape)
        elif callable(params.f):
            fvals = params.grid.sample(params.f)
        else:
            fvals = np.full(shape, float(params.f))
    out = np.empty_like(u)
    _fd_kernel(u, out, params.step, params.grid.h, params.regulariser ** 2, float(params.nu),
               np.ascontiguousarray(fvals, float), lo, hi, bool(extrapolate))
    return out


def reference_grid(config: GameConfig, h: float, extent: Optional[float] = None) -> Grid:
    return default_grid(config, SolverParams(h=h, margin=4 * h), extent)


def solve_reference(config: GameConfig, t: float, h: float = 0.01, grid: Optional[Grid] = None,
                    checkpoints: Sequence[float] = (), lifted: Optional[bool] = None,
                    dt: Optional[float] = None, sigma: Optional[float] = None) -> ValueField:
    """Field at time t; intermediate fields at ``checkpoints`` in ``.history``.

    With f = 0 and Region data the run uses unclamped signed distances and
    clamps at the far-field value afterwards, as the game solver does; the
    equation is invariant under monotone relabelling so both agree.
    """
    grid = grid or reference_grid(config, h)
    a = far_field(config)
    if lifted is None:
        lifted = lifted_ok(config)
    nodes = grid.nodes()

    def get(name, default):
        src = config.source(name)
        if src is None:
            return np.full(grid.shape, default)
        if lifted:
            return np.asarray(src.sdf(nodes), float).reshape(grid.shape)
        return np.asarray(getattr(config, name)(nodes), float).reshape(grid.shape)

    u = get("u0", 0.0)
    lo = np.ascontiguousarray(get("psi_minus", -np.inf))
    hi = np.ascontiguousarray(get("psi_plus", np.inf))
    u = project(u, lo, hi)
    fvals = config.running(nodes).reshape(grid.shape)
    params = PdeParams(grid, dt, sigma, config.nu, None)
    params.check()
    base = params.step
    nsteps = max(1, int(math.ceil(t / base - 1e-9)))
    step = t / nsteps
    params = PdeParams(grid, step, sigma, config.nu, None)
    marks = {max(1, int(round(tc / step))): tc for tc in checkpoints if 0 < tc <= t}
    history = []
    out = np.empty_like(u)
    sig2 = params.regulariser ** 2

    def emit(k, tt):
        vals = np.maximum(a, u) if lifted else u.copy()
        return ValueField(grid, vals, k, config, a, u.copy() if lifted else None, tt)

    for k in range(1, nsteps + 1):
        _fd_kernel(u, out, step, grid.h, sig2, float(config.nu), fvals, lo, hi, lifted)
        u, out = out, u
        if k in marks:
            history.append(emit(k, marks[k]))
    fld = emit(nsteps, t)
    fld.history = history
    return fld


@dataclass
class CrossReport:
    norm: str
    value: float
    nodes: int

    def __float__(self):
        return self.value


def cross_validate(dpp_field: ValueField, pde_field: ValueField, norm: str = "sup", mask=None) -> CrossReport:
    """Discrepancy of two fields on the same grid, optionally on a node mask."""
    if not dpp_field.grid.same_as(pde_field.grid):
        raise ValueError("grid mismatch")
    d = np.abs(dpp_field.values - pde_field.values)
    if mask is not None:
        d = d[np.asarray(mask, bool)]
    if d.size == 0:
        return CrossReport(norm, 0.0, 0)
    if norm == "sup":
        v = float(d.max())
    elif norm == "mean":
        v = float(d.mean())
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return CrossReport(norm, v, int(d.size))


def front_band(field: ValueField, width: float) -> np.ndarray:
    """Nodes with |u| <= width: the neighbourhood of the zero level."""
    return np.abs(field.values) <= width


def trend(fields_dpp: Sequence[ValueField], fields_pde: Sequence[ValueField], norm="sup", band=None):
    """Per-eps discrepancies; each PDE field is resampled onto its DPP grid."""
    gaps = []
    for fd, fp in zip(fields_dpp, fields_pde):
        fr = fp.resample(fd.grid) if not fp.grid.same_as(fd.grid) else fp
        mask = None if band is None else front_band(fr, band)
        gaps.append(cross_validate(fd, fr, norm, mask).value)
    gaps = np.array(gaps)
    return gaps, bool(np.all(np.diff(gaps) < 0))
