"""Compiled inner loops for the grid value iteration.

Every node update reads only the previous level, so a sweep over any row
block is independent of every other block and the output does not depend
on how rows are split among workers.
"""
import math

import numpy as np
from numba import njit

_GOLD = 0.5 * (math.sqrt(5.0) - 1.0)


@njit(cache=True, nogil=True, inline="always")
def _interp(u, x, y, x0, y0, inv_h, nx, ny, far):
    fx = (x - x0) * inv_h
    fy = (y - y0) * inv_h
    if fx < 0.0 or fy < 0.0 or fx > nx - 1 or fy > ny - 1:
        return far
    i = int(fx)
    j = int(fy)
    if i > nx - 2:
        i = nx - 2
    if j > ny - 2:
        j = ny - 2
    tx = fx - i
    ty = fy - j
    a = u[i, j] + ty * (u[i, j + 1] - u[i, j])
    b = u[i + 1, j] + ty * (u[i + 1, j + 1] - u[i + 1, j])
    return a + tx * (b - a)


@njit(cache=True, nogil=True, inline="always")
def _pair_min(u, x, y, dx, dy, x0, y0, inv_h, nx, ny, far):
    p = _interp(u, x + dx, y + dy, x0, y0, inv_h, nx, ny, far)
    q = _interp(u, x - dx, y - dy, x0, y0, inv_h, nx, ny, far)
    return p if p < q else q


@njit(cache=True, nogil=True)
def sweep_rows(u, out, psi_lo, psi_hi, fterm, active, i0, i1, x0, y0, h, far,
               step, drift, angles, refine_iters, uniform_w, use_grad_w, carol_w, grad_seed):
    """One backward level for rows i0..i1-1 of the node array.

    ``angles`` holds the line directions in [0, pi); v and -v give the same
    min over b, so only half the circle is searched. With ``refine_iters``
    > 0 a golden-section search over nearby directions runs around the best line and
    its result is kept only if it beats the discrete sup. ``grad_seed`` adds
    the line tangent to the previous level set as one more candidate; near
    the far-field plateau the useful directions form a cone narrower than
    the line spacing and the uniform set alone misses it.
    """
    nx, ny = u.shape
    inv_h = 1.0 / h
    nl = angles.shape[0]
    cs = np.cos(angles)
    sn = np.sin(angles)
    nu_ = uniform_w.shape[0]
    nw = 0
    if drift != 0.0:
        nw = nu_ + (1 if use_grad_w else 0)
    wx = np.zeros(max(nw, 1))
    wy = np.zeros(max(nw, 1))
    for k in range(nu_):
        wx[k] = math.cos(uniform_w[k])
        wy[k] = math.sin(uniform_w[k])
    tspan = math.tan(math.pi / nl)
    for i in range(i0, i1):
        x = x0 + i * h
        for j in range(ny):
            lo = psi_lo[i, j]
            hi = psi_hi[i, j]
            if not active[i, j]:
                v = u[i, j] + fterm[i, j]
            else:
                y = y0 + j * h
                g = 0.0
                gx = 1.0
                gy = 0.0
                if nw > nu_ or grad_seed:
                    # discrete gradient of the previous level
                    ip = i + 1 if i + 1 < nx else i
                    im = i - 1 if i > 0 else i
                    jp = j + 1 if j + 1 < ny else j
                    jm = j - 1 if j > 0 else j
                    gx = (u[ip, j] - u[im, j]) / ((ip - im) * h)
                    gy = (u[i, jp] - u[i, jm]) / ((jp - jm) * h)
                    g = math.sqrt(gx * gx + gy * gy)
                    if g > 0.0:
                        gx /= g
                        gy /= g
                    else:
                        gx = 1.0
                        gy = 0.0
                if nw > nu_:
                    if carol_w:
                        gx = -gx
                        gy = -gy
                    wx[nu_] = gx
                    wy[nu_] = gy
                best = -1e300
                kb = 0
                for k in range(nl):
                    dx = step * cs[k]
                    dy = step * sn[k]
                    if nw == 0:
                        m = _pair_min(u, x, y, dx, dy, x0, y0, inv_h, nx, ny, far)
                    else:
                        m = _pair_min(u, x + drift * wx[0], y + drift * wy[0], dx, dy,
                                      x0, y0, inv_h, nx, ny, far)
                        for q in range(1, nw):
                            mq = _pair_min(u, x + drift * wx[q], y + drift * wy[q], dx, dy,
                                           x0, y0, inv_h, nx, ny, far)
                            if (mq < m) if carol_w else (mq > m):
                                m = mq
                    if m > best:
                        best = m
                        kb = k
                bc = cs[kb]
                bs = sn[kb]
                if grad_seed:
                    # seed 0: central differences; seed 1: steeper one-sided
                    # differences, which read the slope off the unclamped side
                    # of a kink such as the far-field plateau rim
                    ip = i + 1 if i + 1 < nx else i
                    im = i - 1 if i > 0 else i
                    jp = j + 1 if j + 1 < ny else j
                    jm = j - 1 if j > 0 else j
                    ax = u[ip, j] - u[i, j]
                    bx_ = u[i, j] - u[im, j]
                    ay = u[i, jp] - u[i, j]
                    by_ = u[i, j] - u[i, jm]
                    sx = ax if abs(ax) >= abs(bx_) else bx_
                    sy = ay if abs(ay) >= abs(by_) else by_
                    sg = math.sqrt(sx * sx + sy * sy)
                    for seed in range(2):
                        if seed == 0:
                            if g == 0.0:
                                continue
                            ex_ = gx
                            ey_ = gy
                        else:
                            if sg == 0.0:
                                continue
                            ex_ = sx / sg
                            ey_ = sy / sg
                        dx = -step * ey_
                        dy = step * ex_
                        if nw == 0:
                            m = _pair_min(u, x, y, dx, dy, x0, y0, inv_h, nx, ny, far)
                        else:
                            m = _pair_min(u, x + drift * wx[0], y + drift * wy[0], dx, dy,
                                          x0, y0, inv_h, nx, ny, far)
                            for q in range(1, nw):
                                mq = _pair_min(u, x + drift * wx[q], y + drift * wy[q], dx, dy,
                                               x0, y0, inv_h, nx, ny, far)
                                if (mq < m) if carol_w else (mq > m):
                                    m = mq
                        if m > best:
                            best = m
                            bc = -ey_
                            bs = ex_
                if refine_iters > 0:
                    # search over v = (e + t e_perp)/|.| with |t| <= tan(spacing)
                    a = -tspan
                    b = tspan
                    c1 = b - _GOLD * (b - a)
                    c2 = a + _GOLD * (b - a)
                    f1 = 0.0
                    f2 = 0.0
                    for it in range(refine_iters + 2):
                        if it == 0:
                            th = c1
                        elif it == 1:
                            th = c2
                        elif f1 >= f2:
                            b = c2
                            c2 = c1
                            f2 = f1
                            c1 = b - _GOLD * (b - a)
                            th = c1
                        else:
                            a = c1
                            c1 = c2
                            f1 = f2
                            c2 = a + _GOLD * (b - a)
                            th = c2
                        sc = step / math.sqrt(1.0 + th * th)
                        dx = sc * (bc - th * bs)
                        dy = sc * (bs + th * bc)
                        if nw == 0:
                            m = _pair_min(u, x, y, dx, dy, x0, y0, inv_h, nx, ny, far)
                        else:
                            m = _pair_min(u, x + drift * wx[0], y + drift * wy[0], dx, dy,
                                          x0, y0, inv_h, nx, ny, far)
                            for q in range(1, nw):
                                mq = _pair_min(u, x + drift * wx[q], y + drift * wy[q], dx, dy,
                                               x0, y0, inv_h, nx, ny, far)
                                if (mq < m) if carol_w else (mq > m):
                                    m = mq
                        if m > best:
                            best = m
                        if th == c1:
                            f1 = m
                        else:
                            f2 = m
                v = best + fterm[i, j]
            if v > hi:
                v = hi
            if v < lo:
                v = lo
            out[i, j] = v


@njit(cache=True, nogil=True)
def pair_table(u, x, y, x0, y0, h, far, step, drift, angles, wangles):
    """min over b for every (v, w) pair at one point (rows: v, cols: w)."""
    nx, ny = u.shape
    inv_h = 1.0 / h
    nq = max(wangles.shape[0], 1)
    res = np.empty((angles.shape[0], nq))
    for k in range(angles.shape[0]):
        dx = step * math.cos(angles[k])
        dy = step * math.sin(angles[k])
        for q in range(nq):
            bx = x
            by = y
            if wangles.shape[0] > 0:
                bx += drift * math.cos(wangles[q])
                by += drift * math.sin(wangles[q])
            res[k, q] = _pair_min(u, bx, by, dx, dy, x0, y0, inv_h, nx, ny, far)
    return res


@njit(cache=True, nogil=True)
def bilinear(u, pts, x0, y0, h, far):
    nx, ny = u.shape
    inv_h = 1.0 / h
    out = np.empty(pts.shape[0])
    for k in range(pts.shape[0]):
        out[k] = _interp(u, pts[k, 0], pts[k, 1], x0, y0, inv_h, nx, ny, far)
    return out
