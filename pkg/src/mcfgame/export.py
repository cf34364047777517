"""Plain-text and image exports: CSV tables, 16-bit PGM heatmaps, SVG paths.

Floats are written with ``%.17g`` so a file round-trips to the same doubles
and two runs that agree bitwise produce identical bytes.
"""
from __future__ import annotations

import csv
from typing import Iterable, Optional, Sequence

import numpy as np

FLOAT = "%.17g"


def _fmt(v) -> str:
    return FLOAT % float(v)


def write_trajectory_csv(path, outcome):
    """Columns: round, x1..xd, running_cost."""
    traj = np.atleast_2d(outcome.trajectory)
    d = traj.shape[1]
    run = outcome.running_cost
    if run is None:
        run = np.zeros(len(traj))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round"] + [f"x{j + 1}" for j in range(d)] + ["running_cost"])
        for k, (x, r) in enumerate(zip(traj, run)):
            w.writerow([k] + [_fmt(c) for c in x] + [_fmt(r)])


def read_trajectory_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1:-1]


def write_field_csv(path, fld):
    """Columns: x, y, u; nodes in row-major (x index outer) order."""
    g = fld.grid
    P = g.nodes()
    u = np.asarray(fld.values, float).ravel()
    with open(path, "w", newline="") as fh:
        fh.write("x,y,u\n")
        for (x, y), v in zip(P, u):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}\n")


def write_pgm(path, values: np.ndarray, vmin: Optional[float] = None, vmax: Optional[float] = None):
    """Binary 16-bit PGM; first array axis is x (left to right), y points up."""
    v = np.asarray(values, float)
    lo = float(np.nanmin(v)) if vmin is None else vmin
    hi = float(np.nanmax(v)) if vmax is None else vmax
    span = hi - lo if hi > lo else 1.0
    img = np.clip((v - lo) / span, 0.0, 1.0)
    img = np.round(img * 65535).astype(">u2")
    img = img.T[::-1]  # rows top to bottom = y descending
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n65535\n".encode())
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, mx = int(parts[1]), int(parts[2]), int(parts[3])
    dt = ">u2" if mx > 255 else "u1"
    return np.frombuffer(parts[4], dtype=dt, count=w * h).reshape(h, w)


def svg_path(points: np.ndarray, closed: bool = False) -> str:
    P = np.atleast_2d(points)
    if len(P) == 0:
        return ""
    s = "M " + " L ".join(f"{x:.6f} {-y:.6f}" for x, y in P[:, :2])
    return s + (" Z" if closed else "")


def write_svg(path, paths: Iterable, box: Optional[Sequence[float]] = None, stroke_width: float = 0.005):
    """Write polylines to SVG. ``paths`` holds arrays or (array, closed, colour) tuples.

    Polyline-like objects (anything with ``.points``) are accepted as arrays.
    ``box`` is (xmin, xmax, ymin, ymax); by default the data extent.
    """
    def arr(q):
        return np.atleast_2d(np.asarray(getattr(q, "points", q), float))

    items = []
    for p in paths:
        if isinstance(p, tuple):
            pts, closed = arr(p[0]), bool(p[1])
            colour = p[2] if len(p) > 2 else "black"
        else:
            pts, closed, colour = arr(p), False, "black"
        if pts.size:
            items.append((pts, closed, colour))
    if box is None:
        if items:
            allp = np.vstack([i[0][:, :2] for i in items])
            box = (allp[:, 0].min(), allp[:, 0].max(), allp[:, 1].min(), allp[:, 1].max())
        else:
            box = (-1.0, 1.0, -1.0, 1.0)
    xmin, xmax, ymin, ymax = box
    pad = 0.02 * max(xmax - xmin, ymax - ymin, 1e-9)
    vb = f"{xmin - pad:.6f} {-ymax - pad:.6f} {xmax - xmin + 2 * pad:.6f} {ymax - ymin + 2 * pad:.6f}"
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}">\n')
        for pts, closed, colour in items:
            fh.write(f'  <path d="{svg_path(pts, closed)}" fill="none" stroke="{colour}" '
                     f'stroke-width="{stroke_width}"/>\n')
        fh.write("</svg>\n")


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]):
    """Generic CSV table; floats via ``%.17g``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
