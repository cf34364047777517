"""Planar implicit regions, hulls, obstacle graphs and polyline utilities.

Every region carries a signed distance ``sdf`` (positive inside, zero on the
boundary) and a far-field value ``a < 0``; the clamped profile
``max(a, sdf)`` is the cost function used for initial data and obstacles.
For primitives ``sdf`` is the exact signed distance; for boolean composites
it is the usual min/max combination, which is exact outside and a lower
bound on the distance inside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

DEFAULT_BOUNDARY_SAMPLES = 1024
DEFAULT_SEGMENT_SAMPLES = 64


def _pts(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    return x


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    L2 = float(ab @ ab)
    if L2 == 0.0:
        return np.hypot(p[:, 0] - a[0], p[:, 1] - a[1])
    t = np.clip(((p - a) @ ab) / L2, 0.0, 1.0)
    q = a + t[:, None] * ab
    return np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])


class Region:
    """Base class; subclasses implement ``sdf``, ``boundary_samples`` and ``bbox``."""

    a: float = -1.0

    def sdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def profile(self, x) -> np.ndarray:
        return np.maximum(self.a, self.sdf(x))

    def contains(self, x) -> np.ndarray:
        return self.sdf(x) > 0.0

    def bbox(self):
        """(xmin, ymin, xmax, ymax) or None when unbounded."""
        return None

    @property
    def bounded(self) -> bool:
        return self.bbox() is not None

    def boundary_samples(self, n: int = DEFAULT_BOUNDARY_SAMPLES) -> np.ndarray:
        raise NotImplementedError

    def with_far_field(self, a: float) -> "Region":
        from dataclasses import replace
        return replace(self, a=float(a))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_a(self):
        if not self.a < 0:
            raise ValueError(f"far-field value must be negative, got {self.a}")


@dataclass(frozen=True)
class Disc(Region):
    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    a: float = -1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0:
            raise ValueError("disc radius must be positive")
        self._check_a()

    def sdf(self, x):
        x = _pts(x)
        return self.radius - np.hypot(x[:, 0] - self.center[0], x[:, 1] - self.center[1])

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([self.center[0] + self.radius * np.cos(th),
                                self.center[1] + self.radius * np.sin(th)])

    def to_dict(self):
        return {"kind": "disc", "center": list(self.center), "radius": self.radius, "a": self.a}


@dataclass(frozen=True)
class HalfPlane(Region):
    """{x : <n, x> < offset} with n normalised."""

    normal: tuple = (1.0, 0.0)
    offset: float = 0.0
    a: float = -1.0

    def __post_init__(self):
        n = np.asarray(self.normal, float)
        L = float(np.hypot(*n))
        if L == 0:
            raise ValueError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", tuple(float(c) for c in n / L))
        object.__setattr__(self, "offset", float(self.offset) / L)
        self._check_a()

    def sdf(self, x):
        x = _pts(x)
        return self.offset - x @ np.asarray(self.normal)

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        raise ValueError("region is unbounded")

    def to_dict(self):
        return {"kind": "half-plane", "normal": list(self.normal), "offset": self.offset, "a": self.a}


@dataclass(frozen=True)
class Polygon(Region):
    """Simple polygon given by its vertices (either orientation)."""

    vertices: tuple = ()
    a: float = -1.0

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise ValueError("polygon needs at least 3 planar vertices")
        object.__setattr__(self, "vertices", tuple(tuple(map(float, p)) for p in v))
        self._check_a()

    @property
    def _v(self):
        return np.asarray(self.vertices)

    def sdf(self, x):
        x = _pts(x)
        v = self._v
        m = len(v)
        d = np.full(len(x), np.inf)
        inside = np.zeros(len(x), bool)
        for k in range(m):
            p, q = v[k], v[(k + 1) % m]
            d = np.minimum(d, _segment_distance(x, p, q))
            # even-odd crossing test
            cond = (p[1] > x[:, 1]) != (q[1] > x[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = p[0] + (x[:, 1] - p[1]) * (q[0] - p[0]) / (q[1] - p[1])
            inside ^= cond & (x[:, 0] < xc)
        return np.where(inside, d, -d)

    def bbox(self):
        v = self._v
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        v = self._v
        closed = np.vstack([v, v[:1]])
        seg = np.hypot(*np.diff(closed, axis=0).T)
        s = np.concatenate([[0], np.cumsum(seg)])
        t = np.linspace(0, s[-1], n, endpoint=False)
        t = np.union1d(t, s[:-1])
        x = np.interp(t, s, closed[:, 0])
        y = np.interp(t, s, closed[:, 1])
        return np.column_stack([x, y])

    def to_dict(self):
        return {"kind": "polygon", "vertices": [list(p) for p in self.vertices], "a": self.a}


def square(center=(0.0, 0.0), side=1.0, a=-1.0) -> Polygon:
    cx, cy = center
    s = side / 2
    return Polygon(((cx - s, cy - s), (cx + s, cy - s), (cx + s, cy + s), (cx - s, cy + s)), a=a)


def diamond(R: float, center=(0.0, 0.0), a=-1.0) -> Polygon:
    """The open set {|p| + |q| < R}."""
    cx, cy = center
    return Polygon(((cx + R, cy), (cx, cy + R), (cx - R, cy), (cx, cy - R)), a=a)


@dataclass(frozen=True)
class PacMan(Region):
    """Disc of ``radius`` with the upward wedge {angle to +y <= half_angle} removed.

    With the default quarter-pi half angle the removed set is {q >= |p|}.
    """

    radius: float = 0.8
    center: tuple = (0.0, 0.0)
    half_angle: float = math.pi / 4
    a: float = -1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0 or not (0 < self.half_angle < math.pi):
            raise ValueError("bad pac-man parameters")
        self._check_a()

    def _corners(self):
        c = np.asarray(self.center)
        r = self.radius
        a1 = math.pi / 2 - self.half_angle
        a2 = math.pi / 2 + self.half_angle
        return c + r * np.array([math.cos(a1), math.sin(a1)]), c + r * np.array([math.cos(a2), math.sin(a2)])

    def _in_wedge(self, rel):
        ang = np.arctan2(rel[:, 0], rel[:, 1])  # angle measured from +y
        return np.abs(ang) <= self.half_angle

    def sdf(self, x):
        x = _pts(x)
        c = np.asarray(self.center)
        rel = x - c
        r = np.hypot(rel[:, 0], rel[:, 1])
        wedge = self._in_wedge(rel) & (r > 0)
        k1, k2 = self._corners()
        d_arc = np.where(wedge, np.minimum(np.hypot(*(x - k1).T), np.hypot(*(x - k2).T)),
                         np.abs(r - self.radius))
        d = np.minimum(d_arc, np.minimum(_segment_distance(x, c, k1), _segment_distance(x, c, k2)))
        inside = (r < self.radius) & ~wedge & (r > 0)
        return np.where(inside, d, -d)

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        r = self.radius
        arc_len = r * (2 * math.pi - 2 * self.half_angle)
        total = arc_len + 2 * r
        n_arc = max(int(round(n * arc_len / total)), 4)
        n_seg = max((n - n_arc) // 2, 2)
        a2 = math.pi / 2 + self.half_angle
        th = a2 + (2 * math.pi - 2 * self.half_angle) * np.arange(n_arc + 1) / n_arc
        c = np.asarray(self.center)
        arc = c + r * np.column_stack([np.cos(th), np.sin(th)])
        k1, k2 = self._corners()
        t = np.arange(n_seg) / n_seg
        s1 = k1 + t[:, None] * (c - k1)
        s2 = c + t[:, None] * (k2 - c)
        return np.vstack([arc[:-1], s1, s2])

    def to_dict(self):
        return {"kind": "pacman", "radius": self.radius, "center": list(self.center),
                "half_angle": self.half_angle, "a": self.a}


def _filter_boundary(region: Region, pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return pts
    scale = max(1.0, float(np.abs(pts).max()))
    return pts[np.abs(region.sdf(pts)) <= 1e-9 * scale]


def _union_bbox(boxes):
    boxes = [b for b in boxes]
    if any(b is None for b in boxes):
        return None
    b = np.array(boxes)
    return (b[:, 0].min(), b[:, 1].min(), b[:, 2].max(), b[:, 3].max())


@dataclass(frozen=True)
class Union(Region):
    parts: tuple = ()
    a: float = -1.0

    def __post_init__(self):
        if len(self.parts) == 0:
            raise ValueError("union of nothing")
        object.__setattr__(self, "parts", tuple(self.parts))
        self._check_a()

    def sdf(self, x):
        return np.max([p.sdf(x) for p in self.parts], axis=0)

    def bbox(self):
        return _union_bbox(p.bbox() for p in self.parts)

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        k = max(n // len(self.parts), 8)
        return _filter_boundary(self, np.vstack([p.boundary_samples(k) for p in self.parts]))

    def to_dict(self):
        return {"kind": "union", "parts": [p.to_dict() for p in self.parts], "a": self.a}


@dataclass(frozen=True)
class Intersection(Region):
    parts: tuple = ()
    a: float = -1.0

    def __post_init__(self):
        if len(self.parts) == 0:
            raise ValueError("intersection of nothing")
        object.__setattr__(self, "parts", tuple(self.parts))
        self._check_a()

    def sdf(self, x):
        return np.min([p.sdf(x) for p in self.parts], axis=0)

    def bbox(self):
        boxes = [p.bbox() for p in self.parts if p.bbox() is not None]
        if not boxes:
            return None
        b = np.array(boxes)
        return (b[:, 0].max(), b[:, 1].max(), b[:, 2].min(), b[:, 3].min())

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        k = max(n // len(self.parts), 8)
        pts = [p.boundary_samples(k) for p in self.parts if p.bounded or isinstance(p, Complement)]
        return _filter_boundary(self, np.vstack(pts)) if pts else np.empty((0, 2))

    def to_dict(self):
        return {"kind": "intersection", "parts": [p.to_dict() for p in self.parts], "a": self.a}


@dataclass(frozen=True)
class Difference(Region):
    """base minus cut."""

    base: Region = None
    cut: Region = None
    a: float = -1.0

    def __post_init__(self):
        self._check_a()

    def sdf(self, x):
        return np.minimum(self.base.sdf(x), -self.cut.sdf(x))

    def bbox(self):
        return self.base.bbox()

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        pts = [self.base.boundary_samples(n // 2)]
        try:
            pts.append(self.cut.boundary_samples(n // 2))
        except ValueError:
            pass
        return _filter_boundary(self, np.vstack(pts))

    def to_dict(self):
        return {"kind": "difference", "base": self.base.to_dict(), "cut": self.cut.to_dict(), "a": self.a}


@dataclass(frozen=True)
class Complement(Region):
    base: Region = None
    a: float = -1.0

    def __post_init__(self):
        self._check_a()

    def sdf(self, x):
        return -self.base.sdf(x)

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        return self.base.boundary_samples(n)

    def to_dict(self):
        return {"kind": "complement", "base": self.base.to_dict(), "a": self.a}


def diamond_complement(R: float, a=-1.0) -> Complement:
    """The set R^2 minus the closed diamond {|p| + |q| <= R}."""
    return Complement(diamond(R, a=a), a=a)


@dataclass(frozen=True)
class Offset(Region):
    """{sdf_base > -delta}: dilation for delta > 0, erosion for delta < 0."""

    base: Region = None
    delta: float = 0.0
    a: float = -1.0

    def __post_init__(self):
        self._check_a()

    def sdf(self, x):
        return self.base.sdf(x) + self.delta

    def bbox(self):
        b = self.base.bbox()
        if b is None:
            return None
        d = max(self.delta, 0.0)
        return (b[0] - d, b[1] - d, b[2] + d, b[3] + d)

    def boundary_samples(self, n=DEFAULT_BOUNDARY_SAMPLES):
        p = self.base.boundary_samples(n)
        if len(p) == 0:
            return p
        # march along the numerical gradient until the shifted level is hit
        for _ in range(6):
            g = _grad(self.base, p)
            gn = np.maximum(np.hypot(g[:, 0], g[:, 1]), 1e-12)
            p = p - (self.sdf(p) / gn ** 2)[:, None] * g
        return _filter_boundary(self, p) if len(p) else p

    def to_dict(self):
        return {"kind": "offset", "base": self.base.to_dict(), "delta": self.delta, "a": self.a}


def _grad(region: Region, p: np.ndarray, step: float = 1e-6) -> np.ndarray:
    ex = np.array([step, 0.0])
    ey = np.array([0.0, step])
    gx = (region.sdf(p + ex) - region.sdf(p - ex)) / (2 * step)
    gy = (region.sdf(p + ey) - region.sdf(p - ey)) / (2 * step)
    return np.column_stack([gx, gy])


def signed_profile(region: Region, x) -> np.ndarray | float:
    """Clamped signed distance max(a, sdf); scalar in, scalar out."""
    val = region.profile(x)
    return float(val[0]) if np.ndim(x) == 1 else val


def offset_region(region: Region, delta: float) -> Offset:
    """Dilate (delta > 0) or erode (delta < 0) through the profile level."""
    if abs(delta) >= abs(region.a):
        raise ValueError("offset exceeds far-field clamp")
    return Offset(region, float(delta), a=region.a)


def region_from_dict(d: dict) -> Region:
    kind = d["kind"]
    a = float(d.get("a", -1.0))
    if kind == "disc":
        return Disc(tuple(d.get("center", (0, 0))), float(d["radius"]), a=a)
    if kind == "half-plane":
        return HalfPlane(tuple(d["normal"]), float(d["offset"]), a=a)
    if kind == "polygon":
        return Polygon(tuple(map(tuple, d["vertices"])), a=a)
    if kind == "square":
        return square(tuple(d.get("center", (0, 0))), float(d["side"]), a=a)
    if kind == "pacman":
        return PacMan(float(d["radius"]), tuple(d.get("center", (0, 0))),
                      float(d.get("half_angle", math.pi / 4)), a=a)
    if kind == "diamond":
        return diamond(float(d["R"]), tuple(d.get("center", (0, 0))), a=a)
    if kind == "diamond-complement":
        return diamond_complement(float(d["R"]), a=a)
    if kind == "union":
        return Union(tuple(region_from_dict(p) for p in d["parts"]), a=a)
    if kind == "intersection":
        return Intersection(tuple(region_from_dict(p) for p in d["parts"]), a=a)
    if kind == "difference":
        return Difference(region_from_dict(d["base"]), region_from_dict(d["cut"]), a=a)
    if kind == "complement":
        return Complement(region_from_dict(d["base"]), a=a)
    if kind == "offset":
        return Offset(region_from_dict(d["base"]), float(d["delta"]), a=a)
    raise ValueError(f"unknown region kind {kind!r}")


def interior_samples(region: Region, n: int = 256, seed: int = 0) -> np.ndarray:
    """Deterministic sample of interior points: a lattice plus pulled-in boundary points."""
    b = region.bbox()
    if b is None:
        raise ValueError("region is unbounded")
    k = max(int(math.sqrt(n)), 4)
    xs = np.linspace(b[0], b[2], k + 2)[1:-1]
    ys = np.linspace(b[1], b[3], k + 2)[1:-1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    lat = np.column_stack([X.ravel(), Y.ravel()])
    bd = region.boundary_samples(max(n, 16))
    if len(bd):
        g = _grad(region, bd)
        gn = np.maximum(np.hypot(g[:, 0], g[:, 1]), 1e-12)[:, None]
        size = max(b[2] - b[0], b[3] - b[1])
        bd = bd + 1e-3 * size * g / gn
    pts = np.vstack([lat, bd])
    return pts[region.sdf(pts) > 0]


# ---------------------------------------------------------------------------
# convex hulls with a filtered exact orientation predicate

_CCW_ERRBOUND = 3.3306690738754716e-16


def orient2d(a, b, c) -> float:
    """Sign-exact orientation of (a, b, c): >0 left turn, <0 right turn, 0 collinear."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    if abs(det) > _CCW_ERRBOUND * (abs(detleft) + abs(detright)):
        return det
    fa = [Fraction(float(v)) for v in a]
    fb = [Fraction(float(v)) for v in b]
    fc = [Fraction(float(v)) for v in c]
    ex = (fa[0] - fc[0]) * (fb[1] - fc[1]) - (fa[1] - fc[1]) * (fb[0] - fc[0])
    return float(ex > 0) - float(ex < 0)


@dataclass(frozen=True)
class HullPolygon:
    vertices: np.ndarray  # (k, 2), counterclockwise, no three collinear

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        """Closed-hull membership with an optional outward tolerance."""
        x = _pts(x)
        v = self.vertices
        k = len(v)
        if k == 1:
            return np.hypot(*(x - v[0]).T) <= tol
        if k == 2:
            return _segment_distance(x, v[0], v[1]) <= tol
        ok = np.ones(len(x), bool)
        for i in range(k):
            p, q = v[i], v[(i + 1) % k]
            e = q - p
            cross = e[0] * (x[:, 1] - p[1]) - e[1] * (x[:, 0] - p[0])
            ok &= cross >= -tol * np.hypot(*e)
        return ok

    def boundary_points(self, spacing: float) -> np.ndarray:
        v = self.vertices
        if len(v) == 1:
            return v.copy()
        closed = np.vstack([v, v[:1]])
        out = []
        for p, q in zip(closed[:-1], closed[1:]):
            m = max(int(math.ceil(np.hypot(*(q - p)) / spacing)), 1)
            t = np.arange(m) / m
            out.append(p + t[:, None] * (q - p))
        return np.vstack(out)

    def signed_distance(self, x) -> np.ndarray:
        x = _pts(x)
        v = self.vertices
        if len(v) < 3:
            d = np.min([_segment_distance(x, v[i], v[(i + 1) % len(v)]) for i in range(len(v))], axis=0)
            return -d
        d = np.min([_segment_distance(x, v[i], v[(i + 1) % len(v)]) for i in range(len(v))], axis=0)
        return np.where(self.contains(x), d, -d)

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))


def convex_hull(points) -> HullPolygon:
    """Andrew's monotone chain; collinear points are dropped (extreme points kept)."""
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise ValueError("empty point set")
    P = _pts(P)
    P = np.unique(P, axis=0)  # sorted lexicographically
    if len(P) <= 2:
        return HullPolygon(P.copy())

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and orient2d(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(P)
    upper = chain(P[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 2:
        hull = np.array([P[0], P[-1]])
    return HullPolygon(hull)


def region_hull(region: Region, boundary_sample_count: int = DEFAULT_BOUNDARY_SAMPLES) -> HullPolygon:
    """Hull of sampled boundary points.

    For a region with perimeter L the sampled hull is inside the true hull
    and within about (L / n)^2 * curvature / 8 of it on curved parts.
    """
    if not region.bounded:
        raise ValueError("region is unbounded")
    if boundary_sample_count < 8:
        raise ValueError("need at least 8 boundary samples")
    return convex_hull(region.boundary_samples(boundary_sample_count))


def inclusion_margin(K: Region, A: Region, n: int = DEFAULT_BOUNDARY_SAMPLES) -> float:
    """Largest delta (sampled) with the delta-neighbourhood of K inside A.

    The minimum of A's signed distance over K's boundary samples; A's sdf
    is exact for primitives, so the margin is exact up to sampling.
    """
    pts = np.vstack([K.boundary_samples(n), interior_samples(K, n // 4)])
    return float(np.min(A.sdf(pts)))


# ---------------------------------------------------------------------------
# obstacle adjacency graph


@dataclass
class ObstacleGraph:
    nodes: list
    edges: dict = field(default_factory=dict)  # (i, j) with i < j -> (x, y) witness endpoints

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        return len(self.nodes) <= 1 or nx.is_connected(self.graph())

    def has_edge(self, i, j) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def path_through_edges(self, e1, e2):
        """A walk containing both edges as consecutive vertex pairs, or None.

        Vertices may repeat; the walk is b, a, ..., c, d with a shortest
        path between a and c in the middle.
        """
        for e in (e1, e2):
            if not self.has_edge(*e):
                raise ValueError(f"{e} is not an edge")
        g = self.graph()
        best = None
        for a, b in (e1, e1[::-1]):
            for c, d in (e2, e2[::-1]):
                try:
                    mid = nx.shortest_path(g, b, c)
                except nx.NetworkXNoPath:
                    continue
                walk = [a] + mid + [d]
                if best is None or len(walk) < len(best):
                    best = walk
        return best


def segment_inside(region: Region, x, y, samples: int = DEFAULT_SEGMENT_SAMPLES) -> np.ndarray:
    """For paired endpoint arrays, whether every sample of each segment is in the region."""
    x = _pts(x)
    y = _pts(y)
    t = np.linspace(0.0, 1.0, samples)
    pts = x[:, None, :] + t[None, :, None] * (y - x)[:, None, :]
    vals = region.sdf(pts.reshape(-1, 2)).reshape(len(x), samples)
    return np.all(vals > 0, axis=1)


def obstacle_graph(D0: Region, components: Sequence[Region],
                   samples_per_segment: int = DEFAULT_SEGMENT_SAMPLES,
                   point_samples: int = 64) -> ObstacleGraph:
    if samples_per_segment < 16:
        raise ValueError("need at least 16 samples per segment")
    comps = list(components)
    samples = []
    for k, c in enumerate(comps):
        s = interior_samples(c, point_samples)
        if len(s) == 0 or not np.all(D0.sdf(s) > 0):
            raise ValueError(f"obstacle escapes initial set (component {k})")
        samples.append(s)
    g = ObstacleGraph(nodes=comps)
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            A, B = samples[i], samples[j]
            ia, ib = np.meshgrid(np.arange(len(A)), np.arange(len(B)), indexing="ij")
            ia, ib = ia.ravel(), ib.ravel()
            ok = segment_inside(D0, A[ia], B[ib], samples_per_segment)
            if ok.any():
                k = int(np.argmax(ok))
                g.edges[(i, j)] = (A[ia[k]].copy(), B[ib[k]].copy())
    return g


# ---------------------------------------------------------------------------
# in-ball condition


def inball_check(O: Region, r: float, boundary_sample_count: int = DEFAULT_BOUNDARY_SAMPLES,
                 tol: float = 1e-9):
    """Test: for each sampled w on the boundary some z in B_r(w) has O inside B_{|z-w|}(z).

    Candidates z lie on the inward normal at 32 radii in (0, r] plus a 5x5
    lateral jitter around each. Returns (ok, first_violating_w or None).
    """
    if r <= 0:
        raise ValueError("r must be positive")
    W = O.boundary_samples(boundary_sample_count)
    g = _grad(O, W)
    nrm = g / np.maximum(np.hypot(g[:, 0], g[:, 1]), 1e-12)[:, None]
    tang = np.column_stack([-nrm[:, 1], nrm[:, 0]])
    radii = r * np.arange(1, 33) / 32
    jit = (r / 64) * np.arange(-2, 3)
    JT, JN = np.meshgrid(jit, jit, indexing="ij")
    JT, JN = JT.ravel(), JN.ravel()
    hull = convex_hull(W).vertices  # the farthest point of O from z is a hull vertex
    scale = max(1.0, float(np.abs(W).max()))
    for k, w in enumerate(W):
        found = False
        for s in radii:
            z = w + (s + JN)[:, None] * nrm[k] + JT[:, None] * tang[k]
            rad = np.hypot(*(z - w).T)
            keep = (rad < r) & (rad > 0)
            if not keep.any():
                continue
            z, rad = z[keep], rad[keep]
            far = np.max(np.hypot(hull[None, :, 0] - z[:, None, 0], hull[None, :, 1] - z[:, None, 1]), axis=1)
            if np.any(far <= rad + tol * scale):
                found = True
                break
        if not found:
            return False, w
    return True, None


# ---------------------------------------------------------------------------
# Hausdorff distance


def hausdorff(A, B) -> float:
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    if A.size == 0 or B.size == 0:
        raise ValueError("hausdorff of empty set")
    A, B = _pts(A), _pts(B)
    dab = cKDTree(B).query(A)[0].max()
    dba = cKDTree(A).query(B)[0].max()
    return float(max(dab, dba))


# ---------------------------------------------------------------------------
# polylines and loop erasure


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        p = np.asarray(self.points, float)
        if p.ndim != 2:
            p = p.reshape(-1, 2)
        if len(p) > 1:
            keep = np.ones(len(p), bool)
            keep[1:] = np.any(np.diff(p, axis=0) != 0, axis=1)
            p = p[keep]
            if self.closed and len(p) > 1 and np.all(p[0] == p[-1]):
                p = p[:-1]
        object.__setattr__(self, "points", p)

    def __len__(self):
        return len(self.points)

    def segments(self):
        p = self.points
        if self.closed:
            return list(zip(p, np.roll(p, -1, axis=0)))
        return list(zip(p[:-1], p[1:]))

    def length(self) -> float:
        return float(sum(np.hypot(*(q - p)) for p, q in self.segments()))

    def densify(self, spacing: float) -> np.ndarray:
        out = []
        for p, q in self.segments():
            m = max(int(math.ceil(np.hypot(*(q - p)) / spacing)), 1)
            t = np.arange(m) / m
            out.append(p + t[:, None] * (q - p))
        if not self.closed and len(self.points):
            out.append(self.points[-1:])
        return np.vstack(out) if out else np.empty((0, 2))

    def to_svg_path(self) -> str:
        p = self.points
        if len(p) == 0:
            return ""
        s = "M " + " L ".join(f"{x:.6g} {y:.6g}" for x, y in p)
        return s + (" Z" if self.closed else "")


def _F(p):
    return (Fraction(float(p[0])), Fraction(float(p[1])))


def _seg_intersections(p, q, r, s):
    """Exact intersection parameters (t, u) of segments p+t(q-p), r+u(s-r).

    Returns a list: one pair for a proper/touching crossing, the two overlap
    end pairs for collinear overlap, or nothing.
    """
    d1 = (q[0] - p[0], q[1] - p[1])
    d2 = (s[0] - r[0], s[1] - r[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    w = (r[0] - p[0], r[1] - p[1])
    if den != 0:
        t = (w[0] * d2[1] - w[1] * d2[0]) / den
        u = (w[0] * d1[1] - w[1] * d1[0]) / den
        if 0 <= t <= 1 and 0 <= u <= 1:
            return [(t, u)]
        return []
    if w[0] * d1[1] - w[1] * d1[0] != 0:
        return []  # parallel, not collinear
    L1 = d1[0] * d1[0] + d1[1] * d1[1]
    L2 = d2[0] * d2[0] + d2[1] * d2[1]
    if L1 == 0 or L2 == 0:
        return []

    def par1(x):
        return ((x[0] - p[0]) * d1[0] + (x[1] - p[1]) * d1[1]) / L1

    def par2(x):
        return ((x[0] - r[0]) * d2[0] + (x[1] - r[1]) * d2[1]) / L2

    out = []
    for x in (p, q, r, s):
        t, u = par1(x), par2(x)
        if 0 <= t <= 1 and 0 <= u <= 1:
            out.append((t, u))
    return out


def _coincidences(P):
    """All parameter pairs (sigma, tau), sigma != tau, with gamma(sigma) == gamma(tau).

    P: closed vertex list of Fractions; parameter k + t on segment k.
    """
    m = len(P)
    segs = [(P[k], P[(k + 1) % m]) for k in range(m)]
    pairs = []
    for i in range(m):
        for j in range(i + 1, m):
            for t, u in _seg_intersections(*segs[i], *segs[j]):
                a, b = i + t, j + u
                if a == b:
                    continue
                # adjacent segments sharing their common vertex are one point
                if (j == i + 1 and t == 1 and u == 0) or (i == 0 and j == m - 1 and t == 0 and u == 1):
                    continue
                pairs.append((a, b))
    return pairs


def _point_at(P, tau):
    m = len(P)
    k = int(tau)
    if k >= m:
        k = m - 1
    t = tau - k
    p, q = P[k % m], P[(k + 1) % m]
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def loop_erase(curve: Polyline, start_index: int = 0) -> Polyline:
    """Extract a Jordan sub-loop through the start vertex by the sup-skip rule.

    Starting at parameter t_1 = 0 the curve is followed until the first
    parameter s_i whose point is revisited later, then the walk jumps to the
    last parameter t_{i+1} carrying the same point. Works in exact rational
    arithmetic on the polyline's float coordinates.
    """
    if not curve.closed:
        raise ValueError("curve must be closed")
    pts = np.roll(curve.points, -start_index, axis=0)
    P = [_F(p) for p in pts]
    m = len(P)
    N = Fraction(m)
    pairs = _coincidences(P)
    for a, b in pairs:
        if a == 0 or b == 0 or a == N or b == N:
            raise ValueError("start on self-touch")
    # parameter N is gamma(0); record as a coincidence with 0 is implicit
    pts_of = {}
    for a, b in pairs:
        pa = _point_at(P, a)
        pts_of.setdefault(pa, set()).update((a, b))
    pieces = []
    t = Fraction(0)
    for _ in range(len(pairs) + 2):
        # s_i: smallest sigma in (t, N) hit by another parameter in (t, N]
        cand = [min(a, b) for a, b in pairs if a > t and b > t]
        s = min(cand) if cand else N
        pieces.append((t, s))
        if s == N:
            break
        t = max(pts_of[_point_at(P, s)])
        if t >= N:
            break
    out = []
    for t0, t1 in pieces:
        out.append(_point_at(P, t0))
        k = int(t0) + 1
        while k < t1:
            out.append(P[k % m])
            k += 1
    # ends at gamma(N) = gamma(0), implicit by closure
    arr = np.array([[float(x), float(y)] for x, y in out])
    return Polyline(arr, closed=True)


def proper_self_intersections(curve: Polyline) -> int:
    """Count of intersecting non-adjacent segment pairs (exact)."""
    P = [_F(p) for p in curve.points]
    m = len(P)
    segs = [(P[k], P[(k + 1) % m]) for k in range(m)] if curve.closed else \
        [(P[k], P[k + 1]) for k in range(m - 1)]
    n = len(segs)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (curve.closed and i == 0 and j == n - 1)
            hits = _seg_intersections(*segs[i], *segs[j])
            if adjacent:
                # only the shared vertex may be common
                hits = [h for h in hits if not ((j == i + 1 and h == (1, 0)) or (i == 0 and j == n - 1 and h == (0, 1)))]
            if hits:
                count += 1
    return count
