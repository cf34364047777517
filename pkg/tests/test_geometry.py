import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcfgame.geometry import (Disc, Offset, PacMan, Polygon, Polyline, Union, convex_hull, diamond, hausdorff,
                              inball_check, inclusion_margin, interior_samples, loop_erase, obstacle_graph,
                              offset_region, proper_self_intersections, region_from_dict, region_hull,
                              segment_inside, signed_profile, square)

coord = st.floats(-3, 3, allow_nan=False)
point = st.tuples(coord, coord)


# -- signed profile ---------------------------------------------------------

def test_profile_examples():
    D = Disc((0, 0), 1.0, a=-1.0)
    assert signed_profile(D, [0.0, 0.0]) == 1.0
    assert signed_profile(D, [3.0, 0.0]) == -1.0
    assert signed_profile(D, [1.5, 0.0]) == pytest.approx(-0.5)
    assert signed_profile(D, [1.0, 0.0]) == 0.0


def test_far_field_must_be_negative():
    with pytest.raises(ValueError):
        Disc((0, 0), 1.0, a=0.5)


REGIONS = [
    Disc((0.2, -0.1), 0.7, a=-2.0),
    square((0, 0), 1.0, a=-2.0),
    PacMan(0.8, a=-2.0),
    diamond(1.2, a=-2.0),
    Union((Disc((-0.5, 0), 0.3, a=-2.0), square((0.5, 0), 0.4, a=-2.0)), a=-2.0),
]


@pytest.mark.parametrize("region", REGIONS, ids=lambda r: type(r).__name__)
@given(p=point, q=point)
def test_profile_is_1_lipschitz(region, p, q):
    fp, fq = region.profile(np.array([p, q]))
    assert abs(fp - fq) <= math.dist(p, q) + 1e-9


@pytest.mark.parametrize("region", REGIONS[:4], ids=lambda r: type(r).__name__)
@given(p=point)
def test_primitive_sdf_is_distance_to_boundary(region, p):
    # independent oracle: distance to a dense boundary sample
    B = region.boundary_samples(20000)
    d = np.min(np.hypot(*(B - np.array(p)).T))
    s = float(region.sdf(np.array(p))[0])
    assert abs(abs(s) - d) <= 2e-3


@pytest.mark.parametrize("region", REGIONS, ids=lambda r: type(r).__name__)
def test_membership_consistent_with_profile(region):
    P = np.random.default_rng(1).uniform(-2, 2, (500, 2))
    assert np.array_equal(region.contains(P), region.profile(P) > 0)


def test_region_dict_round_trip():
    for r in REGIONS:
        assert region_from_dict(r.to_dict()) == r


# -- convex hull ------------------------------------------------------------

def test_hull_square_with_centre():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    H = convex_hull(pts)
    assert sorted(map(tuple, H.vertices.tolist())) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_hull_collinear():
    H = convex_hull([(0, 0), (1, 1), (2, 2)])
    assert sorted(map(tuple, H.vertices.tolist())) == [(0, 0), (2, 2)]


def test_hull_empty():
    with pytest.raises(ValueError, match="empty point set"):
        convex_hull([])


def _brute_hull_vertices(P):
    """O(n^3): (i, j) is a hull edge iff every other point is strictly left of it."""
    verts = set()
    n = len(P)
    for i, j in itertools.permutations(range(n), 2):
        e = P[j] - P[i]
        cross = e[0] * (P[:, 1] - P[i, 1]) - e[1] * (P[:, 0] - P[i, 0])
        cross[[i, j]] = 1.0
        if np.all(cross > 0):
            verts.update((i, j))
    return {tuple(P[k]) for k in verts}


@pytest.mark.parametrize("seed", range(5))
def test_hull_vs_bruteforce(seed):
    P = np.random.default_rng(seed).uniform(-1, 1, (100, 2))
    H = convex_hull(P)
    assert {tuple(v) for v in H.vertices} == _brute_hull_vertices(P)


@given(st.lists(point, min_size=1, max_size=40))
def test_hull_contains_inputs_and_is_idempotent(pts):
    H = convex_hull(pts)
    assert np.all(H.contains(np.array(pts), tol=1e-12))
    H2 = convex_hull(H.vertices)
    assert np.array_equal(np.sort(H.vertices, axis=0), np.sort(H2.vertices, axis=0))


def test_region_hull_disc_chord_error():
    r, k = 1.0, 64
    H = region_hull(Disc((0, 0), r), k)
    assert len(H.vertices) == k
    apothem = -np.max(H.signed_distance(np.zeros((1, 2))) * -1)
    assert apothem >= r * (1 - 2 * math.pi ** 2 / k ** 2)
    assert np.all(np.hypot(*H.vertices.T) <= r + 1e-12)


def test_region_hull_two_discs_and_square():
    U = Union((Disc((-1, 0), 0.3), Disc((1, 0), 0.3)))
    H = region_hull(U, 512)
    assert np.all(H.contains(np.array([[-1, 0], [1, 0], [0, 0]])))
    Hs = region_hull(square((0, 0), 1.0), 64)
    assert sorted(map(tuple, Hs.vertices.round(12).tolist())) == [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]


def test_hull_caratheodory_two_point_form():
    # sampled form: each point of the hull of a connected region is near a segment
    # between two region points
    R = Union((Disc((-0.6, 0), 0.3), Disc((0.6, 0), 0.3), square((0, 0), 0.4)))
    S = interior_samples(R, 400)
    H = convex_hull(S)
    probes = np.random.default_rng(3).uniform(-1, 1, (200, 2))
    probes = probes[H.contains(probes)]
    for x in probes[:40]:
        # point on segment a-b: minimise distance over all pairs
        A, B = S[:, None, :], S[None, :, :]
        d = B - A
        L2 = np.maximum(np.einsum("ijk,ijk->ij", d, d), 1e-30)
        t = np.clip(np.einsum("ijk,ijk->ij", x - A, d) / L2, 0, 1)
        foot = A + t[..., None] * d
        assert np.min(np.hypot(*(foot - x).transpose(2, 0, 1))) <= 0.05


@given(st.floats(0, 1), st.floats(0, 1))
def test_hull_membership_stable_under_small_perturbation(u, v):
    H = convex_hull(np.random.default_rng(0).uniform(-1, 1, (30, 2)))
    x = np.array([u * 0.5 - 0.25, v * 0.5 - 0.25])
    if not H.contains(x[None])[0]:
        return
    margin = float(H.signed_distance(x[None])[0])
    rng = np.random.default_rng(int(u * 1e6))
    for _ in range(10):
        step = rng.standard_normal(2)
        step *= 0.99 * margin / np.linalg.norm(step)
        assert H.contains((x + step)[None])[0]


# -- obstacle graph ---------------------------------------------------------

def test_graph_corridor_connects():
    corridor = Union((Disc((-1, 0), 0.5), Disc((1, 0), 0.5), Polygon(((-1, -0.2), (1, -0.2), (1, 0.2), (-1, 0.2)))))
    g = obstacle_graph(corridor, [Disc((-1, 0), 0.2), Disc((1, 0), 0.2)])
    assert g.has_edge(0, 1) and g.is_connected()
    x, y = g.edges[(0, 1)]
    assert segment_inside(corridor, x, y, 256)[0]


def test_graph_chain_and_path_through_edges():
    # D0 is a bent chain: 1-2 and 2-3 see each other, 1-3 do not
    D0 = Union((Polygon(((-1.2, -0.2), (0.2, -0.2), (0.2, 0.2), (-1.2, 0.2))),
                Polygon(((-0.2, -0.2), (0.2, -0.2), (0.2, 1.2), (-0.2, 1.2)))))
    comps = [Disc((-1.0, 0.0), 0.1), Disc((0.0, 0.0), 0.1), Disc((0.0, 1.0), 0.1)]
    g = obstacle_graph(D0, comps)
    assert g.has_edge(0, 1) and g.has_edge(1, 2) and not g.has_edge(0, 2)
    assert g.is_connected()
    walk = g.path_through_edges((0, 1), (1, 2))
    pairs = {frozenset(p) for p in zip(walk, walk[1:])}
    assert frozenset((0, 1)) in pairs and frozenset((1, 2)) in pairs


def test_graph_slab_disconnects():
    D0 = Union((Polygon(((-2, -1), (-0.1, -1), (-0.1, 1), (-2, 1))), Polygon(((0.1, -1), (2, -1), (2, 1), (0.1, 1)))))
    g = obstacle_graph(D0, [Disc((-1, 0), 0.3), Disc((1, 0), 0.3)])
    assert not g.is_connected()


def test_graph_escape_error():
    with pytest.raises(ValueError, match="obstacle escapes initial set"):
        obstacle_graph(Disc((0, 0), 1.0), [Disc((0.9, 0), 0.3)])


def test_graph_monotone_under_union():
    comps = [Disc((-1, 0), 0.2), Disc((1, 0), 0.2), Disc((0, 1), 0.2)]
    D0 = Union((Disc((-1, 0), 0.4), Disc((1, 0), 0.4), Disc((0, 1), 0.4)))
    bigger = Union((D0, Polygon(((-1, -0.1), (1, -0.1), (1, 0.1), (-1, 0.1)))))
    e1 = set(obstacle_graph(D0, comps).edges)
    e2 = set(obstacle_graph(bigger, comps).edges)
    assert e1 <= e2 and (0, 1) in e2


# -- in-ball condition ------------------------------------------------------

def test_inball_disc():
    ok, w = inball_check(Disc((0, 0), 0.5), 1.0, 128)
    assert ok and w is None


def test_inball_square_fails_on_edge():
    ok, w = inball_check(square((0, 0), 1.0), 1.0, 128)
    assert not ok
    assert np.isclose(abs(w).max(), 0.5)


def test_inball_pacman_fails():
    ok, _ = inball_check(PacMan(0.8), 1.0, 256)
    assert not ok


def test_inball_implies_strict_convexity():
    for O in (Disc((0.3, 0.1), 0.4), Disc((0, 0), 0.9)):
        ok, _ = inball_check(O, 1.0, 128)
        assert ok
        B = O.boundary_samples(64)
        i, j = np.triu_indices(len(B), 1)
        mids = 0.5 * (B[i] + B[j])
        assert np.all(O.sdf(mids) > 0)


# -- offsets and margins ----------------------------------------------------

def test_offset_examples():
    D = Disc((0, 0), 1.0, a=-2.0)
    P = np.random.default_rng(0).uniform(-2, 2, (2000, 2))
    assert np.array_equal(offset_region(D, 0.2).contains(P), Disc((0, 0), 1.2).contains(P))
    assert np.array_equal(offset_region(D, -0.3).contains(P), Disc((0, 0), 0.7).contains(P))
    assert not offset_region(D, -1.1).contains(P).any()
    with pytest.raises(ValueError, match="offset exceeds far-field clamp"):
        offset_region(Disc((0, 0), 1.0, a=-1.0), 1.0)


def test_inclusion_margin_neighbourhood_inside():
    K = square((0, 0), 0.6)
    A = Disc((0, 0), 1.0)
    delta = inclusion_margin(K, A)
    assert delta == pytest.approx(1 - math.sqrt(0.18), abs=1e-3)
    B = Offset(K, 0.999 * delta).boundary_samples(512)
    assert np.all(A.sdf(B) > 0)


# -- Hausdorff ---------------------------------------------------------------

def test_hausdorff_examples():
    A = np.random.default_rng(0).uniform(size=(10, 2))
    assert hausdorff(A, A) == 0
    assert hausdorff([(0, 0)], [(3, 4)]) == 5
    c1 = Disc((0, 0), 1.0).boundary_samples(4000)
    c2 = Disc((0, 0), 1.5).boundary_samples(4000)
    assert hausdorff(c1, c2) == pytest.approx(0.5, abs=2e-3)
    with pytest.raises(ValueError, match="hausdorff of empty set"):
        hausdorff([], A)


# -- polylines ----------------------------------------------------------------

def test_polyline_closure_not_duplicated():
    P = Polyline(np.array([[0, 0], [1, 0], [1, 1], [0, 0]]), closed=True)
    assert len(P) == 3


def test_loop_erase_simple_square_identity():
    sq = Polyline(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float), closed=True)
    out = loop_erase(sq)
    assert np.array_equal(out.points, sq.points)


def test_loop_erase_figure_eight_left_lobe():
    # figure eight crossing at the origin; starts at the far left of the left lobe
    pts = np.array([[-2, 0], [-1, -1], [1, 1], [2, 0], [1, -1], [-1, 1]], float)
    fig8 = Polyline(pts, closed=True)
    assert proper_self_intersections(fig8) == 1
    out = loop_erase(fig8, 0)
    assert proper_self_intersections(out) == 0
    assert np.all(out.points[:, 0] <= 1e-12)          # only the left lobe
    assert any(np.allclose(p, [0, 0]) for p in out.points)
    # every output vertex lies on the input curve
    for p in out.points:
        d = min(float(_seg_dist(p, a, b)) for a, b in fig8.segments())
        assert d < 1e-12


def _seg_dist(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0, 1)
    return np.linalg.norm(p - (a + t * ab))


def test_loop_erase_touch_at_start_errors():
    # the curve passes through its start vertex twice
    pts = np.array([[0, 0], [1, 1], [2, 0], [1, -1], [0, 0], [-1, 1], [-1, -1]], float)
    with pytest.raises(ValueError, match="start on self-touch"):
        loop_erase(Polyline(pts, closed=True), 0)


@given(st.integers(0, 10_000))
def test_loop_erase_output_is_simple(seed):
    rng = np.random.default_rng(seed)
    th = np.sort(rng.uniform(0, 2 * np.pi, 9))
    r = rng.uniform(0.2, 1.0, 9)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    pts = np.vstack([pts, pts[rng.permutation(9)[:3]] * -0.7])
    curve = Polyline(pts, closed=True)
    try:
        out = loop_erase(curve, 0)
    except ValueError:
        return
    assert proper_self_intersections(out) == 0
    assert np.allclose(out.points[0], curve.points[0])
