import numpy as np
import pytest

from mcfgame.dpp import Grid, ValueField
from mcfgame.export import read_pgm, read_trajectory_csv, svg_path, write_pgm, write_rows, write_svg
from mcfgame.game import GameConfig, play
from mcfgame.geometry import Polyline
from mcfgame.strategies import ConcentricPaul, RandomCarol


def test_trajectory_csv_round_trips_exactly(tmp_path):
    cfg = GameConfig(d=3, epsilon=0.1, horizon_t=0.2, u0=lambda x: np.zeros(len(x)))
    out = play(cfg, ConcentricPaul(np.zeros(3)), RandomCarol(2), np.array([0.3, 0.1 / 3, -0.7]))
    out.to_csv(tmp_path / "t.csv")
    back = read_trajectory_csv(tmp_path / "t.csv")
    assert np.array_equal(back, out.trajectory)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "round,x1,x2,x3,running_cost"


def test_field_csv_round_trips_exactly(tmp_path):
    g = Grid(-0.3, 0.1, 0.1, 4, 3)
    vals = np.random.default_rng(0).normal(size=g.shape) / 3
    ValueField(g, vals, 0).to_csv(tmp_path / "f.csv")
    data = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 2].reshape(g.shape), vals)
    assert np.array_equal(data[:, :2], g.nodes())


def test_pgm_orientation_and_range(tmp_path):
    v = np.zeros((3, 2))  # x index first
    v[2, 1] = 1.0  # right, top
    v[0, 0] = -1.0  # left, bottom
    write_pgm(tmp_path / "a.pgm", v)
    img = read_pgm(tmp_path / "a.pgm")
    assert img.shape == (2, 3)
    assert img[0, 2] == 65535 and img[1, 0] == 0
    assert img[0, 0] == 32768


def test_pgm_constant_field(tmp_path):
    write_pgm(tmp_path / "c.pgm", np.full((4, 4), 2.0))
    assert np.all(read_pgm(tmp_path / "c.pgm") == 0)


def test_read_pgm_rejects_other_formats(tmp_path):
    (tmp_path / "x.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "x.pgm")


def test_svg_accepts_arrays_polylines_and_tuples(tmp_path):
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]])
    write_svg(tmp_path / "s.svg", [sq, Polyline(sq, closed=True), (sq, True, "red"), np.empty((0, 2))])
    text = (tmp_path / "s.svg").read_text()
    assert text.count("<path") == 3
    assert 'stroke="red"' in text
    assert svg_path(sq, closed=True).endswith(" Z")
    assert svg_path(np.empty((0, 2))) == ""


def test_write_rows_uses_full_precision(tmp_path):
    write_rows(tmp_path / "r.csv", ["k", "v"], [[1, 0.1], [2, np.float64(1 / 3)]])
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines == ["k,v", "1,0.10000000000000001", "2,0.33333333333333331"]
