import json

import numpy as np
import pytest

from chordal_ph import build_loop, build_nerve
from chordal_ph.geometry import half_sq
from chordal_ph.loop import sample_curve
from chordal_ph.oracle import (GridError, build_grid, export_heatmap, lower_star_persistence,
                               read_heatmap, sup_gap_estimate)
from chordal_ph.persistence import (FilteredComplex, bottleneck, compute_persistence,
                                    verify_maxmin_structure)
from chordal_ph.smooth import circle, ellipse, ellipse_polygon
from helpers import random_loop

INF = float("inf")


@pytest.fixture(scope="module")
def ellipse_loop():
    return build_loop(ellipse_polygon(2.0, 1.0, 200))


@pytest.mark.parametrize("m", [8, 9, 16, 33])
def test_grid_is_moebius_band(m, rng):
    grid = build_grid(random_loop(rng, 7, 3), m)
    assert grid.euler_characteristic() == 0
    assert grid.boundary_circles() == 1
    assert len(grid.pairs) == m * (m + 1) // 2
    # the boundary is the diagonal {a, a}
    b = np.unique(grid.boundary_edges())
    assert np.all(grid.pairs[b, 0] == grid.pairs[b, 1])


def test_grid_rejects_small_m(rng):
    with pytest.raises(GridError):
        build_grid(random_loop(rng, 6, 2), 4)


def test_zero_offset_column_is_zero(rng):
    grid = build_grid(random_loop(rng, 9, 3), 32)
    h = grid.heatmap()
    assert h.shape == (32, 33)
    assert np.all(h[:, 0] == 0.0) and np.all(h[:, -1] == 0.0)


def test_circle_heatmap_rows_constant():
    grid = build_grid(sample_curve(circle(1.0), 64), 64)
    h = grid.heatmap()
    assert np.allclose(h, h[0][None, :], atol=1e-12)
    assert h.max() == pytest.approx(2.0, rel=1e-12)


def test_ellipse_heatmap_max_is_major_axis():
    grid = build_grid(sample_curve(ellipse(8.0, 1.0), 256), 256)
    h = grid.heatmap()
    assert h.max() == pytest.approx(16.0, rel=1e-9)
    r, c = np.unravel_index(np.argmax(h), h.shape)
    assert {r, (r + c) % 256} == {0, 128}


def test_grid_max_below_fine_sample_max(rng):
    loop = random_loop(rng, 10, 3)
    grid = build_grid(loop, 40)
    fine = loop.sample(np.arange(400) / 400)
    assert grid.values.max() <= half_sq(fine[:, None], fine[None, :]).max() + 1e-15


def test_interpolate_hits_lattice(rng):
    grid = build_grid(random_loop(rng, 8, 3), 16)
    a, b = np.meshgrid(np.arange(16), np.arange(16), indexing="ij")
    vals = grid.interpolate(a / 16, b / 16)
    assert np.array_equal(vals, grid.torus_values)


def test_export_roundtrip(tmp_path, rng):
    grid = build_grid(random_loop(rng, 8, 3), 24)
    paths = export_heatmap(grid, tmp_path / "heat.csv")
    assert np.array_equal(read_heatmap(paths["csv"]), grid.heatmap())
    raw = open(paths["pgm"], "rb").read()
    assert raw.startswith(b"P5\n25 24\n255\n")
    assert len(raw) == len(b"P5\n25 24\n255\n") + 24 * 25
    meta = json.load(open(paths["json"]))
    assert meta["min"] == 0.0 and meta["max"] == grid.heatmap().max()


def test_constant_band_is_a_circle(rng):
    grid = build_grid(random_loop(rng, 6, 2), 12)
    fc = grid.filtered_complex()
    flat = FilteredComplex(fc.simplices, np.zeros(len(fc)))
    diag = compute_persistence(flat, 3)
    assert diag.points(0).tolist() == [[0.0, INF]]
    assert diag.points(1).tolist() == [[0.0, INF]]


def test_ellipse_grid_diagram(ellipse_loop):
    grid = build_grid(ellipse_loop, 256)
    diag = lower_star_persistence(grid, 3)
    fin = diag.points(1)
    fin = fin[np.isfinite(fin[:, 1])]
    assert len(fin) >= 1
    assert np.max(fin[:, 1]) == pytest.approx(8.0, rel=0.02)


def test_grid_field_dichotomy(ellipse_loop):
    grid = build_grid(ellipse_loop, 128)
    top = float(grid.values.max())
    minmax = float(np.min(np.max(grid.torus_values, axis=1)))
    for p in (2, 3):
        rep = verify_maxmin_structure(lower_star_persistence(grid, p), top, minmax)
        assert rep.ok, rep.messages


def test_bottleneck_within_sup_gap(rng):
    loop = random_loop(rng, 8, 3)
    nerve = build_nerve(loop).persistence(3)
    gaps = []
    for m in (32, 64, 128):
        grid = build_grid(loop, m)
        omega = sup_gap_estimate(grid)
        gaps.append(omega)
        diag = lower_star_persistence(grid, 3)
        for dim in (0, 1):
            assert bottleneck(nerve, diag, dim) <= omega + 1e-9
    assert gaps[0] > gaps[-1]
