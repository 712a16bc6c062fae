"""Manufactured flows, sparse sampling, temporal splitting, CSV IO."""

import numpy as np
import pytest

from flowpinn.datagen import (
    FlowSamples,
    beltrami,
    build_beltrami_split,
    build_taylor_green_split,
    grid_2d,
    load_csv,
    planar_grids_3d,
    read_sidecar,
    sample_sparse,
    split_train_test,
    taylor_green,
    validate_generated,
    validate_split,
    write_csv,
    write_sidecar,
)
from flowpinn.errors import ConfigurationError, DataFormatError


def test_taylor_green_spot_values():
    s = taylor_green(np.array([[0.0, 0.0, 0.0]]), re=100.0)
    assert s.u[0] == 0.0
    assert s.v[0] == 0.0
    assert s.p[0] == -0.5

    s = taylor_green(np.array([[np.pi / 2, 0.0, 0.0]]), re=100.0)
    assert s.u[0] == pytest.approx(0.0, abs=1e-15)
    assert s.v[0] == pytest.approx(1.0, rel=1e-15)
    assert s.p[0] == pytest.approx(0.0, abs=1e-15)


def test_taylor_green_residual_oracle():
    rng = np.random.default_rng(0)
    pts = np.column_stack([
        rng.uniform(0, 2 * np.pi, 500),
        rng.uniform(0, 2 * np.pi, 500),
        rng.uniform(0, 7, 500),
    ])
    assert validate_generated(pts, "taylor_green", re=100.0) < 1e-10


def test_beltrami_velocities_decay():
    pt = np.array([[0.3, -0.2, 0.4, 0.0]])
    now = beltrami(pt, re=10.0)
    later = beltrami(pt + [[0, 0, 0, 500.0]], re=10.0)
    assert abs(later.u[0]) < 1e-10 * abs(now.u[0]) + 1e-12
    assert abs(later.w[0]) < 1e-10 * abs(now.w[0]) + 1e-12


def test_beltrami_divergence_free_fd():
    rng = np.random.default_rng(1)
    pts = np.column_stack([rng.uniform(-1, 1, 20), rng.uniform(-1, 1, 20),
                           rng.uniform(-1, 1, 20), rng.uniform(0, 2, 20)])
    h = 1e-5
    div = np.zeros(20)
    for axis, name in ((0, "u"), (1, "v"), (2, "w")):
        hi, lo = pts.copy(), pts.copy()
        hi[:, axis] += h
        lo[:, axis] -= h
        div += (getattr(beltrami(hi, 10.0), name) - getattr(beltrami(lo, 10.0), name)) / (2 * h)
    assert np.max(np.abs(div)) < 1e-6


def test_beltrami_residual_oracle():
    rng = np.random.default_rng(2)
    pts = np.column_stack([rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100),
                           rng.uniform(-1, 1, 100), rng.uniform(0, 2, 100)])
    assert validate_generated(pts, "beltrami", re=10.0) < 1e-5


def test_sample_sparse_whole_grid():
    grid = grid_2d(4, (0.0, 1.0))
    chosen = sample_sparse(grid, len(grid), seed=0)
    assert np.array_equal(np.sort(chosen, axis=0), np.sort(grid, axis=0))


def test_sample_sparse_96_of_10000():
    grid = grid_2d(100)
    pts = sample_sparse(grid, 96, seed=5)
    assert pts.shape == (96, 2)
    assert len(np.unique(pts, axis=0)) == 96  # distinct
    assert 96 / len(grid) < 0.01  # under one percent of the grid


def test_sample_sparse_determinism_and_errors():
    grid = grid_2d(10)
    assert np.array_equal(sample_sparse(grid, 7, seed=3), sample_sparse(grid, 7, seed=3))
    with pytest.raises(ConfigurationError):
        sample_sparse(grid, len(grid) + 1, seed=0)
    with pytest.raises(ConfigurationError):
        sample_sparse(grid, 0, seed=0)


def test_split_train_test_protocol_counts():
    train, test = split_train_test(0.0, 7.0, 0.1, 0.01)
    assert len(train) == 70
    assert len(test) == 630
    assert train[0] == pytest.approx(0.1)
    assert train[-1] == pytest.approx(7.0)


def test_split_train_test_enumeration():
    train, test = split_train_test(0.0, 1.0, 0.5, 0.25)
    np.testing.assert_allclose(train, [0.5, 1.0])
    np.testing.assert_allclose(test, [0.25, 0.75])


def test_split_train_test_disjoint_and_covering():
    train, test = split_train_test(0.0, 2.0, 0.2, 0.05)
    assert not set(np.round(train, 9)) & set(np.round(test, 9))
    interior = np.round(np.arange(1, 40) * 0.05, 9)
    union = set(np.round(train, 9)) | set(np.round(test, 9))
    assert set(interior) <= union


def test_split_train_test_non_divisible():
    with pytest.raises(ConfigurationError):
        split_train_test(0.0, 1.0, 0.1, 0.03)


def test_build_taylor_green_split_counts():
    split = build_taylor_green_split(
        re=100.0, n_sparse=12, grid_n=20, t0=0.0, t1=1.0,
        dt_train=0.25, dt_test=0.05, seed=1,
    )
    # 4 training steps plus the initial condition
    assert len(split.train) == 12 * 5
    # test: interior multiples of 0.05 (19) minus interior training times (3)
    assert len(split.test) == 20 * 20 * 16
    assert len(split.collocation) == 2 * len(split.train)
    assert split.train.p is not None
    assert validate_split(split) < 1e-10


def test_build_beltrami_split_planes():
    split = build_beltrami_split(
        re=10.0, n_sparse=30, grid_n=6, t0=0.0, t1=1.0,
        dt_train=0.5, dt_test=0.25, seed=2,
    )
    grid = planar_grids_3d(6)
    assert split.train.n_dim == 3
    assert len(split.train) == 30 * 3
    zs = np.unique(split.train.points[:, 2])
    assert set(zs) <= set(np.unique(grid[:, 2]))
    assert validate_split(split) < 1e-5


def test_csv_roundtrip_2d(tmp_path):
    split = build_taylor_green_split(
        re=100.0, n_sparse=5, grid_n=10, t0=0.0, t1=0.5,
        dt_train=0.25, dt_test=0.125, seed=3, with_test=False,
    )
    path = tmp_path / "train.csv"
    write_csv(str(path), split.train, "flow2d")
    back = load_csv(str(path), "flow2d")
    assert np.array_equal(back.points, split.train.points)
    assert np.array_equal(back.u, split.train.u)
    assert np.array_equal(back.p, split.train.p)


def test_csv_header_only_is_empty(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("x,y,t,u,v,p\n")
    samples = load_csv(str(path), "flow2d")
    assert len(samples) == 0


def test_csv_three_row_identity(tmp_path):
    path = tmp_path / "three.csv"
    path.write_text(
        "x,y,t,u,v,p\n"
        "0.0,0.5,0.1,1.5,-2.5,0.25\n"
        "1.0,1.5,0.2,0.5,0.125,-1.0\n"
        "2.0,2.5,0.3,-0.75,3.0,4.5\n"
    )
    samples = load_csv(str(path), "flow2d")
    assert len(samples) == 3
    assert samples.points[1, 0] == 1.0
    assert samples.u[0] == 1.5
    assert samples.v[2] == 3.0
    assert samples.p[1] == -1.0


def test_csv_nan_row_rejected_with_line_number(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text(
        "x,y,t,u,v,p\n"
        "0.0,0.0,0.0,1.0,1.0,1.0\n"
        "0.0,0.0,0.1,NaN,1.0,1.0\n"
    )
    with pytest.raises(DataFormatError, match="line 3"):
        load_csv(str(path), "flow2d")


def test_csv_malformed_value_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,t,u,v,p\n0.0,0.0,0.0,oops,1.0,1.0\n")
    with pytest.raises(DataFormatError, match="line 2"):
        load_csv(str(path), "flow2d")


def test_csv_wrong_header_rejected(tmp_path):
    path = tmp_path / "hdr.csv"
    path.write_text("x,y,time,u,v,p\n")
    with pytest.raises(DataFormatError, match="header"):
        load_csv(str(path), "flow2d")


def test_csv_wrong_column_count(tmp_path):
    path = tmp_path / "cols.csv"
    path.write_text("x,y,t,u,v,p\n1.0,2.0,3.0,4.0,5.0\n")
    with pytest.raises(DataFormatError, match="line 2"):
        load_csv(str(path), "flow2d")


def test_csv_3d_roundtrip(tmp_path):
    pts = np.random.default_rng(0).normal(size=(4, 4))
    samples = FlowSamples(points=pts, u=pts[:, 0] * 2, v=pts[:, 1] * 3,
                          w=pts[:, 2] * 4, p=pts[:, 3] * 5)
    path = tmp_path / "f3.csv"
    write_csv(str(path), samples, "flow3d")
    back = load_csv(str(path), "flow3d")
    assert np.array_equal(back.w, samples.w)


def test_sidecar_roundtrip(tmp_path):
    meta = {"seed": 7, "dt_train": 0.1, "generator": "taylor_green"}
    path = tmp_path / "meta.txt"
    write_sidecar(str(path), meta)
    back = read_sidecar(str(path))
    assert back["seed"] == "7"
    assert back["generator"] == "taylor_green"


def test_without_pressure_view():
    split = build_taylor_green_split(
        re=100.0, n_sparse=4, grid_n=8, t0=0.0, t1=0.5,
        dt_train=0.25, dt_test=0.125, seed=4, with_test=False,
    )
    view = split.train.without_pressure()
    assert view.p is None
    with pytest.raises(ConfigurationError):
        view.component("p")
