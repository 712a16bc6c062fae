"""Ground-truth generation, sparse sampling, train/test splitting and
CSV ingestion.

Analytic manufactured flows (Taylor-Green in 2D, Ethier-Steinman
Beltrami in 3D) stand in for external CFD data; both satisfy their
governing equations exactly, which the residual-consistency validation
pass enforces before a generated dataset is used.  All coordinates and
times are nondimensional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DataFormatError
from .ioutils import atomic_write_text
from .physics import FlowState2D, FlowState3D, ns2d_residuals, rans3d_residuals
from .seeding import subseed

TWO_PI = 2.0 * np.pi

CSV_SCHEMAS = {
    "flow2d": ("x", "y", "t", "u", "v", "p"),
    "flow3d": ("x", "y", "z", "t", "u", "v", "w", "p"),
}
_SCHEMA_SPATIAL = {"flow2d": 2, "flow3d": 3}


@dataclass(frozen=True)
class SpatioTemporalPoint:
    """One space-time location; ``z`` is present only in 3D."""

    x: float
    y: float
    t: float
    z: float | None = None

    def coords(self) -> np.ndarray:
        if self.z is None:
            return np.array([self.x, self.y, self.t])
        return np.array([self.x, self.y, self.z, self.t])


@dataclass(frozen=True)
class FlowSample:
    """One observed sample: a point and its flow fields (pressure may be
    withheld)."""

    point: SpatioTemporalPoint
    u: float
    v: float
    w: float | None = None
    p: float | None = None


@dataclass
class FlowSamples:
    """A set of space-time points with observed flow fields.

    ``points`` has shape (N, n_dim+1) with time in the last column.
    Pressure is optional: it is present in ground truth and withheld
    from physics-informed training views.
    """

    points: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray | None = None
    p: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n_dim(self) -> int:
        return self.points.shape[1] - 1

    @property
    def times(self) -> np.ndarray:
        return self.points[:, -1]

    def component(self, name: str) -> np.ndarray:
        value = {"u": self.u, "v": self.v, "w": self.w, "p": self.p}[name]
        if value is None:
            raise ConfigurationError(f"samples carry no {name!r} field")
        return value

    def subset(self, idx) -> "FlowSamples":
        return FlowSamples(
            points=self.points[idx],
            u=self.u[idx],
            v=self.v[idx],
            w=None if self.w is None else self.w[idx],
            p=None if self.p is None else self.p[idx],
        )

    def row(self, i: int) -> FlowSample:
        coords = self.points[i]
        point = (
            SpatioTemporalPoint(x=coords[0], y=coords[1], t=coords[2])
            if self.n_dim == 2
            else SpatioTemporalPoint(x=coords[0], y=coords[1], z=coords[2], t=coords[3])
        )
        return FlowSample(
            point=point,
            u=float(self.u[i]),
            v=float(self.v[i]),
            w=None if self.w is None else float(self.w[i]),
            p=None if self.p is None else float(self.p[i]),
        )

    def without_pressure(self) -> "FlowSamples":
        return FlowSamples(points=self.points, u=self.u, v=self.v, w=self.w, p=None)

    @staticmethod
    def concatenate(parts: Sequence["FlowSamples"]) -> "FlowSamples":
        parts = [s for s in parts if len(s)]
        if not parts:
            raise ConfigurationError("cannot concatenate zero samples")
        has_w = parts[0].w is not None
        has_p = all(s.p is not None for s in parts)
        return FlowSamples(
            points=np.concatenate([s.points for s in parts]),
            u=np.concatenate([s.u for s in parts]),
            v=np.concatenate([s.v for s in parts]),
            w=np.concatenate([s.w for s in parts]) if has_w else None,
            p=np.concatenate([s.p for s in parts]) if has_p else None,
        )


@dataclass
class DatasetSplit:
    """Sparse training samples, dense test samples, collocation points
    and the metadata needed to regenerate them."""

    train: FlowSamples
    test: FlowSamples
    collocation: np.ndarray
    meta: dict = field(default_factory=dict)


# analytic flows ---------------------------------------------------------


def taylor_green(points: np.ndarray, re: float) -> FlowSamples:
    """Decaying Taylor-Green vortex on the 2pi-periodic plane."""
    if not re > 0:
        raise ConfigurationError("Reynolds number must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
    decay = np.exp(-2.0 * t / re)
    u = -np.cos(x) * np.sin(y) * decay
    v = np.sin(x) * np.cos(y) * decay
    p = -0.25 * (np.cos(2.0 * x) + np.cos(2.0 * y)) * np.exp(-4.0 * t / re)
    return FlowSamples(points=pts, u=u, v=v, p=p)


def taylor_green_state(points: np.ndarray, re: float) -> FlowState2D:
    """Taylor-Green fields with all exact derivatives (vectorized),
    ready for residual substitution."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
    e = np.exp(-2.0 * t / re)
    f = np.exp(-4.0 * t / re)
    cx, sx, cy, sy = np.cos(x), np.sin(x), np.cos(y), np.sin(y)
    u = -cx * sy * e
    v = sx * cy * e
    return FlowState2D(
        u=u,
        v=v,
        p=-0.25 * (np.cos(2 * x) + np.cos(2 * y)) * f,
        re=re,
        u_x=sx * sy * e,
        u_y=-cx * cy * e,
        u_t=-(2.0 / re) * u,
        u_xx=-u,
        u_yy=-u,
        v_x=cx * cy * e,
        v_y=-sx * sy * e,
        v_t=-(2.0 / re) * v,
        v_xx=-v,
        v_yy=-v,
        p_x=0.5 * np.sin(2 * x) * f,
        p_y=0.5 * np.sin(2 * y) * f,
    )


def beltrami(points: np.ndarray, re: float, a: float = np.pi / 4, d: float = np.pi / 4) -> FlowSamples:
    """Ethier-Steinman Beltrami flow; exact unsteady 3D laminar solution
    whose velocity decays like exp(-d^2 t / Re)."""
    if not re > 0:
        raise ConfigurationError("Reynolds number must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    x, y, z, t = pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]
    nu = 1.0 / re
    decay = np.exp(-(d**2) * nu * t)
    u = -a * (np.exp(a * x) * np.sin(a * y + d * z) + np.exp(a * z) * np.cos(a * x + d * y)) * decay
    v = -a * (np.exp(a * y) * np.sin(a * z + d * x) + np.exp(a * x) * np.cos(a * y + d * z)) * decay
    w = -a * (np.exp(a * z) * np.sin(a * x + d * y) + np.exp(a * y) * np.cos(a * z + d * x)) * decay
    p = (
        -0.5
        * a**2
        * (
            np.exp(2 * a * x)
            + np.exp(2 * a * y)
            + np.exp(2 * a * z)
            + 2 * np.sin(a * x + d * y) * np.cos(a * z + d * x) * np.exp(a * (y + z))
            + 2 * np.sin(a * y + d * z) * np.cos(a * x + d * y) * np.exp(a * (z + x))
            + 2 * np.sin(a * z + d * x) * np.cos(a * y + d * z) * np.exp(a * (x + y))
        )
        * decay**2
    )
    return FlowSamples(points=pts, u=u, v=v, w=w, p=p)


# grids and sampling -----------------------------------------------------


def grid_2d(n: int, domain: tuple[float, float] = (0.0, TWO_PI)) -> np.ndarray:
    """Regular n-by-n spatial grid over domain^2, as (n*n, 2) points."""
    if n < 1:
        raise ConfigurationError("grid resolution must be >= 1")
    axis = np.linspace(domain[0], domain[1], n)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def planar_grids_3d(
    n: int,
    domain: tuple[float, float] = (-1.0, 1.0),
    z_levels: Sequence[float] = (-0.5, 0.0, 0.5),
) -> np.ndarray:
    """Stacked planar grids at fixed depths, as (len(z_levels)*n*n, 3)."""
    plane = grid_2d(n, domain)
    layers = [np.column_stack([plane, np.full(len(plane), z)]) for z in z_levels]
    return np.concatenate(layers)


def sample_sparse(grid: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Draw n distinct spatial points uniformly without replacement."""
    grid = np.atleast_2d(np.asarray(grid, dtype=np.float64))
    if n < 1:
        raise ConfigurationError("need at least one sample point")
    if n > len(grid):
        raise ConfigurationError(f"cannot draw {n} points from a grid of {len(grid)}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(grid), size=n, replace=False))
    return grid[idx]


def split_train_test(
    t0: float, t1: float, dt_train: float, dt_test: float
) -> tuple[np.ndarray, np.ndarray]:
    """Training times at multiples of dt_train in (t0, t1]; test times
    are all multiples of dt_test strictly inside (t0, t1) that are not
    training times.  dt_test must divide dt_train (tolerance 1e-9)."""
    if dt_train <= 0 or dt_test <= 0:
        raise ConfigurationError("time steps must be positive")
    if t1 <= t0:
        raise ConfigurationError("empty temporal domain")
    ratio = dt_train / dt_test
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(
            f"dt_test {dt_test} does not divide dt_train {dt_train}"
        )
    m = int(np.floor((t1 - t0) / dt_test + 1e-9))
    train_idx = np.arange(r, m + 1, r)
    interior = np.arange(1, m)
    test_idx = interior[interior % r != 0]
    return t0 + train_idx * dt_test, t0 + test_idx * dt_test


def cross_space_time(space: np.ndarray, times: np.ndarray) -> np.ndarray:
    """All (point, time) combinations, time-major, time in the last column."""
    space = np.atleast_2d(np.asarray(space, dtype=np.float64))
    times = np.asarray(times, dtype=np.float64).ravel()
    n, t = len(space), len(times)
    tiled = np.tile(space, (t, 1))
    tcol = np.repeat(times, n)
    return np.column_stack([tiled, tcol])


# dataset assembly -------------------------------------------------------


def _random_interior(
    n: int, bounds: Sequence[tuple[float, float]], t0: float, t1: float, seed: int
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    cols = [rng.uniform(lo, hi, size=n) for lo, hi in bounds]
    cols.append(rng.uniform(t0, t1, size=n))
    return np.column_stack(cols)


def build_collocation(
    train_points: np.ndarray,
    bounds: Sequence[tuple[float, float]],
    t0: float,
    t1: float,
    seed: int,
    n_random: int | None = None,
) -> np.ndarray:
    """Default collocation set: the training data points plus an equal
    number of uniformly random interior points."""
    n_random = len(train_points) if n_random is None else n_random
    if n_random == 0:
        return np.array(train_points, copy=True)
    interior = _random_interior(n_random, bounds, t0, t1, seed)
    return np.concatenate([train_points, interior])


def build_taylor_green_split(
    *,
    re: float = 100.0,
    n_sparse: int = 96,
    grid_n: int = 100,
    domain: tuple[float, float] = (0.0, TWO_PI),
    t0: float = 0.0,
    t1: float = 7.0,
    dt_train: float = 0.1,
    dt_test: float = 0.01,
    seed: int = 0,
    n_collocation_random: int | None = None,
    with_test: bool = True,
) -> DatasetSplit:
    """Sparse-sampling protocol on the Taylor-Green vortex: n_sparse
    spatial points observed at every training step (t0 included as the
    initial condition); the test set is the full grid at the unseen
    intermediate steps."""
    grid = grid_2d(grid_n, domain)
    sparse = sample_sparse(grid, n_sparse, subseed(seed, "sample"))
    train_times, test_times = split_train_test(t0, t1, dt_train, dt_test)
    data_times = np.concatenate([[t0], train_times])
    train_pts = cross_space_time(sparse, data_times)
    train = taylor_green(train_pts, re)
    if with_test:
        test = taylor_green(cross_space_time(grid, test_times), re)
    else:
        test = taylor_green(np.zeros((0, 3)), re)
    collocation = build_collocation(
        train_pts, [domain, domain], t0, t1, subseed(seed, "collocation"),
        n_random=n_collocation_random,
    )
    meta = {
        "generator": "taylor_green",
        "re": re,
        "n_sparse": n_sparse,
        "grid_n": grid_n,
        "domain_lo": domain[0],
        "domain_hi": domain[1],
        "t0": t0,
        "t1": t1,
        "dt_train": dt_train,
        "dt_test": dt_test,
        "seed": seed,
        "n_train": len(train),
        "n_test": len(test),
        "n_collocation": len(collocation),
    }
    return DatasetSplit(train=train, test=test, collocation=collocation, meta=meta)


def build_beltrami_split(
    *,
    re: float = 10.0,
    n_sparse: int = 96,
    grid_n: int = 24,
    domain: tuple[float, float] = (-1.0, 1.0),
    z_levels: Sequence[float] = (-0.5, 0.0, 0.5),
    t0: float = 0.0,
    t1: float = 7.0,
    dt_train: float = 0.1,
    dt_test: float = 0.01,
    seed: int = 0,
    n_collocation_random: int | None = None,
    with_test: bool = True,
) -> DatasetSplit:
    """Sparse-sampling protocol on the Beltrami flow, mirrored from the
    planar-grid extraction setup: sparse points drawn from three
    fixed-depth planes."""
    grid = planar_grids_3d(grid_n, domain, z_levels)
    sparse = sample_sparse(grid, n_sparse, subseed(seed, "sample"))
    train_times, test_times = split_train_test(t0, t1, dt_train, dt_test)
    data_times = np.concatenate([[t0], train_times])
    train_pts = cross_space_time(sparse, data_times)
    train = beltrami(train_pts, re)
    if with_test:
        test = beltrami(cross_space_time(grid, test_times), re)
    else:
        test = beltrami(np.zeros((0, 4)), re)
    zlo, zhi = min(z_levels), max(z_levels)
    bounds = [domain, domain, (zlo, zhi) if zhi > zlo else domain]
    collocation = build_collocation(
        train_pts, bounds, t0, t1, subseed(seed, "collocation"),
        n_random=n_collocation_random,
    )
    meta = {
        "generator": "beltrami",
        "re": re,
        "n_sparse": n_sparse,
        "grid_n": grid_n,
        "domain_lo": domain[0],
        "domain_hi": domain[1],
        "z_levels": ",".join(repr(float(z)) for z in z_levels),
        "t0": t0,
        "t1": t1,
        "dt_train": dt_train,
        "dt_test": dt_test,
        "seed": seed,
        "n_train": len(train),
        "n_test": len(test),
        "n_collocation": len(collocation),
    }
    return DatasetSplit(train=train, test=test, collocation=collocation, meta=meta)


# residual-consistency validation ----------------------------------------


def _fd_first(fn: Callable, pts: np.ndarray, axis: int, h: float = 1e-5) -> np.ndarray:
    hi, lo = pts.copy(), pts.copy()
    hi[:, axis] += h
    lo[:, axis] -= h
    return (fn(hi) - fn(lo)) / (2.0 * h)


def _fd_second(fn: Callable, pts: np.ndarray, axis: int, h: float = 1e-4) -> np.ndarray:
    hi, lo = pts.copy(), pts.copy()
    hi[:, axis] += h
    lo[:, axis] -= h
    return (fn(hi) - 2.0 * fn(pts) + fn(lo)) / (h * h)


def beltrami_state_fd(
    points: np.ndarray, re: float, a: float = np.pi / 4, d: float = np.pi / 4
) -> FlowState3D:
    """Beltrami fields with central-finite-difference derivatives and
    zero Reynolds stresses (laminar), for generator verification."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    flow = beltrami(pts, re, a, d)

    def fields(which):
        return lambda q: getattr(beltrami(q, re, a, d), which)

    state = {}
    for name in ("u", "v", "w"):
        fn = fields(name)
        state[name] = getattr(flow, name)
        for axis, label in ((0, "x"), (1, "y"), (2, "z"), (3, "t")):
            state[f"{name}_{label}"] = _fd_first(fn, pts, axis)
        for axis, label in ((0, "x"), (1, "y"), (2, "z")):
            state[f"{name}_{label}{label}"] = _fd_second(fn, pts, axis)
    fp = fields("p")
    zeros = np.zeros(len(pts))
    return FlowState3D(
        p=flow.p,
        p_x=_fd_first(fp, pts, 0),
        p_y=_fd_first(fp, pts, 1),
        p_z=_fd_first(fp, pts, 2),
        uu=zeros, uv=zeros, uw=zeros, vv=zeros, vw=zeros, ww=zeros,
        uu_x=zeros, uv_x=zeros, uv_y=zeros, uw_x=zeros, uw_z=zeros,
        vv_y=zeros, vw_y=zeros, vw_z=zeros, ww_z=zeros,
        **state,
    )


def validate_generated(points: np.ndarray, generator: str, re: float) -> float:
    """Substitution oracle: generated fields must satisfy their governing
    equations.  Returns the max absolute residual over the points."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if generator == "taylor_green":
        bundle = ns2d_residuals(taylor_green_state(pts, re))
    elif generator == "beltrami":
        bundle = rans3d_residuals(beltrami_state_fd(pts, re), 1.0 / re)
    else:
        raise ConfigurationError(f"unknown generator {generator!r}")
    return bundle.max_abs()


VALIDATION_THRESHOLDS = {"taylor_green": 1e-10, "beltrami": 1e-5}


def validate_split(split: DatasetSplit, max_points: int = 2000) -> float:
    """Run the residual-consistency pass on (a capped subset of) the
    training points; raises if the residual exceeds the generator's
    threshold."""
    generator = split.meta.get("generator")
    if generator not in VALIDATION_THRESHOLDS:
        raise ConfigurationError(f"cannot validate generator {generator!r}")
    pts = split.train.points
    if len(pts) > max_points:
        step = max(1, len(pts) // max_points)
        pts = pts[::step]
    worst = validate_generated(pts, generator, float(split.meta["re"]))
    threshold = VALIDATION_THRESHOLDS[generator]
    if worst > threshold:
        raise ConfigurationError(
            f"generated dataset fails residual consistency: max residual "
            f"{worst:.3e} exceeds {threshold:.1e}"
        )
    return worst


# CSV and sidecar IO ------------------------------------------------------


def _schema_columns(schema: str) -> tuple[str, ...]:
    try:
        return CSV_SCHEMAS[schema]
    except KeyError:
        raise ConfigurationError(f"unknown CSV schema {schema!r}") from None


def write_csv(path: str, samples: FlowSamples, schema: str) -> None:
    """Write samples in the interchange schema (full float64 precision)."""
    columns = _schema_columns(schema)
    spatial = _SCHEMA_SPATIAL[schema]
    if samples.n_dim != spatial:
        raise ConfigurationError(
            f"schema {schema} expects {spatial} spatial dimensions, samples have {samples.n_dim}"
        )
    fields = [samples.points[:, i] for i in range(samples.points.shape[1])]
    fields.append(samples.u)
    fields.append(samples.v)
    if schema == "flow3d":
        fields.append(samples.component("w"))
    fields.append(samples.component("p"))
    lines = [",".join(columns)]
    for row in zip(*fields):
        lines.append(",".join(repr(float(value)) for value in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_csv(path: str, schema: str) -> FlowSamples:
    """Parse an interchange CSV; any malformed or non-finite row fails
    the load with its file line number."""
    columns = _schema_columns(schema)
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().strip()
        if tuple(header.split(",")) != columns:
            raise DataFormatError(
                f"{path}: header {header!r} does not match schema {schema} "
                f"({','.join(columns)})"
            )
        body = handle.read()

    rows = []
    for offset, line in enumerate(body.splitlines()):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        lineno = offset + 2
        if len(parts) != len(columns):
            raise DataFormatError(
                f"{path}: line {lineno}: expected {len(columns)} columns, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
        if not all(np.isfinite(values)):
            raise DataFormatError(f"{path}: line {lineno}: non-finite value rejected")
        rows.append(values)

    data = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(columns))
    spatial = _SCHEMA_SPATIAL[schema]
    points = data[:, : spatial + 1]
    u = data[:, spatial + 1]
    v = data[:, spatial + 2]
    if schema == "flow3d":
        return FlowSamples(points=points, u=u, v=v, w=data[:, spatial + 3], p=data[:, spatial + 4])
    return FlowSamples(points=points, u=u, v=v, p=data[:, spatial + 3])


def write_sidecar(path: str, meta: dict) -> None:
    lines = [f"{key} = {meta[key]}" for key in sorted(meta)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_sidecar(path: str) -> dict:
    meta = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    return meta
