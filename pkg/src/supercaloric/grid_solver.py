"""Implicit radial finite-volume solver for u_t = div(|grad u|^(p-2) grad u).

Backward Euler in time, conservative radial fluxes on faces in space, and a
frozen-coefficient Picard iteration with one tridiagonal solve per sweep. The
diffusivity is regularized as ``(s**2 + delta**2)**((p-2)/2)``, which keeps the
flux ``D(s) s`` strictly increasing so the discrete operator stays monotone.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from .errors import (
    GridMismatch,
    InvalidInput,
    PicardDivergence,
    SingularDiffusivity,
)
from .exponents import Medium


@dataclass(frozen=True, eq=False)
class RadialGrid:
    n: int
    nodes: np.ndarray
    spacing: str = "custom"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise InvalidInput("a radial grid needs at least three nodes")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise InvalidInput("grid nodes must be nonnegative and strictly increasing")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInput("dimension weight must be a positive integer")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, n, r0, R, J):
        return cls(n, np.linspace(r0, R, J + 1), "uniform")

    @classmethod
    def geometric(cls, n, r0, R, J):
        if r0 <= 0:
            raise InvalidInput("geometric spacing needs r0 > 0")
        return cls(n, np.geomspace(r0, R, J + 1), "geometric")

    @property
    def J(self):
        return self.nodes.size - 1

    @property
    def has_origin(self):
        return self.nodes[0] == 0.0

    @property
    def faces(self):
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @property
    def volumes(self):
        """Radial control-volume measure (without the sphere area) per node."""
        n, faces = self.n, self.faces
        vol = np.empty_like(self.nodes)
        vol[1:-1] = (faces[1:] ** n - faces[:-1] ** n) / n
        vol[0] = faces[0] ** n / n if self.has_origin else np.nan
        vol[-1] = np.nan
        return vol

    @property
    def unknown_slice(self):
        """Nodes solved for: interior nodes, plus the origin when present."""
        return slice(0 if self.has_origin else 1, self.J)

    def same_as(self, other: "RadialGrid") -> bool:
        return self.n == other.n and self.nodes.shape == other.nodes.shape and np.array_equal(self.nodes, other.nodes)

    def spec(self) -> dict:
        spec = {"n": self.n, "spacing": self.spacing, "r0": float(self.nodes[0]),
                "R": float(self.nodes[-1]), "J": self.J}
        if self.spacing == "custom":
            spec["nodes"] = self.nodes.tolist()
        return spec

    @classmethod
    def from_spec(cls, spec: dict) -> "RadialGrid":
        kind = spec.get("spacing", "uniform")
        if kind == "custom":
            return cls(int(spec["n"]), np.asarray(spec["nodes"], dtype=float))
        builder = {"uniform": cls.uniform, "geometric": cls.geometric}.get(kind)
        if builder is None:
            raise InvalidInput(f"unknown spacing {kind!r}")
        return builder(int(spec["n"]), float(spec["r0"]), float(spec["R"]), int(spec["J"]))


@dataclass(frozen=True)
class SolverConfig:
    delta: Optional[float] = None
    picard_tol: float = 1e-10
    picard_max: int = 200
    residual_tol: float = 1e-3

    def __post_init__(self):
        if not self.picard_tol > 0:
            raise InvalidInput("picard_tol must be positive")
        if self.picard_max < 1:
            raise InvalidInput("picard_max must be at least 1")
        if self.delta is not None and self.delta < 0:
            raise InvalidInput("delta must be nonnegative")


def diffusivity(slope, p, delta):
    return (slope * slope + delta * delta) ** ((p - 2) / 2)


def flux(slope, p, delta):
    return diffusivity(slope, p, delta) * slope


def default_delta(values, grid: RadialGrid) -> float:
    scale = float(np.max(np.abs(values))) if np.size(values) else 0.0
    length = float(grid.nodes[-1] - grid.nodes[0])
    return 1e-8 * max(scale, 1e-300) / length


@dataclass(eq=False)
class GridField:
    """Discrete space-time field on a radial grid; rows are time levels."""

    grid: RadialGrid
    times: np.ndarray
    values: np.ndarray
    p: float
    boundary_record: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.times.size, self.grid.nodes.size):
            raise InvalidInput("values must have shape (len(times), len(nodes))")
        if self.times.size < 2 or np.any(np.diff(self.times) <= 0):
            raise InvalidInput("times must be strictly increasing with at least two levels")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInput("grid field values must be finite")
        if not self.boundary_record:
            self.boundary_record = _record(self.grid, self.values)

    @property
    def n(self):
        return self.grid.n

    @property
    def medium(self):
        return Medium(self.grid.n, self.p)

    @property
    def zero_extended(self):
        return False

    def with_values(self, values, **meta) -> "GridField":
        return GridField(self.grid, self.times, values, self.p, _record(self.grid, values), {**self.meta, **meta})

    # -- evaluation as a source -------------------------------------------
    def _interp(self, table, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        interp = RegularGridInterpolator((self.times, self.grid.nodes), table, bounds_error=False, fill_value=np.nan)
        pts = np.stack([t.ravel(), r.ravel()], axis=-1)
        return interp(pts).reshape(r.shape)

    def contains(self, r_lo, r_hi, t_lo, t_hi) -> bool:
        nodes, times = self.grid.nodes, self.times
        eps = 1e-12 * max(1.0, abs(nodes[-1]))
        teps = 1e-12 * max(1.0, abs(times[-1]))
        return (r_lo >= nodes[0] - eps and r_hi <= nodes[-1] + eps
                and t_lo >= times[0] - teps and t_hi <= times[-1] + teps)

    def value(self, r, t):
        return self._interp(self.values, r, t)

    def gradient(self, r, t):
        grad = np.gradient(self.values, self.grid.nodes, axis=1)
        if self.grid.has_origin:
            grad[:, 0] = 0.0
        return self._interp(grad, r, t)

    def describe(self) -> dict:
        return {"source": "grid", "n": self.n, "p": self.p}

    # -- serialization -------------------------------------------------------
    def to_csv(self, stream) -> None:
        stream.write("r,t,value\n")
        for k, t in enumerate(self.times):
            for j, r in enumerate(self.grid.nodes):
                stream.write(f"{r:.17g},{t:.17g},{self.values[k, j]:.17g}\n")

    def sidecar(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "grid": self.grid.spec(),
            "times": self.times.tolist(),
            "boundary": self.meta.get("boundary", "unspecified"),
            "config": self.meta.get("config", {}),
            "meta": {k: v for k, v in self.meta.items() if k not in ("boundary", "config")},
        }

    def save(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w") as fh:
            self.to_csv(fh)
        json_path = json_path or str(csv_path).rsplit(".", 1)[0] + ".json"
        with open(json_path, "w") as fh:
            json.dump(_jsonable(self.sidecar()), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, csv_path, json_path=None) -> "GridField":
        json_path = json_path or str(csv_path).rsplit(".", 1)[0] + ".json"
        with open(json_path) as fh:
            side = json.load(fh)
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        grid = RadialGrid.from_spec({**side["grid"], "n": side["n"]})
        times = np.asarray(side["times"], dtype=float)
        if data.shape[0] != times.size * grid.nodes.size:
            raise InvalidInput("CSV row count does not match the sidecar grid")
        values = data[:, 2].reshape(times.size, grid.nodes.size)
        meta = dict(side.get("meta", {}))
        meta["boundary"] = side.get("boundary")
        meta["config"] = side.get("config", {})
        return cls(grid, times, values, float(side["p"]), meta=meta)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _record(grid: RadialGrid, values) -> dict:
    return {
        "initial": values[0].copy(),
        "outer": values[:, -1].copy(),
        "inner": None if grid.has_origin else values[:, 0].copy(),
    }


# ---------------------------------------------------------------------------
# discrete operator


def face_fluxes(grid: RadialGrid, u, p, delta):
    """Weighted face fluxes ``r_{j+1/2}**(n-1) F_{j+1/2}`` along the last axis."""
    h = np.diff(grid.nodes)
    slope = np.diff(u, axis=-1) / h
    return grid.faces ** (grid.n - 1) * flux(slope, p, delta)


def divergence(grid: RadialGrid, u, p, delta):
    """Discrete ``div(|u_r|^(p-2) u_r)`` at every node; nan at Dirichlet nodes."""
    fl = face_fluxes(grid, u, p, delta)
    out = np.full(np.shape(u), np.nan)
    vol = grid.volumes
    out[..., 1:-1] = (fl[..., 1:] - fl[..., :-1]) / vol[1:-1]
    if grid.has_origin:
        out[..., 0] = fl[..., 0] / vol[0]
    return out


def _as_trace(spec, points, name):
    if spec is None:
        return None
    if callable(spec):
        arr = np.asarray(spec(points), dtype=float)
    else:
        arr = np.asarray(spec, dtype=float)
    arr = np.broadcast_to(arr, np.shape(points)).astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} trace must be finite")
    return arr


@dataclass
class _Step:
    """Linear algebra for one backward-Euler step with frozen coefficients."""

    grid: RadialGrid
    p: float
    delta: float

    def coefficients(self, u, dt):
        grid = self.grid
        h = np.diff(grid.nodes)
        slope = np.diff(u) / h
        cond = grid.faces ** (grid.n - 1) * diffusivity(slope, self.p, self.delta) / h
        vol = grid.volumes
        lower = np.zeros_like(u)
        upper = np.zeros_like(u)
        lower[1:-1] = dt * cond[:-1] / vol[1:-1]
        upper[1:-1] = dt * cond[1:] / vol[1:-1]
        if grid.has_origin:
            upper[0] = dt * cond[0] / vol[0]
        return lower, upper

    def solve_linear(self, u_iter, u_old, dt, left, right):
        """Solve (I - dt L[u_iter]) u = u_old with Dirichlet values at the ends."""
        lower, upper = self.coefficients(u_iter, dt)
        sl = self.grid.unknown_slice
        idx = np.arange(self.grid.J + 1)[sl]
        m = idx.size
        ab = np.zeros((3, m))
        ab[1] = 1.0 + lower[idx] + upper[idx]
        ab[0, 1:] = -upper[idx[:-1]]
        ab[2, :-1] = -lower[idx[1:]]
        rhs = u_old[idx].copy()
        if not self.grid.has_origin:
            rhs[0] += lower[idx[0]] * left
        rhs[-1] += upper[idx[-1]] * right
        out = np.empty_like(u_old)
        out[idx] = solve_banded((1, 1), ab, rhs)
        if not self.grid.has_origin:
            out[0] = left
        out[-1] = right
        return out


def _picard_step(step: _Step, u_old, dt, left, right, config: SolverConfig, scale: float):
    u = u_old.copy()
    u[-1] = right
    if not step.grid.has_origin:
        u[0] = left
    prev_change = math.inf
    non_monotone = 0
    for it in range(1, config.picard_max + 1):
        trial = step.solve_linear(u, u_old, dt, left, right)
        if non_monotone >= 10:
            trial = u + 0.5 * (trial - u)
        change = float(np.max(np.abs(trial - u))) / max(float(np.max(np.abs(trial))), scale)
        if change > prev_change:
            non_monotone += 1
        prev_change = change
        u = trial
        if change < config.picard_tol:
            return u, it
    raise PicardDivergence(f"Picard iteration did not reach {config.picard_tol} in {config.picard_max} sweeps")


def solve(
    medium: Medium,
    grid: RadialGrid,
    times,
    initial,
    outer,
    inner=None,
    config: SolverConfig = SolverConfig(),
) -> GridField:
    """March the equation from ``times[0]`` with Dirichlet data.

    ``initial`` is an array over nodes or a callable of r; ``outer`` and
    ``inner`` are arrays over times, callables of t, or constants. ``inner`` is
    required when the grid starts at ``r0 > 0`` and ignored at the origin,
    where a symmetry condition is imposed.
    """
    if grid.n != medium.n:
        raise InvalidInput("grid dimension weight differs from the medium dimension")
    times = np.asarray(times, dtype=float)
    if times.size < 2 or np.any(np.diff(times) <= 0):
        raise InvalidInput("times must be strictly increasing with at least two levels")
    u0 = _as_trace(initial, grid.nodes, "initial")
    right = _as_trace(outer, times, "outer")
    left = None
    if not grid.has_origin:
        if inner is None:
            raise InvalidInput("an inner Dirichlet trace is required when r0 > 0")
        left = _as_trace(inner, times, "inner")
    delta = config.delta
    if delta is None:
        delta = default_delta(np.concatenate([u0, right] + ([] if left is None else [left])), grid)
    if medium.p < 2 and delta == 0:
        raise SingularDiffusivity("fast diffusion needs a positive regularization delta")

    values = np.empty((times.size, grid.nodes.size))
    values[0] = u0
    step = _Step(grid, medium.p, delta)
    scale = max(float(np.max(np.abs(values[0]))), float(np.max(np.abs(right))), 1e-300)
    iterations = []
    for k in range(1, times.size):
        dt = times[k] - times[k - 1]
        lval = 0.0 if left is None else left[k]
        values[k], its = _picard_step(step, values[k - 1], dt, lval, right[k], config, scale)
        iterations.append(its)
    record = {"initial": u0.copy(), "outer": right.copy(), "inner": None if left is None else left.copy()}
    meta = {
        "delta": delta,
        "picard_iterations": iterations,
        "config": {**asdict(config), "delta": delta},
        "boundary": "dirichlet",
    }
    return GridField(grid, times, values, medium.p, record, meta)


def traces_from(source, grid: RadialGrid, times):
    """Initial row and boundary traces of any evaluable source on a grid."""
    times = np.asarray(times, dtype=float)
    initial = source.value(grid.nodes, times[0])
    outer = source.value(np.full(times.shape, grid.nodes[-1]), times)
    inner = None if grid.has_origin else source.value(np.full(times.shape, grid.nodes[0]), times)
    return initial, outer, inner


def sample(source, grid: RadialGrid, times, p=None) -> GridField:
    """Sample an evaluable source on the grid nodes at the given times."""
    times = np.asarray(times, dtype=float)
    rr, tt = np.meshgrid(grid.nodes, times)
    values = source.value(rr, tt)
    p = source.p if p is None else p
    return GridField(grid, times, values, p, meta={"boundary": "sampled", "source": source.describe()})


# ---------------------------------------------------------------------------
# field operations


def _check_same(u: GridField, v: GridField):
    if not (u.grid.same_as(v.grid) and u.times.shape == v.times.shape and np.array_equal(u.times, v.times)):
        raise GridMismatch("fields live on different grids or time levels")


def pointwise_min(u: GridField, v: Union[GridField, float]) -> GridField:
    if isinstance(v, GridField):
        _check_same(u, v)
        values = np.minimum(u.values, v.values)
    else:
        values = np.minimum(u.values, float(v))
    rec_u = u.boundary_record
    rec_v = v.boundary_record if isinstance(v, GridField) else None

    def mini(key):
        a = rec_u.get(key)
        if a is None:
            return None
        b = rec_v.get(key) if rec_v is not None else float(v)
        return np.minimum(a, b)

    record = {key: mini(key) for key in ("initial", "outer", "inner")}
    return GridField(u.grid, u.times, values, u.p, record, {**u.meta, "boundary": "min"})


class CellClass(enum.IntEnum):
    Solution = 0
    Supersolution = 1
    Subsolution = -1
    Indeterminate = 2


@dataclass(eq=False)
class ResidualMap:
    residual: np.ndarray
    threshold: np.ndarray
    labels: np.ndarray
    node_index: np.ndarray

    def fraction(self, *classes) -> float:
        return float(np.isin(self.labels, [int(c) for c in classes]).mean())

    def count(self, cls) -> int:
        return int(np.sum(self.labels == int(cls)))

    def all_in(self, *classes, mask=None) -> bool:
        labels = self.labels if mask is None else self.labels[mask]
        return bool(np.all(np.isin(labels, [int(c) for c in classes])))


def discrete_residual(field_: GridField, delta: float):
    """Backward-difference residual ``u_t - div_h`` at interior cells of every step."""
    grid = field_.grid
    dt = np.diff(field_.times)[:, None]
    u = field_.values
    ut = (u[1:] - u[:-1]) / dt
    div = divergence(grid, u[1:], field_.p, delta)
    idx = np.arange(grid.J + 1)[grid.unknown_slice]
    return ut[:, idx], div[:, idx], idx


def field_delta(field_: GridField, config: SolverConfig) -> float:
    if config.delta is not None:
        return config.delta
    if "delta" in field_.meta:
        return float(field_.meta["delta"])
    return default_delta(field_.values, field_.grid)


def residual_sign(field_: GridField, config: SolverConfig = SolverConfig()) -> ResidualMap:
    """Classify interior cells by the sign of the discrete residual.

    A cell counts as a solution when ``|R| <= residual_tol * scale`` with
    ``scale = max(|u_t|, |div_h|)`` floored at 1e-3 of the field-wide maximum.
    """
    ut, div, idx = discrete_residual(field_, field_delta(field_, config))
    res = ut - div
    scale = np.maximum(np.abs(ut), np.abs(div))
    finite = np.isfinite(res)
    top = float(np.max(scale[finite])) if np.any(finite) else 0.0
    floor = 1e-3 * top if top > 0 else 1e-300
    thr = config.residual_tol * np.maximum(scale, floor)
    labels = np.full(res.shape, int(CellClass.Solution), dtype=np.int8)
    labels[res > thr] = int(CellClass.Supersolution)
    labels[res < -thr] = int(CellClass.Subsolution)
    labels[~finite] = int(CellClass.Indeterminate)
    return ResidualMap(res, thr, labels, idx)


@dataclass(frozen=True)
class ComparisonReport:
    boundary_ordered: bool
    interior_ordered: bool
    max_violation: float


def _boundary_mask(field_: GridField):
    mask = np.zeros(field_.values.shape, dtype=bool)
    mask[0] = True
    mask[:, -1] = True
    if not field_.grid.has_origin:
        mask[:, 0] = True
    return mask


def compare(u: GridField, v: GridField, tol: float = 0.0) -> ComparisonReport:
    """Check ``u <= v + tol`` on the parabolic boundary and in the interior."""
    _check_same(u, v)
    diff = u.values - v.values
    bmask = _boundary_mask(u)
    interior = diff[~bmask]
    worst = float(max(0.0, interior.max())) if interior.size else 0.0
    return ComparisonReport(
        boundary_ordered=bool(np.all(diff[bmask] <= tol)),
        interior_ordered=bool(worst <= tol),
        max_violation=worst,
    )
