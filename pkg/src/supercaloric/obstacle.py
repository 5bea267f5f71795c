"""Discrete parabolic obstacle problem and Poisson modification.

Each backward-Euler step is a variational inequality: find ``u >= psi`` with
``u - u_old - dt div_h(u) >= 0`` and equality off the contact set. The
nonlinear diffusivity is frozen per outer sweep; the frozen linear
complementarity problem has an M-matrix and is solved either by projected
Gauss-Seidel or by a primal-dual active-set iteration on the same matrix.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import InvalidInput, PreconditionViolation, ProjectionStall, SingularDiffusivity
from .grid_solver import (
    CellClass,
    GridField,
    RadialGrid,
    SolverConfig,
    _Step,
    default_delta,
    divergence,
    residual_sign,
    solve,
)


@dataclass(eq=False)
class ObstacleProblem:
    psi: GridField
    config: SolverConfig = SolverConfig()
    boundary: Optional[dict] = None
    method: str = "active_set"

    def __post_init__(self):
        if not np.all(np.isfinite(self.psi.values)):
            raise InvalidInput("obstacle must be finite")
        if self.method not in ("active_set", "pgs"):
            raise InvalidInput("method must be 'active_set' or 'pgs'")

    def traces(self):
        rec = dict(self.psi.boundary_record)
        if self.boundary:
            for key, value in self.boundary.items():
                if value is None:
                    continue
                shape = self.psi.grid.nodes.shape if key == "initial" else self.psi.times.shape
                rec[key] = np.broadcast_to(np.asarray(value, dtype=float), shape).astype(float)
        if self.psi.grid.has_origin:
            rec["inner"] = None
        return rec


@dataclass(eq=False)
class ObstacleSolution:
    u: GridField
    psi: GridField
    contact_mask: np.ndarray
    complementarity_residual: float
    sweeps: list
    config: SolverConfig

    @property
    def tol(self) -> float:
        """Value tolerance: ``picard_tol`` relative to the obstacle's magnitude."""
        return value_tol(self.psi, self.config)

    def free_cells(self) -> np.ndarray:
        """Interior cells (per step) whose stencil avoids the contact set.

        Cells next to the discrete free boundary are ambiguous within one
        cell and are left out.
        """
        grid = self.u.grid
        idx = np.arange(grid.J + 1)[grid.unknown_slice]
        c = self.contact_mask[1:]
        near = c.copy()
        near[:, 1:] |= c[:, :-1]
        near[:, :-1] |= c[:, 1:]
        return ~near[:, idx]

    @property
    def contact_fraction(self) -> float:
        return float(self.contact_mask.mean())

    def summary(self) -> dict:
        return {
            "complementarity_residual": self.complementarity_residual,
            "contact_fraction": self.contact_fraction,
        }

    def write_contact_csv(self, stream) -> None:
        stream.write("r,t,contact\n")
        for k, t in enumerate(self.u.times):
            for j, r in enumerate(self.u.grid.nodes):
                stream.write(f"{r:.17g},{t:.17g},{int(self.contact_mask[k, j])}\n")


# ---------------------------------------------------------------------------
# frozen-coefficient complementarity solvers


def _matrix(lower, upper, idx):
    m = idx.size
    ab = np.zeros((3, m))
    ab[1] = 1.0 + lower[idx] + upper[idx]
    ab[0, 1:] = -upper[idx[:-1]]
    ab[2, :-1] = -lower[idx[1:]]
    return ab


def _apply(ab, x):
    y = ab[1] * x
    y[:-1] += ab[0, 1:] * x[1:]
    y[1:] += ab[2, :-1] * x[:-1]
    return y


def _lcp_active_set(ab, b, psi, x0, max_iter):
    """Primal-dual active set for ``A x >= b, x >= psi`` with complementarity."""
    # ties are resolved with a roundoff margin so degenerate nodes cannot cycle
    eps = 1e-13 * max(1.0, float(np.max(np.abs(b))), float(np.max(np.abs(psi))))
    active = x0 <= psi
    x = x0
    for _ in range(max_iter):
        ab_k = ab.copy()
        rhs = b.copy()
        ab_k[1, active] = 1.0
        # zero off-diagonals of constrained rows
        ab_k[0, 1:][active[:-1]] = 0.0
        ab_k[2, :-1][active[1:]] = 0.0
        rhs[active] = psi[active]
        x = solve_banded((1, 1), ab_k, rhs)
        mult = _apply(ab, x) - b
        new_active = np.where(active, mult >= -eps, x < psi - eps)
        if np.array_equal(new_active, active):
            return np.maximum(x, psi)
        active = new_active
    raise ProjectionStall("active-set iteration did not settle")


def _pgs_sweep(ab, b, psi, x):
    """One red-black projected Gauss-Seidel sweep, relaxation 1."""
    up = ab[0, 1:]
    lo = ab[2, :-1]
    diag = ab[1]
    for start in (0, 1):
        s = slice(start, None, 2)
        acc = b.copy()
        acc[:-1] -= up * x[1:]
        acc[1:] -= lo * x[:-1]
        x[s] = np.maximum(psi[s], acc[s] / diag[s])
    return x


def _obstacle_step(step: _Step, u_old, psi_row, dt, left, right, config, scale, method):
    grid = step.grid
    idx = np.arange(grid.J + 1)[grid.unknown_slice]
    w = np.maximum(u_old, psi_row)
    w[-1] = right
    if not grid.has_origin:
        w[0] = left
    for sweep in range(1, config.picard_max + 1):
        lower, upper = step.coefficients(w, dt)
        ab = _matrix(lower, upper, idx)
        b = u_old[idx].copy()
        if not grid.has_origin:
            b[0] += lower[idx[0]] * left
        b[-1] += upper[idx[-1]] * right
        if method == "pgs":
            x = _pgs_sweep(ab, b, psi_row[idx], w[idx].copy())
        else:
            x = _lcp_active_set(ab, b, psi_row[idx], w[idx], idx.size + 2)
        change = float(np.max(np.abs(x - w[idx]))) / scale
        w[idx] = x
        if change < config.picard_tol:
            return w, sweep
    raise ProjectionStall(f"obstacle step did not converge within {config.picard_max} sweeps")


def value_tol(psi: GridField, config: SolverConfig) -> float:
    return config.picard_tol * max(1.0, float(np.max(np.abs(psi.values))))


def contact_tolerance(psi_values):
    return 1e-6 * (1.0 + np.abs(psi_values))


def step_residual(u: GridField, delta: float):
    """Per-step residual in value units, ``u^k - u^{k-1} - dt div_h(u^k)``."""
    dt = np.diff(u.times)[:, None]
    res = np.full(u.values.shape, np.nan)
    res[1:] = u.values[1:] - u.values[:-1] - dt * divergence(u.grid, u.values[1:], u.p, delta)
    return res


def solve_obstacle(problem: ObstacleProblem) -> ObstacleSolution:
    """Smallest discrete supersolution above ``psi`` with the problem's boundary data."""
    psi = problem.psi
    grid, times, p = psi.grid, psi.times, psi.p
    cfg = problem.config
    rec = problem.traces()
    delta = cfg.delta if cfg.delta is not None else default_delta(psi.values, grid)
    if p < 2 and delta == 0:
        raise SingularDiffusivity("fast diffusion needs a positive regularization delta")
    cfg = replace(cfg, delta=delta)
    step = _Step(grid, p, delta)
    scale = max(float(np.max(np.abs(psi.values))), 1e-300)
    values = np.empty(psi.values.shape)
    values[0] = rec["initial"]
    values[0] = np.maximum(values[0], psi.values[0]) if problem.boundary is None else values[0]
    sweeps = []
    for k in range(1, times.size):
        left = 0.0 if rec["inner"] is None else rec["inner"][k]
        values[k], its = _obstacle_step(
            step, values[k - 1], psi.values[k], times[k] - times[k - 1], left, rec["outer"][k], cfg, scale,
            problem.method,
        )
        sweeps.append(its)
    record = {"initial": values[0].copy(), "outer": values[:, -1].copy(),
              "inner": None if grid.has_origin else values[:, 0].copy()}
    u = GridField(grid, times, values, p, record,
                  {"delta": delta, "config": asdict(cfg), "boundary": "obstacle", "sweeps": sweeps})
    contact = (values - psi.values) < contact_tolerance(psi.values)
    res = step_residual(u, delta)
    idx = np.arange(grid.J + 1)[grid.unknown_slice]
    gap = (values - psi.values)[1:, idx]
    comp = float(np.max(np.abs(np.minimum(res[1:, idx], gap)))) if idx.size else 0.0
    return ObstacleSolution(u, psi, contact, comp, sweeps, cfg)


def minimality_check(solution: ObstacleSolution, candidate: GridField) -> bool:
    """True when the obstacle solution lies below a discrete supersolution above ``psi``."""
    cfg = solution.config
    tol = solution.tol
    if candidate.values.shape != solution.u.values.shape:
        raise PreconditionViolation("candidate lives on a different grid")
    if np.any(candidate.values < solution.psi.values - tol):
        raise PreconditionViolation("candidate dips below the obstacle")
    rmap = residual_sign(candidate, cfg)
    if not rmap.all_in(CellClass.Solution, CellClass.Supersolution):
        raise PreconditionViolation("candidate is not a discrete supersolution")
    return bool(np.all(solution.u.values <= candidate.values + 10 * tol))


# ---------------------------------------------------------------------------
# Poisson modification


@dataclass(frozen=True)
class SubBox:
    """Index box ``[j_lo, j_hi] x [k_lo, k_hi]`` of a grid field (inclusive)."""

    j_lo: int
    j_hi: int
    k_lo: int
    k_hi: int

    @classmethod
    def from_bounds(cls, fld: GridField, r_lo, r_hi, t_lo, t_hi) -> "SubBox":
        nodes, times = fld.grid.nodes, fld.times
        j_lo = int(np.argmin(np.abs(nodes - r_lo)))
        j_hi = int(np.argmin(np.abs(nodes - r_hi)))
        k_lo = int(np.argmin(np.abs(times - t_lo)))
        k_hi = int(np.argmin(np.abs(times - t_hi)))
        return cls(j_lo, j_hi, k_lo, k_hi)

    def validate(self, fld: GridField):
        J, K = fld.grid.J, fld.times.size - 1
        if not (0 <= self.j_lo < self.j_hi <= J and 0 <= self.k_lo < self.k_hi <= K):
            raise InvalidInput("sub-box outside the field or empty")
        if self.j_hi - self.j_lo < 2:
            raise InvalidInput("sub-box needs at least one interior node")


def poisson_modify(u: GridField, sub: SubBox, config: SolverConfig = SolverConfig()) -> GridField:
    """Replace ``u`` inside ``sub`` by the solution with ``u``'s trace as data."""
    sub.validate(u)
    nodes = u.grid.nodes[sub.j_lo:sub.j_hi + 1]
    grid = RadialGrid(u.grid.n, nodes, "custom")
    times = u.times[sub.k_lo:sub.k_hi + 1]
    block = u.values[sub.k_lo:sub.k_hi + 1, sub.j_lo:sub.j_hi + 1]
    if config.delta is None and "delta" in u.meta:
        config = replace(config, delta=float(u.meta["delta"]))
    inner = None if grid.has_origin else block[:, 0]
    h = solve(u.medium, grid, times, block[0], block[:, -1], inner, config)
    values = u.values.copy()
    values[sub.k_lo:sub.k_hi + 1, sub.j_lo:sub.j_hi + 1] = h.values
    return u.with_values(values, boundary="poisson_modified")
