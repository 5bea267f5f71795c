"""Measured constants of the intrinsic weak Harnack and L1 Harnack inequalities.

Both inequalities come with unspecified constants depending on ``(n, p)``,
so the probes report the smallest admissible constant for a given geometry;
their stability across self-similar scales is the observable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .closed_form import INF, InfinitePointSource, PowerSupersolution, format_extended
from .errors import EmptyProbeList, InvalidInput, NotSolution
from .quadrature import ball_rule, dyadic_shells, panel_rule, shifted_mean
from .sources import Truncated, _root, is_grid, require_inside

WINDOW_SAMPLES = 33
DEFAULT_C2 = 0.1


def _ball_nodes(n, x0, radius, levels=30, order=8, angular_order=24):
    """Radii (from the origin) and weights covering ``B(x0, radius)``; dyadic near the center."""
    edges = dyadic_shells(radius, levels)[::-1]
    edges = np.concatenate([[0.0], edges])
    rho, w = panel_rule(edges, order)
    return ball_rule(n, x0, rho, w, angular_order)


def ball_average(source, x0, radius, t):
    radii, weights = _ball_nodes(source.n, x0, radius)
    vals = source.value(radii, np.full(radii.shape, float(t)))
    return shifted_mean(vals, weights)


@dataclass(frozen=True)
class HarnackProbe:
    x0_radius: float
    r: float
    s: float
    c2_trial: float = DEFAULT_C2

    def __post_init__(self):
        if self.x0_radius < 0 or not self.r > 0:
            raise InvalidInput("probe needs x0_radius >= 0 and r > 0")
        if not 0 < self.c2_trial < 1:
            raise InvalidInput("c2_trial must lie in (0, 1)")


@dataclass(frozen=True)
class HarnackReport:
    avg: float
    theta: float
    window: tuple
    inf_over_window: float
    admissible_c1: float

    def as_dict(self):
        return {
            "avg": self.avg,
            "theta": self.theta,
            "window": list(self.window),
            "inf_over_window": self.inf_over_window,
            "admissible_c1": self.admissible_c1,
        }


def weak_harnack_probe(source, probe: HarnackProbe) -> HarnackReport:
    """Average at time ``s`` over ``B(x0, 2r)`` against the later infimum on the same ball."""
    x0, r, s, p = probe.x0_radius, probe.r, probe.s, source.p
    require_inside(source, x0, 16 * r, s, s, "probe base")
    radii, weights = _ball_nodes(source.n, x0, 2 * r)
    base = source.value(radii, np.full(radii.shape, float(s)))
    if np.any(base < 0):
        raise InvalidInput("weak Harnack probes need a nonnegative source")
    avg = shifted_mean(base, weights)
    theta = probe.c2_trial * avg ** (2 - p)
    lo, hi = s + 0.75 * theta * r**p, s + theta * r**p
    require_inside(source, x0, 16 * r, s, hi, "probe cylinder")
    times = np.linspace(lo, hi, WINDOW_SAMPLES)
    vals = source.value(radii[None, :], times[:, None])
    inf = float(np.min(vals))
    c1 = inf / avg if avg > 0 else math.nan
    return HarnackReport(avg, theta, (lo, hi), inf, c1)


@dataclass(frozen=True)
class SweepReport:
    scales: tuple
    admissible_c1: tuple
    coefficient_of_variation: float
    min: float

    @property
    def spread(self) -> float:
        return max(self.admissible_c1) / self.min if self.min > 0 else math.inf

    def write_csv(self, stream) -> None:
        stream.write("scale,admissible_constant\n")
        for scale, c in zip(self.scales, self.admissible_c1):
            stream.write(f"{scale:.17g},{c:.17g}\n")

    def as_dict(self):
        return {
            "scales": list(self.scales),
            "admissible_c1": list(self.admissible_c1),
            "coefficient_of_variation": self.coefficient_of_variation,
            "min": self.min,
        }


def constant_sweep(source, probes) -> SweepReport:
    probes = list(probes)
    if not probes:
        raise EmptyProbeList("constant_sweep needs at least one probe")
    values = np.array([weak_harnack_probe(source, pr).admissible_c1 for pr in probes])
    mean = float(values.mean())
    cv = float(values.std() / mean) if mean != 0 else math.nan
    return SweepReport(tuple(pr.r for pr in probes), tuple(values.tolist()), cv, float(values.min()))


def self_similar_probes(medium, r=0.25, s=1.0, scales=5, c2_trial=DEFAULT_C2, x0_radius=0.0):
    """``r -> 2r``, ``s -> 2**lambda s``: the orbit of the Barenblatt scaling group."""
    lam = medium.n * (medium.p - 2) + medium.p
    return [HarnackProbe(x0_radius * 2.0**j, r * 2.0**j, s * 2.0 ** (lam * j), c2_trial) for j in range(scales)]


# ---------------------------------------------------------------------------
# L1 Harnack


def _require_solution(source, x0, radius, s, t):
    root = _root(source)
    if isinstance(source, Truncated) or isinstance(root, Truncated):
        raise NotSolution("truncations are supersolutions, not solutions")
    if isinstance(root, InfinitePointSource):
        if x0 - radius <= 0:
            raise NotSolution("the point source is singular at the origin inside the ball")
        return
    if isinstance(root, PowerSupersolution) and not root.is_solution:
        raise NotSolution("the power family with this exponent is a strict supersolution")
    if is_grid(root):
        from .grid_solver import CellClass, SolverConfig, residual_sign

        rmap = residual_sign(root, SolverConfig())
        nodes = root.grid.nodes[rmap.node_index]
        times = root.times[1:]
        sel = ((times >= s) & (times <= t))[:, None] & (np.abs(nodes - x0) <= radius)[None, :]
        labels = rmap.labels[sel]
        if labels.size and np.mean(labels == int(CellClass.Solution)) < 0.99:
            raise NotSolution("fewer than 99% of the grid cells in the probe are discrete solutions")
        return
    if not getattr(root, "is_solution", False):
        raise NotSolution("source is not known to be a solution")


def l1_harnack_probe(source, x0: float, r: float, s: float, t: float, samples: int = WINDOW_SAMPLES) -> dict:
    """``sup`` of averages on ``B(x0, r)`` against ``inf`` of averages on ``B(x0, 2r)`` over ``[s, t]``."""
    if not (r > 0 and t > s):
        raise InvalidInput("need r > 0 and t > s")
    require_inside(source, x0, 2 * r, s, t, "L1 Harnack cylinder")
    _require_solution(source, x0, 2 * r, s, t)
    p = source.p
    taus = np.linspace(s, t, samples)
    small = [ball_average(source, x0, r, tau) for tau in taus]
    large = [ball_average(source, x0, 2 * r, tau) for tau in taus]
    lhs, rhs_inf = max(small), min(large)
    drift = ((t - s) / r**p) ** (1 / (2 - p))
    return {
        "lhs": lhs,
        "rhs_inf": rhs_inf,
        "drift": drift,
        "admissible_c": lhs / (rhs_inf + drift),
    }


# ---------------------------------------------------------------------------
# pointwise rate


class RateVerdict(enum.Enum):
    PositiveRate = "PositiveRate"
    ZeroRate = "ZeroRate"
    Inconclusive = "Inconclusive"


@dataclass(frozen=True)
class RateReport:
    radii: tuple
    offsets: tuple
    infima: tuple
    rate_estimate: object
    verdict: RateVerdict
    slope: float

    def as_dict(self):
        return {
            "radii": list(self.radii),
            "offsets": list(self.offsets),
            "infima": list(self.infima),
            "rate_estimate": format_extended(self.rate_estimate),
            "verdict": self.verdict.value,
            "slope": self.slope,
        }


def _annulus_points(n, x0, inner, outer, count=9, angles=17):
    rho = np.geomspace(inner, outer, count)
    if x0 == 0.0:
        return rho, rho
    if n == 1:
        rr = np.concatenate([x0 + rho, np.abs(x0 - rho)])
        return rr, np.concatenate([rho, rho])
    theta = np.linspace(0.0, math.pi, angles)
    rr = np.sqrt(x0**2 + rho[:, None] ** 2 + 2 * x0 * rho[:, None] * np.cos(theta))
    return rr.ravel(), np.repeat(rho, angles)


def rate_schedule(p, r0=0.5, levels=12, tau_max=None):
    """Radii ``r0 2**-k`` with time offsets ``rho**p / 2`` (scaled down to fit ``tau_max``)."""
    radii = r0 * 2.0 ** -np.arange(levels + 1)
    scale = 0.5
    if tau_max is not None and tau_max > 0:
        scale = min(scale, tau_max / r0**p)
    return list(zip(radii.tolist(), (scale * radii**p).tolist()))


def pointwise_rate_detect(source, x0_radius: float, s: float, t0: float = None, schedule=None,
                          r0: float = 0.5, tau_max: float = None, tail: int = 5) -> RateReport:
    """Track ``inf u(x, t) |x - x0|**(p/(2-p))`` over shrinking annuli with ``t`` in ``[s, s + tau]``."""
    p = source.p
    if t0 is not None and not s > t0:
        raise InvalidInput("the base time must come after t0")
    if schedule is None:
        schedule = rate_schedule(p, r0, tau_max=tau_max)
    if len(schedule) < tail:
        raise InvalidInput(f"the rate schedule needs at least {tail} entries")
    power = p / (2 - p)
    infima = []
    for k, (rho, tau) in enumerate(schedule):
        rr, dist = _annulus_points(source.n, x0_radius, rho / 2, rho)
        times = s + tau * np.linspace(0.0, 1.0, 9)
        vals = source.value(rr[None, :], times[:, None]) * dist[None, :] ** power
        infima.append(float(np.min(vals)))
    radii = np.array([e[0] for e in schedule])
    m = np.array(infima)
    last = m[-tail:]
    if np.all(last == 0):
        verdict, est, slope = RateVerdict.ZeroRate, 0.0, math.inf
    elif np.any(np.isinf(last)):
        verdict, est, slope = RateVerdict.PositiveRate, INF, -math.inf
    elif np.any(last <= 0):
        verdict, est, slope = RateVerdict.Inconclusive, float(last[-1]), math.nan
    else:
        slope = float(np.polyfit(np.log(radii[-tail:]), np.log(last), 1)[0])
        if slope > 0.25:
            verdict, est = RateVerdict.ZeroRate, 0.0
        elif slope < -0.25:
            verdict, est = RateVerdict.PositiveRate, INF
        elif abs(slope) < 0.05:
            verdict, est = RateVerdict.PositiveRate, float(last[-1])
        else:
            verdict, est = RateVerdict.Inconclusive, float(last[-1])
    return RateReport(tuple(radii.tolist()), tuple(e[1] for e in schedule), tuple(infima), est, verdict, slope)
