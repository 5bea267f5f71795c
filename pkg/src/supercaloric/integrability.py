"""Local integrability of radial fields over space-time cylinders.

Integrals are tensor-product Gauss rules: dyadic shells ``r 2**-k`` around
the cylinder's center in space and Gauss panels in time (geometric panels
towards ``t = 0`` when a zero-extended source switches on inside the
cylinder). Divergence is detected from the shell increments
``I_k - I_{k-1}``: a geometric mean ratio below 1 over the last eight shells
means the tail sums, a ratio near 1 means logarithmic growth.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .closed_form import INF, SolutionFamily, format_extended
from .errors import (
    InconsistentVerdicts,
    InvalidInput,
    NotSupersolution,
)
from .exponents import Medium, exponent_table
from .quadrature import ball_rule, dyadic_shells, log_edges, panel_rule
from .sources import ConstantField, Shifted, _root, describe, gradient_of, is_grid, require_inside

#: Ratio band of the increment test; inside it growth counts as logarithmic.
RATIO_BAND = 0.95
TAIL = 8
DEFAULT_LEVELS = 40


class Verdict(enum.Enum):
    Convergent = "Convergent"
    Divergent = "Divergent"
    Borderline = "Borderline"


class ClassVerdict(enum.Enum):
    ClassB = "ClassB"
    ClassM = "ClassM"
    Undetermined = "Undetermined"


@dataclass(frozen=True)
class Cylinder:
    """``B(x0, r) x (t1, t2)``; ``x0_radius`` is the center's distance to the origin."""

    x0_radius: float
    r: float
    t1: float
    t2: float

    def __post_init__(self):
        if self.x0_radius < 0:
            raise InvalidInput("cylinder center radius must be nonnegative")
        if not self.r > 0:
            raise InvalidInput("cylinder radius must be positive")
        if not self.t1 < self.t2:
            raise InvalidInput("cylinder needs t1 < t2")


# ---------------------------------------------------------------------------
# cutoff functions


@dataclass(frozen=True)
class Smoothstep:
    """C^1 piecewise-cubic plateau: 0 below ``a0``, 1 on ``[a1, b1]``, 0 above ``b0``.

    Infinite knots drop the corresponding ramp.
    """

    a0: float
    a1: float
    b1: float
    b0: float

    def __post_init__(self):
        if not (self.a0 <= self.a1 <= self.b1 <= self.b0):
            raise InvalidInput("smoothstep knots must be ordered")

    @staticmethod
    def _ramp(s):
        s = np.clip(s, 0.0, 1.0)
        return s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s)

    def __call__(self, x):
        return self.eval(x)[0]

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        val = np.ones_like(x)
        der = np.zeros_like(x)
        if math.isfinite(self.a0) and self.a1 > self.a0:
            w = self.a1 - self.a0
            v, d = self._ramp((x - self.a0) / w)
            val = val * v
            der = np.where(x < self.a1, d / w, der)
        elif math.isfinite(self.a0):
            val = np.where(x < self.a0, 0.0, val)
        if math.isfinite(self.b0) and self.b0 > self.b1:
            w = self.b0 - self.b1
            v, d = self._ramp((self.b0 - x) / w)
            val = val * v
            der = np.where(x > self.b1, -d / w, der)
        elif math.isfinite(self.b0):
            val = np.where(x > self.b0, 0.0, val)
        return val, der

    @property
    def support(self):
        return self.a0, self.b0

    def knots(self):
        return [k for k in (self.a0, self.a1, self.b1, self.b0) if math.isfinite(k)]


@dataclass(frozen=True)
class CutoffFn:
    """``phi(x, t) = eta(|x - x0|) zeta(t)`` with C^1 cubic plateaus."""

    x0_radius: float
    radial: Smoothstep
    temporal: Smoothstep
    t_end: float = math.inf

    def __post_init__(self):
        lo, hi = self.radial.support
        if not math.isfinite(hi):
            raise InvalidInput("radial cutoff needs compact support")
        if not math.isfinite(self.temporal.a0):
            raise InvalidInput("temporal cutoff must vanish at its start time")
        if not math.isfinite(min(self.temporal.b0, self.t_end)):
            raise InvalidInput("temporal cutoff needs a finite end time")

    @classmethod
    def for_cylinder(cls, cyl: Cylinder, inner: float = 0.5, ramp: float = 0.25) -> "CutoffFn":
        """Equal to 1 on ``B(x0, inner r) x [t1 + ramp L, t2]``, vanishing near the lateral and bottom sides."""
        L = cyl.t2 - cyl.t1
        radial = Smoothstep(-math.inf, -math.inf, inner * cyl.r, cyl.r)
        temporal = Smoothstep(cyl.t1, cyl.t1 + ramp * L, math.inf, math.inf)
        return cls(cyl.x0_radius, radial, temporal, cyl.t2)

    @classmethod
    def annulus(cls, r_in0, r_in1, r_out1, r_out0, t1, t2, ramp: float = 0.25) -> "CutoffFn":
        L = t2 - t1
        return cls(0.0, Smoothstep(r_in0, r_in1, r_out1, r_out0), Smoothstep(t1, t1 + ramp * L, math.inf, math.inf), t2)

    @property
    def t_support(self):
        """Time interval of integration; the profile may stay 1 up to its end."""
        return self.temporal.a0, min(self.temporal.b0, self.t_end)

    def parts(self, rho, t):
        eta, deta = self.radial.eval(rho)
        zeta, dzeta = self.temporal.eval(t)
        return eta, deta, zeta, dzeta

    def value(self, rho, t):
        eta, _, zeta, _ = self.parts(rho, t)
        return eta * zeta

    def grad_abs(self, rho, t):
        _, deta, zeta, _ = self.parts(rho, t)
        return np.abs(deta) * zeta

    def dt_phi_p(self, rho, t, p):
        """``|d/dt (phi**p)|``."""
        eta, _, zeta, dzeta = self.parts(rho, t)
        return p * eta**p * zeta ** (p - 1) * np.abs(dzeta)


# ---------------------------------------------------------------------------
# quadrature plumbing


def _time_rule(source, t1, t2, order=8, panels=8, per_decade=3):
    """Gauss nodes for ``(t1, t2)``, clipped to ``t > 0`` for zero-extended sources."""
    root = _root(source)
    lo = t1
    if getattr(root, "zero_extended", False) and not is_grid(root):
        lo = max(t1, 0.0)
    if t2 <= lo:
        return np.empty(0), np.empty(0)
    if lo == 0.0 and not is_grid(root):
        # sources switching on at t = 0 may concentrate there; geometric panels
        return panel_rule(log_edges(t2 * 1e-30, t2, per_decade), order)
    edges = np.linspace(lo, t2, panels + 1)
    if is_grid(root):
        inside = root.times[(root.times > lo) & (root.times < t2)]
        edges = np.union1d(edges, inside)
    return panel_rule(edges, order)


def _shell_nodes(n, x0, edges, order, angular_order):
    """Nodes/weights (distance from the origin) for each shell ``[edges[k+1], edges[k]]``."""
    radii, weights = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        rho, w = panel_rule(np.array([lo, hi]), order)
        rr, ww = ball_rule(n, x0, rho, w, angular_order)
        radii.append(rr)
        weights.append(ww)
    return np.array(radii), np.array(weights)


def _integrand(source, r, t, q, selector):
    if selector == "value":
        u = source.value(r, t)
    elif selector == "gradient":
        u = np.abs(gradient_of(source, r, t))
    else:
        raise InvalidInput("selector must be 'value' or 'gradient'")
    if np.any(u < 0):
        raise InvalidInput("source takes negative values; shift it first")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(u == 0, 0.0, u**q)


def _check_grid(source, cyl: Cylinder):
    if is_grid(_root(source)):
        require_inside(source, cyl.x0_radius, cyl.r, cyl.t1, cyl.t2, "cylinder")


def shell_integrals(source, cyl: Cylinder, q, selector="value", edges=None, order=8, angular_order=24):
    """Integrals over the shells ``edges[k+1] < |x - x0| < edges[k]`` times ``(t1, t2)``."""
    if not q > 0:
        raise InvalidInput("q must be positive")
    _check_grid(source, cyl)
    if edges is None:
        edges = dyadic_shells(cyl.r, DEFAULT_LEVELS)
    tn, tw = _time_rule(source, cyl.t1, cyl.t2)
    if tn.size == 0:
        return np.zeros(len(edges) - 1)
    radii, weights = _shell_nodes(source.n, cyl.x0_radius, np.asarray(edges, float), order, angular_order)
    out = np.empty(radii.shape[0])
    for k in range(radii.shape[0]):
        f = _integrand(source, radii[k][None, :], tn[:, None], q, selector)
        out[k] = float(tw @ f @ weights[k])
    return out


def local_integral(source, cyl: Cylinder, q: float, selector: str = "value", rho: float = 0.0) -> float:
    """``int int u**q`` (or ``|grad u|**q``) over the cylinder with ``B(x0, rho)`` removed.

    ``rho = 0`` stops at ``r 2**-60``; the omitted core is negligible for
    integrable data.
    """
    if not 0 <= rho < cyl.r:
        raise InvalidInput("need 0 <= rho < r")
    if rho == 0:
        edges = dyadic_shells(cyl.r, 60)
    else:
        k = int(math.ceil(math.log2(cyl.r / rho)))
        edges = dyadic_shells(cyl.r, k)
        edges[-1] = rho
    return float(np.sum(shell_integrals(source, cyl, q, selector, edges)))


# ---------------------------------------------------------------------------
# scans


def _tail_ratio(increments, tail=TAIL):
    """Geometric mean of successive increment ratios over the last ``tail`` steps."""
    d = np.asarray(increments, dtype=float)
    a, b = d[-tail - 1], d[-1]
    if b == 0:
        return 0.0
    if a == 0:
        return math.inf
    return float((b / a) ** (1.0 / tail))


def verdict_from_ratio(ratio: float) -> Verdict:
    if ratio < RATIO_BAND:
        return Verdict.Convergent
    if ratio > 1.0 / RATIO_BAND:
        return Verdict.Divergent
    return Verdict.Borderline


@dataclass(frozen=True)
class IntegralScan:
    q: float
    cutoffs: tuple
    values: tuple
    verdict: Verdict
    slope: float
    ratio: float

    @property
    def finite(self) -> bool:
        """The tail increments decay geometrically, so the limit is finite."""
        return self.ratio < 1.0

    def rows(self):
        for rho, val in zip(self.cutoffs, self.values):
            yield self.q, rho, val, self.verdict.value


def scan_at(source, cyl: Cylinder, q: float, selector: str = "value", levels: int = DEFAULT_LEVELS) -> IntegralScan:
    if levels < TAIL + 1:
        raise InvalidInput(f"the cutoff schedule needs more than {TAIL} levels")
    edges = dyadic_shells(cyl.r, levels)
    inc = shell_integrals(source, cyl, q, selector, edges)
    values = np.cumsum(inc)
    ratio = _tail_ratio(inc)
    rho = edges[1:]
    tail_i = values[-TAIL:]
    if np.all(tail_i > 0):
        slope = float(np.polyfit(np.log(rho[-TAIL:]), np.log(tail_i), 1)[0])
    else:
        slope = 0.0
    return IntegralScan(float(q), tuple(rho.tolist()), tuple(values.tolist()), verdict_from_ratio(ratio), slope, ratio)


@dataclass(frozen=True)
class ScanResult:
    scans: tuple
    q_star: Optional[float]
    bracket: tuple

    def write_csv(self, stream) -> None:
        stream.write("q,rho,I,verdict\n")
        for scan in self.scans:
            for q, rho, val, verdict in scan.rows():
                stream.write(f"{q:.17g},{rho:.17g},{val:.17g},{verdict}\n")

    def as_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "bracket": list(self.bracket),
            "verdicts": [{"q": s.q, "verdict": s.verdict.value, "ratio": s.ratio, "slope": s.slope} for s in self.scans],
        }


def exponent_scan(
    source,
    cyl: Cylinder,
    selector: str = "value",
    q_lo: float = 0.1,
    q_hi: float = 2.0,
    levels: int = DEFAULT_LEVELS,
    coarse: int = 9,
    width: float = 0.005,
) -> ScanResult:
    """Bisect for the exponent where the excised integrals stop converging.

    A coarse sweep checks that finiteness is monotone in ``q`` before the
    bisection narrows the bracket below ``width``.
    """
    if not 0 < q_lo < q_hi:
        raise InvalidInput("need 0 < q_lo < q_hi")
    scans = {}

    def run(q):
        if q not in scans:
            scans[q] = scan_at(source, cyl, q, selector, levels)
        return scans[q]

    grid = np.linspace(q_lo, q_hi, coarse)
    finite = [run(q).finite for q in grid]
    flips = sum(a != b for a, b in zip(finite[:-1], finite[1:]))
    if flips > 1 or (flips == 1 and not finite[0]):
        raise InconsistentVerdicts("convergence is not monotone in q; quadrature is unreliable here")
    ordered = lambda: tuple(scans[q] for q in sorted(scans))
    if flips == 0:
        bracket = (q_hi, math.inf) if finite[0] else (0.0, q_lo)
        return ScanResult(ordered(), None, bracket)
    i = finite.index(False)
    lo, hi = float(grid[i - 1]), float(grid[i])
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if run(mid).finite:
            lo = mid
        else:
            hi = mid
    return ScanResult(ordered(), 0.5 * (lo + hi), (lo, hi))


# ---------------------------------------------------------------------------
# slice norms


@dataclass(frozen=True)
class SliceNorm:
    sup_value: object
    divergent: bool
    times: tuple
    values: tuple

    def as_dict(self):
        return {
            "sup_value": format_extended(self.sup_value),
            "divergent": self.divergent,
            "times": list(self.times),
            "values": [format_extended(v) for v in self.values],
        }


def slice_integral(source, x0: float, radius: float, t: float, alpha: float, levels: int = DEFAULT_LEVELS):
    """``int_{B(x0, radius)} u(., t)**alpha`` with the shell divergence test; INF when it fails."""
    edges = dyadic_shells(radius, levels)
    radii, weights = _shell_nodes(source.n, x0, edges, 8, 24)
    f = _integrand(source, radii, np.full(radii.shape, float(t)), alpha, "value")
    inc = np.sum(f * weights, axis=1)
    if verdict_from_ratio(_tail_ratio(inc)) is not Verdict.Convergent:
        return INF
    return float(inc.sum())


def slice_sup_norm(source, x0: float, radius: float, t1: float, t2: float, alpha: float = 1.0, samples: int = 9):
    """Largest sampled ``int_B u(., t)**alpha`` over interior times of ``(t1, t2)``."""
    if not alpha > 0:
        raise InvalidInput("alpha must be positive")
    if not t1 < t2:
        raise InvalidInput("need t1 < t2")
    times = t1 + (np.arange(samples) + 0.5) * (t2 - t1) / samples
    if is_grid(_root(source)):
        require_inside(source, x0, radius, float(times[0]), float(times[-1]), "slice ball")
    values = [slice_integral(source, x0, radius, float(t), alpha) for t in times]
    divergent = any(v is INF for v in values)
    sup = INF if divergent else max(values)
    return SliceNorm(sup, divergent, tuple(times.tolist()), tuple(values))


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassificationReport:
    verdict: ClassVerdict
    evidence: dict

    def as_dict(self):
        return {"verdict": self.verdict.value, "evidence": self.evidence}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def default_region(source) -> Cylinder:
    root = _root(source)
    if is_grid(root):
        nodes = root.grid.nodes
        if root.grid.has_origin:
            x0, radius = 0.0, float(nodes[-1])
        else:
            x0 = 0.5 * float(nodes[0] + nodes[-1])
            radius = 0.5 * float(nodes[-1] - nodes[0])
        return Cylinder(x0, radius * (1 - 1e-9), float(root.times[0]), float(root.times[-1]))
    if getattr(root, "zero_extended", False):
        return Cylinder(0.0, 1.0, -1.0, 1.0)
    return Cylinder(0.0, 1.0, 0.0, 1.0)


def nonnegativity_shift(source, region: Cylinder, samples: int = 65) -> float:
    """``max(0, -inf u) + 1`` over a sample of the region."""
    lo = max(region.x0_radius - region.r, 0.0)
    rr = np.linspace(lo, region.x0_radius + region.r, samples)
    t_lo = region.t1
    if not is_grid(_root(source)) and not getattr(_root(source), "zero_extended", False):
        t_lo = max(t_lo, 1e-12 * max(1.0, region.t2))
    tt = np.linspace(t_lo, region.t2, samples)
    vals = source.value(rr[None, :], tt[:, None])
    vals = vals[np.isfinite(vals)]
    low = float(vals.min()) if vals.size else 0.0
    return max(0.0, -low) + 1.0


def classify(source, region: Optional[Cylinder] = None, s: Optional[float] = None, shift: bool = False) -> ClassificationReport:
    """Place a nonnegative source in the Barenblatt class or the complementary class.

    B-evidence: finite slice L1 norms, a convergent scan at the critical
    exponent and a vanishing pointwise rate. M-evidence: divergent slices, a
    divergent or logarithmic scan at the critical exponent, or a positive rate.
    Inconclusive rates are neutral; any disagreement gives Undetermined.
    """
    from .harnack import RateVerdict, pointwise_rate_detect

    region = region or default_region(source)
    applied = 0.0
    if shift:
        applied = nonnegativity_shift(source, region)
        source = Shifted(source, applied)
    medium = Medium(source.n, source.p)
    sc = exponent_table(medium).s_critical

    slice_res = slice_sup_norm(source, region.x0_radius, region.r, region.t1, region.t2, 1.0)
    scan_c = scan_at(source, region, sc, "value")
    scan_1 = scan_at(source, region, 1.0, "value")
    s_lo = region.t1
    if getattr(_root(source), "zero_extended", False) and not is_grid(_root(source)):
        s_lo = max(s_lo, 0.0)
    s = 0.5 * (s_lo + region.t2) if s is None else s
    rate = pointwise_rate_detect(source, region.x0_radius, s, r0=0.5 * region.r, tau_max=region.t2 - s)

    votes = {
        "slice": "M" if slice_res.divergent else "B",
        "scan_s_critical": "B" if scan_c.verdict is Verdict.Convergent else "M",
        "rate": {RateVerdict.PositiveRate: "M", RateVerdict.ZeroRate: "B"}.get(rate.verdict),
    }
    cast = {v for v in votes.values() if v is not None}
    if cast == {"B"}:
        verdict = ClassVerdict.ClassB
    elif cast == {"M"}:
        verdict = ClassVerdict.ClassM
    else:
        verdict = ClassVerdict.Undetermined
    evidence = {
        "source": describe(source),
        "region": {"x0_radius": region.x0_radius, "r": region.r, "t1": region.t1, "t2": region.t2},
        "shift": applied,
        "slice_sup": slice_res.as_dict(),
        "scan": {
            "s_critical": {"q": sc, "verdict": scan_c.verdict.value, "ratio": scan_c.ratio},
            "one": {"q": 1.0, "verdict": scan_1.verdict.value, "ratio": scan_1.ratio},
        },
        "rate": rate.as_dict(),
        "votes": votes,
    }
    return ClassificationReport(verdict, evidence)


# ---------------------------------------------------------------------------
# Caccioppoli and Sobolev sides


def _space_edges(cutoff: CutoffFn, source, pieces=4, levels=30):
    lo, hi = cutoff.radial.support
    lo = max(lo, 0.0) if math.isfinite(lo) else 0.0
    knots = sorted({lo, hi, *[k for k in cutoff.radial.knots() if lo <= k <= hi]})
    edges = []
    for a, b in zip(knots[:-1], knots[1:]):
        edges.extend(np.linspace(a, b, pieces + 1)[:-1])
    edges.append(knots[-1])
    edges = np.array(edges)
    if edges[0] == 0.0:
        edges = np.union1d(edges, edges[1] * 2.0 ** -np.arange(1, levels + 1))
        edges = edges[edges > 0]
    root = _root(source)
    if is_grid(root) and cutoff.x0_radius == 0.0:
        g = root.grid.nodes
        edges = np.union1d(edges, g[(g > edges[0]) & (g < edges[-1])])
    return edges


def _time_edges(cutoff: CutoffFn, source, pieces=8):
    a, b = cutoff.t_support
    knots = sorted({a, b, *[k for k in cutoff.temporal.knots() if a <= k <= b]})
    edges = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi > lo:
            edges.extend(np.linspace(lo, hi, pieces + 1)[:-1])
    edges.append(knots[-1])
    edges = np.array(edges)
    root = _root(source)
    if is_grid(root):
        edges = np.union1d(edges, root.times[(root.times > edges[0]) & (root.times < edges[-1])])
    return edges


def _cutoff_rule(cutoff: CutoffFn, source, order=6, angular_order=16):
    rho_e = _space_edges(cutoff, source)
    rho, rw = panel_rule(rho_e, order)
    radii, sw = ball_rule(source.n, cutoff.x0_radius, rho, rw, angular_order)
    # distance to the cutoff center for each spatial node
    if cutoff.x0_radius == 0.0:
        dist = rho
    else:
        reps = radii.size // rho.size
        dist = np.repeat(rho, reps) if source.n > 1 else np.concatenate([rho, rho])
    tn, tw = panel_rule(_time_edges(cutoff, source), order)
    return radii, sw, dist, tn, tw


def _check_support(source, cutoff: CutoffFn):
    lo, hi = cutoff.radial.support
    a, b = cutoff.t_support
    if cutoff.x0_radius == 0.0 and lo > 0:
        # annular support: only the band lo <= |x| <= hi has to be covered
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        require_inside(source, mid, half, a, b, "cutoff support")
    else:
        require_inside(source, cutoff.x0_radius, hi, a, b, "cutoff support")


def _is_supersolution(source) -> bool:
    from .grid_solver import CellClass, SolverConfig, residual_sign

    root = _root(source)
    if is_grid(root):
        rmap = residual_sign(root, SolverConfig())
        return rmap.all_in(CellClass.Solution, CellClass.Supersolution)
    if isinstance(root, (SolutionFamily, ConstantField)):
        return True
    return bool(getattr(root, "is_solution", False))


def caccioppoli_sides(source, cutoff: CutoffFn, eps: float) -> dict:
    """Sides of the Caccioppoli estimate for negative powers of a supersolution."""
    if not 0 < eps < 1:
        raise InvalidInput("eps must lie in (0, 1)")
    _check_support(source, cutoff)
    if not _is_supersolution(source):
        raise NotSupersolution("the field fails the discrete supersolution check")
    p = source.p
    radii, sw, dist, tn, tw = _cutoff_rule(cutoff, source)
    R, T = radii[None, :], tn[:, None]
    D = dist[None, :]
    u = source.value(R, T)
    if np.any(u <= 0):
        raise InvalidInput("the Caccioppoli sides need a positive source; shift it first")
    g = np.abs(gradient_of(source, R, T))
    phi = cutoff.value(D, T)
    phip = phi**p
    with np.errstate(invalid="ignore"):
        grad_int = np.where(phip > 0, g**p * u ** (-eps - 1) * phip, 0.0)
    slice_vals = (u ** (1 - eps) * phip) @ sw
    rhs_int = u ** (p - 1 - eps) * cutoff.grad_abs(D, T) ** p + u ** (1 - eps) * cutoff.dt_phi_p(D, T, p)
    grad_term = float(tw @ grad_int @ sw)
    sup_term = float(slice_vals.max())
    rhs = float(tw @ rhs_int @ sw)
    return {"grad_term": grad_term, "sup_term": sup_term, "rhs": rhs,
            "constant": (grad_term + sup_term) / rhs if rhs > 0 else math.nan}


def sobolev_sides(source, cutoff: CutoffFn, m: float) -> dict:
    """Sides of the parabolic Sobolev inequality for ``phi u`` with ``q = p + p m / n``.

    The cutoff must be centered at the origin, so ``grad(phi u)`` stays radial.
    """
    if not m > 0:
        raise InvalidInput("m must be positive")
    if cutoff.x0_radius != 0.0:
        raise InvalidInput("the Sobolev sides need a cutoff centered at the origin")
    _check_support(source, cutoff)
    n, p = source.n, source.p
    q = p + p * m / n
    radii, sw, dist, tn, tw = _cutoff_rule(cutoff, source)
    R, T = radii[None, :], tn[:, None]
    u = source.value(R, T)
    eta, deta, zeta, _ = cutoff.parts(R, T)
    phi = eta * zeta
    w = np.abs(phi * u)
    grad_w = np.abs(phi * gradient_of(source, R, T) + u * deta * zeta)
    lhs = float(tw @ w**q @ sw)
    grad_factor = float(tw @ grad_w**p @ sw)
    sup_factor = float(((w**m) @ sw).max()) ** (p / n)
    denom = grad_factor * sup_factor
    return {"lhs": lhs, "grad_factor": grad_factor, "sup_factor": sup_factor, "q": q,
            "constant": lhs / denom if denom > 0 else math.nan}
