"""Explicit radial solutions of the parabolic p-Laplace equation.

Families
--------
SingularBarenblatt     fast-diffusion Barenblatt profile, 2n/(n+1) < p < 2
DegenerateBarenblatt   compactly supported profile, p > 2
PowerSupersolution     ``(c t / |x|**q)**(1/(2-p))``, 1 < p < 2
InfinitePointSource    the power family with ``q = p`` and its canonical ``c``

Every family evaluates value, radial derivative, time derivative and the
radial flux divergence ``r**(1-n) d/dr (r**(n-1) |u_r|**(p-2) u_r)`` from
analytic formulas. ``pde_residual_fd`` recomputes the residual from values
alone and serves as the independent check on those formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import (
    BracketFailure,
    DegenerateConstant,
    InvalidInput,
    MarkerArithmeticError,
    NonpositiveFactor,
    QuadratureFailure,
    StepTooLarge,
    UndefinedPoint,
)
from .exponents import Medium, Regime
from .quadrature import log_rule, sphere_area


class Marker:
    """Non-numeric evaluation outcome; any arithmetic with it raises."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def _refuse(self, *args):
        raise MarkerArithmeticError(f"arithmetic with the {self.name} marker")

    __add__ = __radd__ = __sub__ = __rsub__ = _refuse
    __mul__ = __rmul__ = __truediv__ = __rtruediv__ = _refuse
    __pow__ = __rpow__ = __neg__ = __abs__ = __float__ = _refuse
    __lt__ = __le__ = __gt__ = __ge__ = _refuse

    def __reduce__(self):
        return (_marker, (self.name,))


INF = Marker("inf")
UNDEFINED = Marker("undefined")


def _marker(name):
    return INF if name == "inf" else UNDEFINED


ExtendedReal = Union[float, Marker]


def to_float(x: ExtendedReal) -> float:
    """Plain float view of an extended real: INF -> inf, UNDEFINED -> nan."""
    if x is INF:
        return math.inf
    if x is UNDEFINED:
        return math.nan
    return float(x)


def format_extended(x: ExtendedReal) -> str:
    if x is INF:
        return "inf"
    if x is UNDEFINED:
        return "nan"
    return f"{x:.17g}"


@dataclass(frozen=True)
class EvalResult:
    value: ExtendedReal
    radial_gradient: ExtendedReal
    time_derivative: ExtendedReal
    flux_divergence: ExtendedReal
    residual: ExtendedReal

    FIELDS = ("value", "radial_gradient", "time_derivative", "flux_divergence", "residual")


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class SolutionFamily:
    medium: Medium
    zero_extended: bool = False

    kind = "abstract"
    is_solution = True

    @property
    def n(self):
        return self.medium.n

    @property
    def p(self):
        return self.medium.p

    def _fields(self, r, t):
        raise NotImplementedError

    def singular_mask(self, r, t):
        return np.zeros(np.broadcast(r, t).shape, dtype=bool)

    def arrays(self, r, t):
        """Vectorized (value, u_r, u_t, flux divergence).

        Singular points give ``inf`` for the value and ``nan`` elsewhere;
        with zero extension all four vanish for ``t <= 0``.
        """
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        if np.any(r < 0):
            raise InvalidInput("radius must be nonnegative")
        past = t <= 0
        if np.any(past) and not self.zero_extended:
            raise UndefinedPoint(f"{self.kind} is not defined for t <= 0 without zero extension")
        out = [np.zeros(r.shape) for _ in range(4)]
        live = ~past
        if np.any(live):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                vals = self._fields(r[live], t[live])
            for slot, v in zip(out, vals):
                slot[live] = v
        return tuple(out)

    def value(self, r, t):
        return self.arrays(r, t)[0]

    def gradient(self, r, t):
        return self.arrays(r, t)[1]

    def residual(self, r, t):
        u, ur, ut, div = self.arrays(r, t)
        return ut - div

    def bounded_near(self, x0_radius: float, s: float) -> bool:
        return True

    def describe(self) -> dict:
        return {"family": self.kind, "n": self.n, "p": self.p, "zero_extended": self.zero_extended}


@dataclass(frozen=True)
class _BarenblattBase(SolutionFamily):
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidInput("Barenblatt constant must be positive")
        if self.medium.regime is not self.required_regime:
            raise InvalidInput(f"{self.kind} needs the {self.required_regime.value} regime")

    def _fields(self, r, t):
        n, p = self.n, self.p
        lam = n * (p - 2) + p
        beta = p / (lam * (p - 1))
        gamma = p / (p - 1)
        kappa = (2 - p) / p
        e = -(p - 1) / (2 - p)
        tau = lam * t
        amp = tau ** (-n / lam)
        z = tau ** (-beta) * r**gamma
        w = self.c + kappa * z
        pos = w > 0
        wp = np.where(pos, w, 1.0)
        u = np.where(pos, amp * wp**e, 0.0)
        ur = np.where(pos, -amp * wp ** (e - 1) * tau ** (-beta) * r ** (gamma - 1), 0.0)
        ut = np.where(pos, amp * wp ** (e - 1) * (z - n * wp) / (lam * t), 0.0)
        flux_amp = (amp * tau ** (-beta)) ** (p - 1)
        div = np.where(pos, flux_amp * wp ** (e - 1) * (z - n * wp), 0.0)
        return u, ur, ut, div

    def scale_length(self, t: float) -> float:
        """Radius at which the two terms of the inner bracket are equal."""
        n, p = self.n, self.p
        lam = n * (p - 2) + p
        beta = p / (lam * (p - 1))
        gamma = p / (p - 1)
        kappa = abs(2 - p) / p
        return (self.c * (lam * t) ** beta / kappa) ** (1 / gamma)

    def describe(self):
        return {**super().describe(), "c": self.c}


@dataclass(frozen=True)
class SingularBarenblatt(_BarenblattBase):
    kind = "sbb"
    required_regime = Regime.SupercriticalFast


@dataclass(frozen=True)
class DegenerateBarenblatt(_BarenblattBase):
    kind = "dbb"
    required_regime = Regime.SlowDiffusion

    def free_boundary(self, t: float) -> float:
        return self.scale_length(t)


@dataclass(frozen=True)
class PowerSupersolution(SolutionFamily):
    q: float = 2.0
    c: Optional[float] = None

    kind = "power"

    def __post_init__(self):
        if not 1 < self.p < 2:
            raise InvalidInput("the power family needs 1 < p < 2")
        if self.c is None:
            object.__setattr__(self, "c", power_constant(self.medium, self.q))
        if not self.c > 0:
            raise InvalidInput("power-family constant must be positive")

    @property
    def is_solution(self):
        return self.q == self.p and math.isclose(self.c, _ips_constant_raw(self.medium), rel_tol=1e-12)

    @property
    def spatial_exponent(self) -> float:
        return self.q / (2 - self.p)

    def _fields(self, r, t):
        n, p, q, c = self.n, self.p, self.q, self.c
        a = q / (2 - p)
        origin = r == 0
        rr = np.where(origin, 1.0, r)
        u = (c * t) ** (1 / (2 - p)) * rr ** (-a)
        ur = -a * u / rr
        ut = u / ((2 - p) * t)
        div = a ** (p - 1) * (a - q + p - n) * (c * t) ** ((p - 1) / (2 - p)) * rr ** (q - p - a)
        u = np.where(origin, np.inf, u)
        ur, ut, div = (np.where(origin, np.nan, v) for v in (ur, ut, div))
        return u, ur, ut, div

    def singular_mask(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        return (r == 0) & (t > 0)

    def bounded_near(self, x0_radius, s):
        return x0_radius > 0 or s <= 0

    def describe(self):
        return {**super().describe(), "q": self.q, "c": self.c}


@dataclass(frozen=True)
class InfinitePointSource(PowerSupersolution):
    q: float = field(default=None)
    c: Optional[float] = field(default=None)

    kind = "ips"

    def __post_init__(self):
        if self.medium.regime is not Regime.SupercriticalFast:
            raise InvalidInput("the infinite point source needs 2n/(n+1) < p < 2")
        object.__setattr__(self, "q", self.medium.p)
        object.__setattr__(self, "c", ips_constant(self.medium))

    @property
    def is_solution(self):
        return True

    def describe(self):
        return SolutionFamily.describe(self) | {"c": self.c}


# ---------------------------------------------------------------------------
# constants


def _ips_constant_raw(medium: Medium) -> float:
    p, n = medium.p, medium.n
    a = p / (2 - p)
    return (2 - p) * a ** (p - 1) * (a - n)


def ips_constant(medium: Medium) -> float:
    """Constant ``(2-p) (p/(2-p))**(p-1) (p/(2-p) - n)`` of the point source."""
    if not 1 < medium.p < 2:
        raise InvalidInput("the point-source constant needs 1 < p < 2")
    p, n = medium.p, medium.n
    if medium.regime is not Regime.SupercriticalFast or p / (2 - p) - n <= 0:
        raise DegenerateConstant(f"p/(2-p) - n <= 0 for n={n}, p={p}")
    return _ips_constant_raw(medium)


def power_positivity_factor(medium: Medium, q: float) -> float:
    p, n = medium.p, medium.n
    return q / (2 - p) - q + p - n


def power_constant(medium: Medium, q: float) -> float:
    """Canonical constant making the power family a supersolution in B(0,1)."""
    p = medium.p
    if not 1 < p < 2:
        raise InvalidInput("the power family needs 1 < p < 2")
    factor = power_positivity_factor(medium, q)
    if not factor > 0:
        raise NonpositiveFactor(f"q/(2-p) - q + p - n = {factor} <= 0 for q={q}")
    return (2 - p) * (q / (2 - p)) ** (p - 1) * factor


# ---------------------------------------------------------------------------
# pointwise evaluation


def evaluate(family: SolutionFamily, radius: float, t: float) -> EvalResult:
    if radius < 0:
        raise InvalidInput("radius must be nonnegative")
    u, ur, ut, div = (float(v) for v in family.arrays(radius, t))
    if family.singular_mask(radius, t):
        return EvalResult(INF, UNDEFINED, UNDEFINED, UNDEFINED, UNDEFINED)
    return EvalResult(u, ur, ut, div, ut - div)


def pde_residual_fd(family: SolutionFamily, radius: float, t: float, h: float) -> float:
    """Central-difference residual ``u_t - div(|u_r|**(p-2) u_r)`` from values only."""
    if not (0 < h < radius / 4 and h < t / 4):
        raise StepTooLarge(f"need 0 < h < radius/4 and h < t/4 (h={h}, radius={radius}, t={t})")
    n, p = family.n, family.p
    r, tt = radius, t
    pts_r = np.array([r, r, r - h, r, r + h])
    pts_t = np.array([tt - h, tt + h, tt, tt, tt])
    um_t, up_t, u_l, u_c, u_r = family.value(pts_r, pts_t)
    ut = (up_t - um_t) / (2 * h)
    d_plus = (u_r - u_c) / h
    d_minus = (u_c - u_l) / h
    f_plus = abs(d_plus) ** (p - 2) * d_plus if d_plus != 0 else 0.0
    f_minus = abs(d_minus) ** (p - 2) * d_minus if d_minus != 0 else 0.0
    div = ((r + h / 2) ** (n - 1) * f_plus - (r - h / 2) ** (n - 1) * f_minus) / (h * r ** (n - 1))
    return float(ut - div)


def pointwise_rate_exact(family: SolutionFamily, x0_radius: float, s: float) -> ExtendedReal:
    """``liminf u(x,t) |x - x0|**(p/(2-p))`` as ``(x,t) -> (x0,s)`` with ``t > s``."""
    if s <= 0 and not family.zero_extended:
        raise UndefinedPoint("family is undefined before t = 0 without zero extension")
    if isinstance(family, PowerSupersolution) and x0_radius == 0 and s > 0:
        p, q = family.p, family.q
        if q > p:
            return INF
        if q < p:
            return 0.0
        return (family.c * s) ** (1 / (2 - p))
    return 0.0


# ---------------------------------------------------------------------------
# mass


@dataclass(frozen=True)
class MassReport:
    c_used: float
    time_samples: tuple
    masses: tuple
    max_relative_spread: float


def _barenblatt_mass(medium: Medium, c: float, t: float, rtol: float = 1e-14) -> float:
    family = SingularBarenblatt(medium, c=c)
    n, p = medium.n, medium.p
    ell = family.scale_length(t)
    decay = p / (2 - p)
    if decay <= n:
        raise QuadratureFailure("profile tail is not integrable")
    lo = ell * 1e-8
    u0 = float(family.value(0.0, t))
    core = sphere_area(n) * u0 * lo**n / n
    total = core
    hi = lo
    # extend decade blocks until the asymptotic tail is negligible
    for _ in range(60):
        a, hi = hi, hi * 1e2
        nodes, weights = log_rule(a, hi, per_decade=4, order=16)
        total += sphere_area(n) * float(np.sum(weights * nodes ** (n - 1) * family.value(nodes, t)))
        u_hi = float(family.value(hi, t))
        tail = sphere_area(n) * u_hi * hi**n / (decay - n)
        if tail < rtol * total and hi > ell:
            return total + tail
    raise QuadratureFailure("tail estimate did not reach tolerance")


def barenblatt_mass(family: SingularBarenblatt, t: float = 1.0) -> float:
    """Total mass of a fast-diffusion Barenblatt profile by radial quadrature."""
    return _barenblatt_mass(family.medium, family.c, t)


def normalize_mass(medium: Medium, target: float = 1.0, t: float = 1.0) -> float:
    """Barenblatt constant ``c`` whose profile carries total mass ``target``."""
    if medium.regime is not Regime.SupercriticalFast:
        raise InvalidInput("mass normalization needs 2n/(n+1) < p < 2")
    if not target > 0:
        raise InvalidInput("target mass must be positive")

    def excess(log_c):
        return _barenblatt_mass(medium, math.exp(log_c), t) - target

    lo = hi = 0.0
    f_lo = f_hi = excess(0.0)
    for _ in range(200):
        if f_lo > 0 > f_hi:
            break
        if f_hi >= 0:
            hi += 1.0
            f_hi = excess(hi)
        if f_lo <= 0:
            lo -= 1.0
            f_lo = excess(lo)
    else:
        raise BracketFailure("could not bracket the normalizing constant")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def mass_report(medium: Medium, c: float, times=(0.1, 1.0, 10.0)) -> MassReport:
    masses = tuple(_barenblatt_mass(medium, c, t) for t in times)
    spread = (max(masses) - min(masses)) / (sum(masses) / len(masses))
    return MassReport(c, tuple(times), masses, spread)


# ---------------------------------------------------------------------------
# construction helpers


FAMILY_KINDS = ("sbb", "dbb", "ips", "power")


def make_family(kind: str, medium: Medium, *, c=None, q=None, zero_extended=False) -> SolutionFamily:
    """Build a family from its short tag; ``sbb`` defaults to unit mass."""
    if kind == "sbb":
        if c is None:
            c = normalize_mass(medium)
        return SingularBarenblatt(medium, zero_extended=zero_extended, c=float(c))
    if kind == "dbb":
        return DegenerateBarenblatt(medium, zero_extended=zero_extended, c=float(1.0 if c is None else c))
    if kind == "ips":
        return InfinitePointSource(medium, zero_extended=zero_extended)
    if kind == "power":
        return PowerSupersolution(
            medium, zero_extended=zero_extended, q=float(2.0 if q is None else q),
            c=None if c is None else float(c),
        )
    raise InvalidInput(f"unknown family {kind!r}; choose from {FAMILY_KINDS}")


def write_eval_csv(family: SolutionFamily, points, stream) -> None:
    import csv

    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("radius", "t") + EvalResult.FIELDS)
    for radius, t in points:
        res = evaluate(family, radius, t)
        writer.writerow(
            [f"{radius:.17g}", f"{t:.17g}"] + [format_extended(getattr(res, f)) for f in EvalResult.FIELDS]
        )
