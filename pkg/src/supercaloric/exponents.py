"""Parameter regimes, critical exponents and the Moser exponent ladder.

Everything here is a pure value computation on ``Medium(n, p)``. Table
entries are evaluated in exact rational arithmetic on the binary value of
``p`` and rounded once to float, so signs (e.g. of ``lambda``) never disagree
with the exact regime classification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import CapExceeded, InvalidInput, NonIterable

#: Comparison tolerance for exponent arithmetic.
TOL = 1e-12


class Regime(enum.Enum):
    SlowDiffusion = "SlowDiffusion"
    Heat = "Heat"
    SupercriticalFast = "SupercriticalFast"
    CriticalOrSubcritical = "CriticalOrSubcritical"


@dataclass(frozen=True)
class Medium:
    """Spatial dimension ``n`` and diffusion exponent ``p > 1``."""

    n: int
    p: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidInput(f"dimension must be a positive integer, got {self.n!r}")
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise InvalidInput(f"p must exceed 1, got {self.p!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", p)

    @property
    def regime(self) -> Regime:
        return classify_regime(self)

    @property
    def critical_p(self) -> Fraction:
        return Fraction(2 * self.n, self.n + 1)


def classify_regime(medium: Medium) -> Regime:
    p = Fraction(medium.p)
    if p > 2:
        return Regime.SlowDiffusion
    if p == 2:
        return Regime.Heat
    if p > medium.critical_p:
        return Regime.SupercriticalFast
    return Regime.CriticalOrSubcritical


@dataclass(frozen=True)
class ExponentTable:
    n: int
    p: float
    lambda_: float
    q_barenblatt: float
    q_gradient: float
    s_critical: float
    g_critical: float

    def sobolev_q(self, m: float) -> float:
        """Exponent ``p + p m / n`` of the parabolic Sobolev inequality."""
        return self.p + self.p * m / self.n

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "lambda": self.lambda_,
            "q_barenblatt": self.q_barenblatt,
            "q_gradient": self.q_gradient,
            "s_critical": self.s_critical,
            "g_critical": self.g_critical,
            "sobolev_q": {"intercept": self.p, "slope": self.p / self.n},
        }


def exponent_table(medium: Medium) -> ExponentTable:
    n, p = medium.n, Fraction(medium.p)
    return ExponentTable(
        n=n,
        p=medium.p,
        lambda_=float(n * (p - 2) + p),
        q_barenblatt=float(p - 1 + p / n),
        q_gradient=float(p - 1 + Fraction(1, n + 1)),
        s_critical=float(n * (2 - p) / p),
        g_critical=float(n * (2 - p) / 2),
    )


@dataclass(frozen=True)
class MoserTrace:
    s0: float
    steps: tuple
    first_ge_one: Optional[int]
    closed_form_check: float
    closed_form: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        return {
            "s0": self.s0,
            "steps": list(self.steps),
            "first_ge_one": self.first_ge_one,
            "closed_form_check": self.closed_form_check,
        }


def moser_step(medium: Medium) -> Callable[[float], float]:
    gain = 1.0 + medium.p / medium.n
    loss = 2.0 - medium.p
    return lambda s: s * gain - loss


def moser_sequence(medium: Medium, s0: float, cap: int = 64) -> MoserTrace:
    """Iterate ``s -> s (1 + p/n) - (2 - p)`` until the exponent reaches 1.

    The recursion is checked against the closed form
    ``(1 + p/n)**i (s0 - s_c) + s_c`` at every step.
    """
    if medium.regime is not Regime.SupercriticalFast:
        raise InvalidInput("the Moser ladder needs 2n/(n+1) < p < 2")
    if cap < 1:
        raise InvalidInput("cap must be a positive integer")
    s0 = float(s0)
    sc = exponent_table(medium).s_critical
    gain = 1.0 + medium.p / medium.n
    step = moser_step(medium)

    if abs(s0 - sc) <= TOL:
        steps = (s0,) * (cap + 1)
        return MoserTrace(s0, steps, None, 0.0, steps)
    if s0 < sc:
        raise NonIterable(f"s0={s0} is below the critical exponent {sc}; the ladder decreases")

    steps = [s0]
    closed = [s0]
    while steps[-1] < 1.0:
        if len(steps) > cap:
            raise CapExceeded(f"exponent 1 not reached within {cap} steps from s0={s0}")
        i = len(steps)
        steps.append(step(steps[-1]))
        closed.append(gain**i * (s0 - sc) + sc)
    check = max(abs(a - b) for a, b in zip(steps, closed))
    return MoserTrace(s0, tuple(steps), len(steps) - 1, check, tuple(closed))
