"""Evaluable sources: anything with ``value(r, t)`` and, optionally, ``gradient(r, t)``.

Closed-form families and grid fields already satisfy the protocol. The small
wrappers here cover constants, shifts by a constant, truncation ``min(u, k)``
and plain callables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContainmentViolation, NonEvaluable
from .exponents import Medium


@dataclass(frozen=True)
class ConstantField:
    """The constant solution ``u = K``."""

    K: float
    n: int
    p: float
    zero_extended: bool = False
    kind = "constant"
    is_solution = True
    all_time = True

    @property
    def medium(self):
        return Medium(self.n, self.p)

    def value(self, r, t):
        return np.full(np.broadcast(np.asarray(r), np.asarray(t)).shape, float(self.K))

    def gradient(self, r, t):
        return np.zeros(np.broadcast(np.asarray(r), np.asarray(t)).shape)

    def bounded_near(self, x0_radius, s):
        return True

    def describe(self):
        return {"family": "constant", "K": self.K, "n": self.n, "p": self.p}


@dataclass(frozen=True)
class Shifted:
    """``u + shift``; the operator only sees derivatives, so solutions stay solutions."""

    base: object
    shift: float

    def __getattr__(self, name):
        return getattr(self.base, name)

    def value(self, r, t):
        return self.base.value(r, t) + self.shift

    def gradient(self, r, t):
        return gradient_of(self.base, r, t)

    def describe(self):
        return {**describe(self.base), "shift": self.shift}


@dataclass(frozen=True)
class Truncated:
    """``min(u, k)``; a truncated supersolution is again a supersolution."""

    base: object
    k: float

    def __getattr__(self, name):
        return getattr(self.base, name)

    @property
    def is_solution(self):
        return False

    def value(self, r, t):
        return np.minimum(self.base.value(r, t), self.k)

    def gradient(self, r, t):
        u = self.base.value(r, t)
        with np.errstate(invalid="ignore"):
            return np.where(u < self.k, gradient_of(self.base, r, t), 0.0)

    def bounded_near(self, x0_radius, s):
        return True

    def describe(self):
        return {**describe(self.base), "truncation": self.k}


@dataclass(frozen=True)
class CallableSource:
    """Wrap ``f(r, t)`` (and optionally its radial derivative) as a source."""

    fn: Callable
    n: int
    p: float
    grad: Optional[Callable] = None
    zero_extended: bool = False
    is_solution: bool = False
    all_time = True

    def value(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        return np.asarray(self.fn(r, t), dtype=float)

    def gradient(self, r, t):
        if self.grad is None:
            raise NonEvaluable("this source has no gradient")
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        return np.asarray(self.grad(r, t), dtype=float)

    def bounded_near(self, x0_radius, s):
        return True

    def describe(self):
        return {"family": "callable", "n": self.n, "p": self.p}


def gradient_of(source, r, t):
    grad = getattr(source, "gradient", None)
    if grad is None:
        raise NonEvaluable(f"{type(source).__name__} does not provide gradients")
    return grad(r, t)


def describe(source) -> dict:
    fn = getattr(source, "describe", None)
    return fn() if fn is not None else {"family": type(source).__name__}


def is_grid(source) -> bool:
    return hasattr(source, "grid") and hasattr(source, "times")


def domain(source):
    """``(r_lo, r_hi, t_lo, t_hi, has_origin)``; unbounded sides are infinite."""
    base = source
    while isinstance(base, (Shifted, Truncated)):
        base = base.base
    if is_grid(base):
        nodes = base.grid.nodes
        return float(nodes[0]), float(nodes[-1]), float(base.times[0]), float(base.times[-1]), bool(nodes[0] == 0)
    unbounded = getattr(base, "zero_extended", False) or getattr(base, "all_time", False)
    t_lo = -math.inf if unbounded else 0.0
    return 0.0, math.inf, t_lo, math.inf, True


def require_inside(source, x0: float, radius: float, t_lo: float, t_hi: float, what: str = "region") -> None:
    """Raise ContainmentViolation unless ``B(x0, radius) x [t_lo, t_hi]`` lies in the domain.

    Closed-form families without zero extension need ``t_lo > 0``; grid fields
    need the radial band and the time interval inside their grid.
    """
    r_lo, r_hi, s_lo, s_hi, origin = domain(source)
    eps = 1e-12 * max(1.0, abs(x0) + radius)
    inner_ok = origin if x0 - radius <= 0 else x0 - radius >= r_lo - eps
    radial_ok = x0 + radius <= r_hi + eps and inner_ok
    if is_grid(_root(source)):
        slack = 1e-12 * max(1.0, abs(s_lo), abs(s_hi))
        time_ok = t_lo >= s_lo - slack and t_hi <= s_hi + slack
    else:
        time_ok = math.isinf(s_lo) or t_lo > s_lo
    if not (radial_ok and time_ok):
        raise ContainmentViolation(
            f"{what} B({x0:g},{radius:g}) x [{t_lo:g},{t_hi:g}] is not inside the source domain"
        )


def _root(source):
    while isinstance(source, (Shifted, Truncated)):
        source = source.base
    return source
