"""Gauss-Legendre panel rules and ball quadrature for radial integrands."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n: int, radius: float) -> float:
    return sphere_area(n) * radius**n / n


@lru_cache(maxsize=None)
def _legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_rule(edges, order: int = 12):
    """Composite Gauss-Legendre nodes/weights over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = _legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def log_edges(a: float, b: float, per_decade: int = 3):
    if not 0 < a < b:
        raise ValueError("geometric panels need 0 < a < b")
    count = max(1, int(math.ceil(per_decade * math.log10(b / a))))
    return np.geomspace(a, b, count + 1)


def log_rule(a: float, b: float, per_decade: int = 3, order: int = 12):
    return panel_rule(log_edges(a, b, per_decade), order)


def uniform_rule(a: float, b: float, panels: int = 8, order: int = 12):
    return panel_rule(np.linspace(a, b, panels + 1), order)


def dyadic_shells(r: float, levels: int):
    """Edges ``r * 2**-k`` for k = 0..levels, decreasing."""
    return r * 2.0 ** -np.arange(levels + 1)


def ball_rule(n: int, x0: float, rho_nodes, rho_weights, angular_order: int = 24):
    """Quadrature over a region of B(x0, .) given in distance-to-center nodes.

    The ball center sits at distance ``x0`` from the origin. The returned
    ``radii`` are distances from the origin, so a radial integrand ``f(|x|)``
    integrates as ``sum(weights * f(radii))``.
    """
    rho_nodes = np.asarray(rho_nodes, dtype=float)
    rho_weights = np.asarray(rho_weights, dtype=float)
    if x0 == 0.0:
        return rho_nodes, sphere_area(n) * rho_weights * rho_nodes ** (n - 1)
    if n == 1:
        radii = np.concatenate([np.abs(x0 + rho_nodes), np.abs(x0 - rho_nodes)])
        weights = np.concatenate([rho_weights, rho_weights])
        return radii, weights
    x, w = _legendre(angular_order)
    theta = 0.5 * math.pi * (x + 1.0)
    wt = 0.5 * math.pi * w * np.sin(theta) ** (n - 2) * sphere_area(n - 1)
    rho = rho_nodes[:, None]
    radii = np.sqrt(np.maximum(x0**2 + rho**2 + 2.0 * x0 * rho * np.cos(theta), 0.0))
    weights = (rho_weights * rho_nodes ** (n - 1))[:, None] * wt
    return radii.ravel(), weights.ravel()


def shifted_mean(values, weights) -> float:
    """Weighted mean computed about the minimum sample; exact for constants."""
    values = np.asarray(values, dtype=float)
    base = float(values.min())
    return base + float(np.sum(weights * (values - base)) / np.sum(weights))
