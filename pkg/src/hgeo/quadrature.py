"""Composite Gauss-Legendre rules, including a graded rule for r^(-1/2)-type endpoints."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from ._reduce import tree_sum

NODES_PER_PANEL = 64


@lru_cache(maxsize=8)
def _gauss(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class Rule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return tree_sum(self.weights * f(self.nodes))


def gauss_panels(a: float, b: float, panels: int = 4, m: int = NODES_PER_PANEL) -> Rule:
    x, w = _gauss(m)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return Rule(nodes, weights)


def sine_graded(R: float, panels: int = 4, m: int = NODES_PER_PANEL) -> Rule:
    """Rule on [0, R] via r = R sin(theta).

    The Jacobian R cos(theta) cancels a (R^2 - r^2)^(-1/2) endpoint factor,
    so integrands of that type become smooth in theta.
    """
    base = gauss_panels(0.0, 0.5 * np.pi, panels, m)
    th = base.nodes
    return Rule(R * np.sin(th), base.weights * R * np.cos(th))


def radial_integral(f: Callable[[np.ndarray], np.ndarray], R: float, dim: int,
                    panels: int = 4, m: int = NODES_PER_PANEL) -> float:
    """∫ over B(0,R) ⊂ R^dim of a radial function, as σ ∫ f(r) r^(dim-1) dr."""
    from scipy.special import gamma

    sigma = 2.0 * np.pi ** (dim / 2) / gamma(dim / 2)
    rule = sine_graded(R, panels, m)
    return sigma * rule.integrate(lambda r: f(r) * r ** (dim - 1))


def error_estimate(f: Callable[[np.ndarray], np.ndarray], R: float, dim: int,
                   panels: int = 4) -> tuple[float, float]:
    """Value and |difference| against a rule with twice the panels."""
    coarse = radial_integral(f, R, dim, panels)
    fine = radial_integral(f, R, dim, 2 * panels)
    return fine, abs(fine - coarse)
