"""Closed-form isoperimetric profile and constants.

The profile is written in the variable s = |z|^2 / 4. For the critical
multiplier lam = -(Q-2)/R the profile in |z| = r reads

    u_R(r) = pi R^2/8 + (r/4) sqrt(R^2 - r^2) - (R^2/4) arcsin(r/R),

which does not depend on n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammaln

from .errors import RejectedInput
from .group import GroupContext
from .quadrature import gauss_panels, radial_integral


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim."""
    return 2.0 * np.pi ** (dim / 2) / gamma(dim / 2)


def critical_lam(R: float, ctx: GroupContext) -> float:
    return -(ctx.Q - 2) / R


@dataclass(frozen=True)
class RadialProfile:
    n: int
    R: float
    lam: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise RejectedInput("n must be >= 1")
        if not self.R > 0:
            raise RejectedInput("R must be positive")
        Q = 2 * self.n + 2
        lo = -(Q - 2) / self.R
        if self.lam == 0:
            raise RejectedInput("lam = 0 is the H-minimal case, which is excluded")
        if not (lo * (1 + 1e-14) <= self.lam < 0):
            raise RejectedInput(f"lam must lie in [{lo}, 0), got {self.lam}")

    @classmethod
    def critical(cls, n: int, R: float = 1.0) -> RadialProfile:
        return cls(n, R, -(2 * n) / R)

    @property
    def Q(self) -> int:
        return 2 * self.n + 2

    @property
    def beta(self) -> float:
        return (self.Q - 2) / (2.0 * self.lam)

    @property
    def s_max(self) -> float:
        return self.R * self.R / 4.0

    @property
    def is_critical(self) -> bool:
        return abs(self.lam * self.R + (self.Q - 2)) <= 1e-14 * (self.Q - 2)

    @property
    def C(self) -> float:
        b2 = self.beta ** 2
        sm = self.s_max
        ratio = min(1.0, np.sqrt(sm) / abs(self.beta))
        return -np.sqrt(max(sm * (b2 - sm), 0.0)) + b2 * np.arcsin(ratio)

    # s-variable evaluators --------------------------------------------------
    def height(self, s):
        s = np.asarray(s, dtype=float)
        b = self.beta
        b2 = b * b
        root = np.sqrt(np.clip(s * (b2 - s), 0.0, None))
        ratio = np.clip(np.sqrt(np.clip(s, 0.0, None)) / abs(b), 0.0, 1.0)
        val = self.C + root - b2 * np.arcsin(ratio)
        val = np.where(s >= self.s_max, 0.0, np.maximum(val, 0.0))
        return val if val.ndim else float(val)

    def slope(self, s):
        s = np.asarray(s, dtype=float)
        val = -np.sqrt(s / (self.beta ** 2 - s))
        return val if val.ndim else float(val)

    def second(self, s):
        s = np.asarray(s, dtype=float)
        b2 = self.beta ** 2
        val = -b2 / (2.0 * np.sqrt(s) * (b2 - s) ** 1.5)
        return val if val.ndim else float(val)

    # r-variable evaluators ----------------------------------------------------
    def u(self, r):
        r = np.asarray(r, dtype=float)
        return self.height(np.minimum(r * r / 4.0, self.s_max))

    def du(self, r):
        """d/dr of u(r); unbounded at r = R for the critical profile."""
        r = np.asarray(r, dtype=float)
        s = r * r / 4.0
        b2 = self.beta ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -0.5 * r * np.sqrt(s / (b2 - s))
        return val if val.ndim else float(val)


def _check_s(p: RadialProfile, s, closed: bool) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(arr > p.s_max) or (not closed and np.any(arr >= p.s_max)):
        bound = "]" if closed else ")"
        raise RejectedInput(f"s must lie in [0, {p.s_max}{bound}")
    return arr


def profile_height(p: RadialProfile, s):
    _check_s(p, s, closed=True)
    return p.height(s)


def profile_slope(p: RadialProfile, s):
    _check_s(p, s, closed=False)
    return p.slope(s)


def profile_integral_form(r, nodes: int = 64):
    """(1/2) ∫_{arcsin r}^{pi/2} sin^2 τ dτ by Gauss-Legendre, R = 1."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    for k, rk in enumerate(r):
        rule = gauss_panels(float(np.arcsin(rk)), 0.5 * np.pi, 1, nodes)
        out[k] = 0.5 * float(np.sum(rule.weights * np.sin(rule.nodes) ** 2))
    return out


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def _radius_coefficient(Q: int) -> float:
    logc = (np.log(Q - 2) + gammaln((Q + 2) / 2) + gammaln((Q - 2) / 2)
            - 0.5 * (Q - 1) * np.log(np.pi) - gammaln((Q + 1) / 2))
    return float(np.exp(logc / Q))


def radius_coefficient(ctx: GroupContext) -> float:
    """c with R(V) = c V^(1/Q)."""
    return _radius_coefficient(ctx.Q)


def radius_for_volume(V: float, ctx: GroupContext) -> float:
    if not V > 0:
        raise RejectedInput("V must be positive")
    return radius_coefficient(ctx) * V ** (1.0 / ctx.Q)


def half_volume(R: float, ctx: GroupContext) -> float:
    """∫ u_R over B(0, R) ⊂ R^(2n)."""
    if not R > 0:
        raise RejectedInput("R must be positive")
    Q = ctx.Q
    logv = (0.5 * (Q - 1) * np.log(np.pi) + gammaln((Q + 1) / 2)
            - np.log(2 * (Q - 2)) - gammaln((Q + 2) / 2) - gammaln((Q - 2) / 2))
    return float(np.exp(logv)) * R ** Q


def half_perimeter(R: float, ctx: GroupContext) -> float:
    """Horizontal perimeter of the graph of u_R over B(0, R)."""
    if not R > 0:
        raise RejectedInput("R must be positive")
    Q = ctx.Q
    logp = (0.5 * (Q - 1) * np.log(np.pi) + gammaln((Q - 1) / 2)
            - np.log(2.0) - gammaln(Q / 2) - gammaln((Q - 2) / 2))
    return float(np.exp(logp)) * R ** (Q - 1)


def half_volume_quadrature(R: float, ctx: GroupContext) -> float:
    """Independent check of half_volume by graded Gauss-Legendre quadrature."""
    p = RadialProfile.critical(ctx.n, R)
    return radial_integral(p.u, R, 2 * ctx.n)


def half_perimeter_quadrature(R: float, ctx: GroupContext) -> float:
    """Independent check of half_perimeter: (σ/2) ∫ r^(2n) R / sqrt(R^2 - r^2) dr."""
    dim = 2 * ctx.n
    # the sine-graded rule absorbs 1/sqrt(R^2-r^2); pass the remaining factor
    return radial_integral(lambda r: 0.5 * r * R / np.sqrt(np.maximum(R * R - r * r, 1e-300)),
                           R, dim)


def iso_constant(ctx: GroupContext) -> float:
    """Best constant C_Q in |E|^((Q-1)/Q) <= C_Q P_H(E), from its Gamma expression."""
    Q = ctx.Q
    logc = (np.log(Q - 1) + (2.0 / Q) * gammaln(Q / 2)
            - ((Q - 1) / Q) * np.log(Q) - np.log(Q - 2)
            - gammaln((Q + 1) / 2) / Q - ((Q - 1) / (2 * Q)) * np.log(np.pi))
    return float(np.exp(logc))


def iso_ratio(volume_half: float, perimeter_half: float, Q: int) -> float:
    return (2.0 * volume_half) ** ((Q - 1) / Q) / (2.0 * perimeter_half)


@dataclass(frozen=True)
class IsoConstants:
    Q: int
    R: float
    lam: float
    radius_coefficient: float
    volume_half: float
    perimeter_half: float
    C_Q: float
    H_curv: float

    def as_dict(self) -> dict:
        return {
            "Q": self.Q,
            "R": self.R,
            "lam": self.lam,
            "radius_coefficient": self.radius_coefficient,
            "volume_half": self.volume_half,
            "perimeter_half": self.perimeter_half,
            "C_Q": self.C_Q,
            "H_curv": self.H_curv,
        }


def iso_constants(ctx: GroupContext, R: float = 1.0) -> IsoConstants:
    return IsoConstants(
        Q=ctx.Q,
        R=R,
        lam=critical_lam(R, ctx),
        radius_coefficient=radius_coefficient(ctx),
        volume_half=half_volume(R, ctx),
        perimeter_half=half_perimeter(R, ctx),
        C_Q=iso_constant(ctx),
        H_curv=(ctx.Q - 2) / R,
    )


# ---------------------------------------------------------------------------
# regularity at the characteristic point
# ---------------------------------------------------------------------------

def _u1(x):
    # normalized profile as a function of the signed radial coordinate
    a = np.abs(np.asarray(x, dtype=float))
    return np.pi / 8 + 0.25 * a * np.sqrt(1.0 - a * a) - 0.25 * np.arcsin(a)


# forward 4-point stencils on offsets 0, 1, 2, 3 and their truncation orders
_STENCILS = {
    1: (np.array([-11.0, 18.0, -9.0, 2.0]) / 6.0, 3),
    2: (np.array([2.0, -5.0, 4.0, -1.0]), 2),
    3: (np.array([-1.0, 3.0, -3.0, 1.0]), 1),
}


def _one_sided(k: int, side: int, h: float) -> float:
    coef, _ = _STENCILS[k]
    pts = side * h * np.arange(4)
    # a step of -h flips the sign of odd derivatives
    return float(side ** k * (coef @ _u1(pts)) / h ** k)


def _richardson(values: list[float], order: int) -> float:
    # halving steps; error ~ h^order + h^(order+1) + ...
    table = list(values)
    p = order
    while len(table) > 1:
        f = 2.0 ** p
        table = [(f * table[i + 1] - table[i]) / (f - 1.0) for i in range(len(table) - 1)]
        p += 1
    return table[0]


@dataclass(frozen=True)
class RegularityProbe:
    Q: int
    steps: tuple[float, ...]
    left: dict[int, float]
    right: dict[int, float]

    def as_dict(self) -> dict:
        return {
            "Q": self.Q,
            "steps": list(self.steps),
            "left": {str(k): v for k, v in self.left.items()},
            "right": {str(k): v for k, v in self.right.items()},
        }


def regularity_probe(ctx: GroupContext,
                     steps: tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)) -> RegularityProbe:
    """One-sided limits at 0 of the first three derivatives of the even profile."""
    left: dict[int, float] = {}
    right: dict[int, float] = {}
    for k, (_, order) in _STENCILS.items():
        right[k] = _richardson([_one_sided(k, +1, h) for h in steps], order)
        left[k] = _richardson([_one_sided(k, -1, h) for h in steps], order)
    return RegularityProbe(Q=ctx.Q, steps=tuple(steps), left=left, right=right)
