"""Horizontal perimeter, volume, and curvature functionals for graph sets.

For a graph t = u(z) over a disk the horizontal perimeter is
∫ |∇u + z⊥/2| dz and the enclosed volume is ∫ u dz.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._reduce import tree_sum
from .closed_form import sphere_area
from .errors import RejectedInput
from .graph import DiskGraph
from .group import GroupContext
from .quadrature import sine_graded

MIN_CELLS = 16


# ---------------------------------------------------------------------------
# radial graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialSample:
    """Values u(r_k) on a grid 0 = r_0 < ... < r_K = R (piecewise linear in r)."""

    r: np.ndarray
    u: np.ndarray
    n: int = 1

    def __post_init__(self) -> None:
        r = np.asarray(self.r, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if r.ndim != 1 or r.shape != u.shape or r.size < 2:
            raise RejectedInput("r and u must be 1-D arrays of equal length >= 2")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise RejectedInput("radii must be nonnegative and strictly increasing")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "u", u)

    @property
    def R(self) -> float:
        return float(self.r[-1])


@dataclass(frozen=True)
class AnalyticRadial:
    """A radial graph given by u(r) and its derivative on [0, R]."""

    u: Callable[[np.ndarray], np.ndarray]
    du: Callable[[np.ndarray], np.ndarray]
    R: float

    @classmethod
    def of(cls, p) -> AnalyticRadial:
        if isinstance(p, AnalyticRadial):
            return p
        if hasattr(p, "u") and hasattr(p, "du") and hasattr(p, "R"):
            return cls(p.u, p.du, float(p.R))
        raise RejectedInput("expected a radial profile with u, du and R")

    def dilate(self, lam: float) -> AnalyticRadial:
        """The graph of lam^2 u(z / lam), image under the dilation by lam."""
        u, du = self.u, self.du
        return AnalyticRadial(lambda r: lam * lam * u(np.asarray(r) / lam),
                              lambda r: lam * du(np.asarray(r) / lam),
                              lam * self.R)

    def scaled(self, c: float) -> AnalyticRadial:
        u, du = self.u, self.du
        return AnalyticRadial(lambda r: c * u(r), lambda r: c * du(r), self.R)

    def sample(self, r: np.ndarray, n: int = 1) -> RadialSample:
        return RadialSample(r, self.u(r), n)


def _check_boundary(value: float, scale: float) -> None:
    if abs(value) > 1e-10 * max(1.0, scale):
        raise RejectedInput(f"graph does not vanish on the boundary (u(R) = {value:g})")


def _radial_rule_sum(integrand, R: float, dim: int, panels: int) -> float:
    rule = sine_graded(R, panels)
    return sphere_area(dim) * tree_sum(rule.weights * integrand(rule.nodes) * rule.nodes ** (dim - 1))


def _sample_parts(p: RadialSample):
    d = np.diff(p.r)
    rho = 0.5 * (p.r[1:] + p.r[:-1])
    c = sphere_area(2 * p.n) * rho ** (2 * p.n - 1) * d
    slope = np.diff(p.u) / d
    return rho, c, slope


def h_perimeter_radial(p, ctx: GroupContext, panels: int = 8, with_error: bool = False):
    """σ ∫_0^R sqrt(u'(r)^2 + r^2/4) r^(2n-1) dr.

    Analytic inputs use a graded Gauss-Legendre rule that is exact for the
    (R^2 - r^2)^(-1/2) endpoint behavior of the critical profile. Sampled
    inputs use midpoint slopes on each interval.
    """
    dim = 2 * ctx.n
    if isinstance(p, RadialSample):
        if p.n != ctx.n:
            raise RejectedInput("sample dimension does not match context")
        _check_boundary(p.u[-1], float(np.max(np.abs(p.u))))
        rho, c, slope = _sample_parts(p)
        val = tree_sum(c * np.sqrt(slope * slope + 0.25 * rho * rho))
        return (val, float("nan")) if with_error else val
    f = AnalyticRadial.of(p)
    if not f.R > 0:
        raise RejectedInput("R must be positive")
    _check_boundary(float(f.u(np.array([f.R]))[0]), float(abs(f.u(np.array([0.0]))[0])))

    def integrand(r):
        g = f.du(r)
        return np.sqrt(g * g + 0.25 * r * r)

    val = _radial_rule_sum(integrand, f.R, dim, panels)
    if not with_error:
        return val
    return val, abs(val - _radial_rule_sum(integrand, f.R, dim, panels // 2))


def volume_radial(p, ctx: GroupContext, panels: int = 8, with_error: bool = False):
    """σ ∫_0^R u(r) r^(2n-1) dr."""
    dim = 2 * ctx.n
    if isinstance(p, RadialSample):
        if p.n != ctx.n:
            raise RejectedInput("sample dimension does not match context")
        _check_boundary(p.u[-1], float(np.max(np.abs(p.u))))
        _, c, _ = _sample_parts(p)
        val = tree_sum(c * 0.5 * (p.u[1:] + p.u[:-1]))
        return (val, float("nan")) if with_error else val
    f = AnalyticRadial.of(p)
    if not f.R > 0:
        raise RejectedInput("R must be positive")
    _check_boundary(float(f.u(np.array([f.R]))[0]), float(abs(f.u(np.array([0.0]))[0])))
    val = _radial_rule_sum(f.u, f.R, dim, panels)
    if not with_error:
        return val
    return val, abs(val - _radial_rule_sum(f.u, f.R, dim, panels // 2))


# ---------------------------------------------------------------------------
# curvature of radial graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileDerivatives:
    """First and second s-derivatives of a radial profile in the variable s = |z|^2/4."""

    slope: Callable
    second: Callable
    Q: int


def mean_curvature_radial(p, s, Q: int | None = None):
    """H-mean curvature of t = ū(|z|^2/4) at s = |z|^2/4 > 0.

    -[2 s ū'' + (Q - 3) ū' (1 + ū'^2)] / [2 sqrt(s) (1 + ū'^2)^(3/2)]
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise RejectedInput("curvature is undefined on the characteristic axis (s <= 0)")
    Q = getattr(p, "Q", None) if Q is None else Q
    if Q is None:
        raise RejectedInput("homogeneous dimension Q is required")
    d1 = np.asarray(p.slope(s_arr), dtype=float)
    d2 = np.asarray(p.second(s_arr), dtype=float)
    w = 1.0 + d1 * d1
    val = -(2.0 * s_arr * d2 + (Q - 3) * d1 * w) / (2.0 * np.sqrt(s_arr) * w ** 1.5)
    return val if val.ndim else float(val)


# ---------------------------------------------------------------------------
# grid graphs (n = 1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellField:
    gx: np.ndarray
    gy: np.ndarray
    frac: np.ndarray
    xc: np.ndarray
    yc: np.ndarray


def _reduced_values(u: DiskGraph) -> np.ndarray:
    # values minus the affine trace; zero off the disk
    return np.where(u.inside, u.values - u.trace_values(), 0.0)


def _bilinear_gradient(W: np.ndarray, h: float):
    gx = (W[1:, 1:] - W[:-1, 1:] + W[1:, :-1] - W[:-1, :-1]) / (2.0 * h)
    gy = (W[1:, 1:] - W[1:, :-1] + W[:-1, 1:] - W[:-1, :-1]) / (2.0 * h)
    return gx, gy


def cell_field(u: DiskGraph) -> CellField:
    """Per-cell gradient estimate of u on the part of each cell inside the disk.

    On a cut cell the averaged gradient of the zero-extended function is
    divided by the inside fraction, which keeps the total variation across
    the cell. The affine trace is differentiated exactly.
    """
    if u.N < MIN_CELLS:
        raise RejectedInput(f"grid too coarse: need at least {MIN_CELLS} cells across")
    f = u.cell_fraction()
    gx, gy = _bilinear_gradient(_reduced_values(u), u.h)
    safe = np.where(f > 0, f, 1.0)
    gx = gx / safe + u.trace.ax
    gy = gy / safe + u.trace.ay
    xc, yc = u.cell_centers()
    return CellField(gx, gy, f, xc, yc)


def h_perimeter_2d(u: DiskGraph, orientation: int = 1) -> float:
    """Cut-cell midpoint rule for ∫_B |∇u + σ z⊥/2|, σ = orientation = ±1.

    σ = -1 measures the graph as the lower boundary of a set.
    """
    if orientation not in (1, -1):
        raise RejectedInput("orientation must be +1 or -1")
    c = cell_field(u)
    a = c.gx + 0.5 * orientation * c.yc
    b = c.gy - 0.5 * orientation * c.xc
    dens = c.frac * np.hypot(a, b)
    return tree_sum(dens[c.frac > 0]) * u.h * u.h


def volume_2d(u: DiskGraph) -> float:
    """∫_B u: node sum of the reduced values plus the exact trace integral."""
    if u.N < MIN_CELLS:
        raise RejectedInput(f"grid too coarse: need at least {MIN_CELLS} cells across")
    W = _reduced_values(u)
    return tree_sum(W[u.inside]) * u.h * u.h + u.trace.c0 * np.pi * u.R ** 2


def energy_2d(u: DiskGraph, lam: float) -> float:
    return h_perimeter_2d(u) + lam * volume_2d(u)


def perimeter_error_2d(u: DiskGraph) -> float:
    """|P_h - P_2h| using every other node; nan when the coarse grid is too small."""
    if u.N % 2 or u.N // 2 < MIN_CELLS:
        return float("nan")
    coarse = DiskGraph(values=u.values[::2, ::2], R=u.R, center=u.center, n=u.n, trace=u.trace)
    return abs(h_perimeter_2d(u) - h_perimeter_2d(coarse))


def el_residual_2d(u: DiskGraph, lam: float, eps_char: float | None = None) -> np.ndarray:
    """div[(∇u + z⊥/2)/|∇u + z⊥/2|] - lam at interior nodes.

    Nodes whose four cells are not all inside the disk, or that touch a cell
    where |∇u + z⊥/2| < eps_char, are returned as nan.
    """
    eps = 1e-8 * u.R if eps_char is None else eps_char
    c = cell_field(u)
    a = c.gx + 0.5 * c.yc
    b = c.gy - 0.5 * c.xc
    m = np.hypot(a, b)
    char = m < eps
    m = np.where(char, 1.0, m)
    Nx = np.where(char, 0.0, a / m)
    Ny = np.where(char, 0.0, b / m)
    h = u.h
    out = np.full(u.values.shape, np.nan)
    div = ((Nx[1:, 1:] + Nx[1:, :-1] - Nx[:-1, 1:] - Nx[:-1, :-1])
           + (Ny[1:, 1:] + Ny[:-1, 1:] - Ny[1:, :-1] - Ny[:-1, :-1])) / (2.0 * h)
    full = c.frac >= 1.0
    ok = full[1:, 1:] & full[1:, :-1] & full[:-1, 1:] & full[:-1, :-1]
    bad = char[1:, 1:] | char[1:, :-1] | char[:-1, 1:] | char[:-1, :-1]
    inner = np.where(ok & ~bad, div - lam, np.nan)
    out[1:-1, 1:-1] = inner
    return out


def annulus_max(u: DiskGraph, field: np.ndarray, r_in: float, r_out: float) -> float:
    """Max of |field| over nodes with r_in <= |z - c| <= r_out (fractions of R)."""
    dx, dy = u.offsets()
    r = np.hypot(dx, dy) / u.R
    sel = (r >= r_in) & (r <= r_out) & np.isfinite(field)
    return float(np.max(np.abs(field[sel])))


def node_gradient(u: DiskGraph):
    """Node gradient: centered inside, one-sided second order next to the boundary."""
    W = _reduced_values(u)
    ins = u.inside
    h = u.h

    def axis_grad(W, ins):
        Wp = np.pad(W, ((2, 2), (0, 0)))
        Ip = np.pad(ins, ((2, 2), (0, 0)))

        def sh(A, k):
            return A[2 + k: A.shape[0] - 2 + k]

        centered = (sh(Wp, 1) - sh(Wp, -1)) / (2 * h)
        forward = (-3 * W + 4 * sh(Wp, 1) - sh(Wp, 2)) / (2 * h)
        backward = (3 * W - 4 * sh(Wp, -1) + sh(Wp, -2)) / (2 * h)
        use_c = sh(Ip, 1) & sh(Ip, -1)
        use_f = ~use_c & sh(Ip, 1) & sh(Ip, 2)
        use_b = ~use_c & ~use_f & sh(Ip, -1) & sh(Ip, -2)
        g = np.select([use_c, use_f, use_b], [centered, forward, backward], np.nan)
        return np.where(ins, g, np.nan)

    gx = axis_grad(W, ins) + u.trace.ax
    gy = axis_grad(W.T, ins.T).T + u.trace.ay
    return gx, gy


def characteristic_set(u: DiskGraph, tol: float | None = None) -> list[tuple[float, float]]:
    """Grid points inside the disk where |∇u + z⊥/2| < tol."""
    tol = 1e-8 * u.R if tol is None else tol
    gx, gy = node_gradient(u)
    X, Y = u.node_coords()
    m = np.hypot(gx + 0.5 * Y, gy - 0.5 * X)
    hit = np.isfinite(m) & (m < tol)
    return [(float(x), float(y)) for x, y in zip(X[hit], Y[hit])]


# ---------------------------------------------------------------------------
# smooth fields on the disk (quadrature oracle for the variational checks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothField:
    """A function on B(0, R) ⊂ R^2 with its gradient, both as callables of (x, y)."""

    value: Callable
    grad: Callable
    R: float

    @classmethod
    def from_radial(cls, f: Callable, df: Callable, R: float) -> SmoothField:
        def value(x, y):
            return f(np.hypot(x, y))

        def grad(x, y):
            r = np.hypot(x, y)
            d = df(r)
            safe = np.where(r > 0, r, 1.0)
            k = np.where(r > 0, d / safe, 0.0)
            return k * x, k * y

        return cls(value, grad, R)

    @classmethod
    def zero(cls, R: float) -> SmoothField:
        return cls(lambda x, y: np.zeros_like(x), lambda x, y: (np.zeros_like(x), np.zeros_like(y)), R)

    def _same(self, other: SmoothField) -> None:
        if abs(self.R - other.R) > 1e-14 * self.R:
            raise RejectedInput("fields live on different disks")

    def combine(self, a: float, other: SmoothField, b: float) -> SmoothField:
        self._same(other)
        f, g = self, other

        def value(x, y):
            return a * f.value(x, y) + b * g.value(x, y)

        def grad(x, y):
            fx, fy = f.grad(x, y)
            gx, gy = g.grad(x, y)
            return a * fx + b * gx, a * fy + b * gy

        return SmoothField(value, grad, self.R)

    def __add__(self, other: SmoothField) -> SmoothField:
        return self.combine(1.0, other, 1.0)

    def __sub__(self, other: SmoothField) -> SmoothField:
        return self.combine(1.0, other, -1.0)

    def __mul__(self, c: float) -> SmoothField:
        return self.combine(float(c), SmoothField.zero(self.R), 0.0)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PolarRule:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray

    @classmethod
    def build(cls, R: float, panels: int = 8, angles: int = 128) -> PolarRule:
        rad = sine_graded(R, panels, 32)
        phi = 2.0 * np.pi * np.arange(angles) / angles
        r = rad.nodes[:, None]
        x = (r * np.cos(phi)[None, :]).ravel()
        y = (r * np.sin(phi)[None, :]).ravel()
        w = (rad.weights[:, None] * r * (2.0 * np.pi / angles) * np.ones((1, angles))).ravel()
        return cls(x, y, w)


_RULES: dict[tuple[float, int, int], PolarRule] = {}


def polar_rule(R: float, panels: int = 8, angles: int = 128) -> PolarRule:
    key = (float(R), panels, angles)
    if key not in _RULES:
        _RULES[key] = PolarRule.build(R, panels, angles)
    return _RULES[key]


def _horizontal(u: SmoothField, rule: PolarRule, orientation: int = 1):
    gx, gy = u.grad(rule.x, rule.y)
    return gx + 0.5 * orientation * rule.y, gy - 0.5 * orientation * rule.x


def perimeter_smooth(u: SmoothField, rule: PolarRule | None = None, orientation: int = 1) -> float:
    """∫ |∇u + orientation z⊥/2|; orientation -1 is the lower sheet t = -u(z)."""
    if orientation not in (1, -1):
        raise RejectedInput("orientation must be +1 or -1")
    rule = polar_rule(u.R) if rule is None else rule
    a, b = _horizontal(u, rule, orientation)
    return tree_sum(rule.w * np.hypot(a, b))


def volume_smooth(u: SmoothField, rule: PolarRule | None = None) -> float:
    rule = polar_rule(u.R) if rule is None else rule
    return tree_sum(rule.w * u.value(rule.x, rule.y))


def energy_smooth(u: SmoothField, lam: float, rule: PolarRule | None = None) -> float:
    return perimeter_smooth(u, rule) + lam * volume_smooth(u, rule)


def l2_norm_smooth(u: SmoothField, rule: PolarRule | None = None) -> float:
    rule = polar_rule(u.R) if rule is None else rule
    v = u.value(rule.x, rule.y)
    return float(np.sqrt(tree_sum(rule.w * v * v)))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class MeasureReport:
    perimeter: float
    volume: float
    iso_ratio: float
    characteristic_points: list = field(default_factory=list)
    quad_error: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "perimeter": self.perimeter,
            "volume": self.volume,
            "iso_ratio": self.iso_ratio,
            "characteristic_points": [list(p) for p in self.characteristic_points],
            "quad_error": self.quad_error,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _ratio(volume: float, perimeter: float, Q: int) -> float:
    return (2.0 * volume) ** ((Q - 1) / Q) / (2.0 * perimeter)


def measure_radial(p, ctx: GroupContext) -> MeasureReport:
    P, eP = h_perimeter_radial(p, ctx, with_error=True)
    V, eV = volume_radial(p, ctx, with_error=True)
    origin = tuple([0.0] * (2 * ctx.n))
    return MeasureReport(P, V, _ratio(V, P, ctx.Q), [origin], max(eP, eV))


def measure_2d(u: DiskGraph, tol: float | None = None) -> MeasureReport:
    P = h_perimeter_2d(u)
    V = volume_2d(u)
    return MeasureReport(P, V, _ratio(V, P, 4), characteristic_set(u, tol), perimeter_error_2d(u))
