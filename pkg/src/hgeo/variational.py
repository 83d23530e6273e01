"""Numerical recovery of the minimizer of F[u] + lam * G[u] over graphs on a disk."""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded
from scipy.optimize import bisect

from ._polar import PolarMesh
from ._reduce import tree_sum
from .closed_form import RadialProfile, critical_lam, half_volume, iso_constant, sphere_area
from .errors import RejectedInput
from .functionals import (
    AnalyticRadial,
    RadialSample,
    SmoothField,
    cell_field,
    polar_rule,
)
from .graph import DiskGraph
from .group import GroupContext

ARMIJO = 1e-4
SHRINK = 0.5


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 4096
    step_rule: str = "backtracking"
    tol_energy: float = 1e-14
    tol_constraint: float = 1e-8
    max_iter: int = 10_000
    lam: float | None = None
    init: Callable | None = None
    step_size: float = 1.0
    levels: int = 3

    def __post_init__(self) -> None:
        if self.grid_size < 64:
            raise RejectedInput("grid_size must be at least 64")
        if self.step_rule not in ("fixed", "backtracking"):
            raise RejectedInput("step_rule must be 'fixed' or 'backtracking'")
        if not (self.tol_energy > 0 and self.tol_constraint > 0):
            raise RejectedInput("tolerances must be positive")
        if self.max_iter < 1:
            raise RejectedInput("max_iter must be >= 1")


@dataclass
class SolverReport:
    iterations: int
    energy_trace: list[float]
    final_energy: float
    constraint_residual: float
    sup_error_vs_closed_form: float
    converged: bool
    constraint_trace: list[float] = field(default_factory=list)
    sup_error_trace: list[float] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_energy": self.final_energy,
            "constraint_residual": self.constraint_residual,
            "sup_error_vs_closed_form": self.sup_error_vs_closed_form,
            "energy_trace": list(self.energy_trace),
            "extras": dict(self.extras),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def write_trace_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "energy", "constraint_residual", "sup_error"])
            for k, e in enumerate(self.energy_trace):
                c = self.constraint_trace[k] if k < len(self.constraint_trace) else float("nan")
                s = self.sup_error_trace[k] if k < len(self.sup_error_trace) else float("nan")
                w.writerow([k, repr(float(e)), repr(float(c)), repr(float(s))])


# ---------------------------------------------------------------------------
# ODE route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeProfile:
    """Profile obtained by integrating the reduced Euler-Lagrange equation."""

    n: int
    R: float
    lam: float
    r: np.ndarray
    u: np.ndarray
    F: np.ndarray
    half_volume: float

    def as_sample(self) -> RadialSample:
        return RadialSample(self.r, self.u, self.n)

    def closed_form(self) -> RadialProfile:
        return RadialProfile(self.n, self.R, self.lam)


def _check_lam(lam: float, R: float, ctx: GroupContext) -> None:
    if lam == 0:
        raise RejectedInput(
            "lam = 0 corresponds to H-minimal surfaces, which are excluded")
    lo = -(ctx.Q - 2) / R
    if not (lo * (1 + 1e-14) <= lam < 0):
        raise RejectedInput(f"lam must lie in [{lo}, 0), got {lam}")


# |1 - kappa| below this is roundoff in F; the boundary slope is then infinite
KAPPA_SNAP = 64 * np.finfo(float).eps


def solve_ode(lam: float, R: float, ctx: GroupContext, samples: int = 1025) -> OdeProfile:
    """Integrate (r^(2n) F)' = lam r^(2n-1), then the profile from F.

    F(r) = ū'(r^2/4) / (r sqrt(1 + ū'^2)) inverts to
    ū' = r F / sqrt(1 - (r F)^2), which is integrated inward from
    ū(R^2/4) = 0 in the angle theta with r = R sin(theta); the substitution
    keeps the right-hand side bounded at the boundary. The integration runs
    on the unit disk with multiplier lam * R and is rescaled (u ~ R^2).
    """
    if not R > 0:
        raise RejectedInput("R must be positive")
    _check_lam(lam, R, ctx)
    n = ctx.n
    m = 2 * n
    mu = lam * R

    # (r^{2n} F)' = mu r^{2n-1} on the unit disk, r^{2n} F -> 0 at 0
    lin = solve_ivp(lambda r, G: [mu * r ** (m - 1)], (0.0, 1.0), [0.0],
                    method="DOP853", rtol=1e-13, atol=1e-300, dense_output=True)

    def kappa_of(r: float) -> float:
        k = -lin.sol(r)[0] / r ** m if r > 0 else -mu / m
        return 1.0 if k > 1.0 - KAPPA_SNAP else k

    sigma = sphere_area(m)

    def rhs(theta, y):
        st, ct = np.sin(theta), np.cos(theta)
        kappa = kappa_of(st)
        denom = np.sqrt(ct * ct + (1.0 - kappa * kappa) * st * st)
        du = -0.5 * st * st * ct * kappa / denom if denom > 0 else 0.0
        return [du, sigma * y[0] * st ** (m - 1) * ct]

    theta = np.linspace(0.5 * np.pi, 0.0, max(samples, 2))
    sol = solve_ivp(rhs, (0.5 * np.pi, 0.0), [0.0, 0.0], method="DOP853",
                    t_eval=theta, rtol=1e-13, atol=1e-15)
    if not sol.success:
        raise RuntimeError(f"profile integration failed: {sol.message}")
    st = np.sin(theta[::-1])
    ct = np.cos(theta[::-1])
    st[-1], ct[-1] = 1.0, 0.0
    u = sol.y[0][::-1] * R * R
    vol = -sol.y[1][-1] * R ** (m + 2)

    # reconstruct F from the slope of the integrated profile (unit disk)
    dudtheta = np.array([rhs(t, [0.0, 0.0])[0] for t in theta[::-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = dudtheta / (0.5 * st * ct)
        F = slope / (st * np.sqrt(1.0 + slope * slope)) / R
    return OdeProfile(n, R, lam, R * st, u, F, vol)


def lagrange_search(V: float, ctx: GroupContext, tol: float = 1e-13) -> tuple[float, float]:
    """Find R with 2 * volume(solve_ode(-(Q-2)/R, R)) = V by bisection."""
    if not V > 0:
        raise RejectedInput("V must be positive")

    def excess(R):
        return 2.0 * solve_ode(critical_lam(R, ctx), R, ctx, samples=2).half_volume - V

    lo, hi = 1.0, 1.0
    while excess(lo) > 0:
        lo *= 0.5
    while excess(hi) < 0:
        hi *= 2.0
    R = bisect(excess, lo, hi, xtol=tol * max(1.0, hi), rtol=4 * np.finfo(float).eps,
               maxiter=400)
    return R, critical_lam(R, ctx)


# ---------------------------------------------------------------------------
# radial descent
# ---------------------------------------------------------------------------

@dataclass
class _RadialProblem:
    r: np.ndarray
    n: int
    lam: float

    def __post_init__(self) -> None:
        self.d = np.diff(self.r)
        self.rho = 0.5 * (self.r[1:] + self.r[:-1])
        self.c = sphere_area(2 * self.n) * self.rho ** (2 * self.n - 1) * self.d
        self.a2 = 0.25 * self.rho ** 2

    def volume(self, u):
        return tree_sum(self.c * 0.5 * (u[1:] + u[:-1]))

    def energy(self, u):
        p = np.diff(u) / self.d
        return tree_sum(self.c * np.sqrt(p * p + self.a2)) + self.lam * self.volume(u)

    def grad_hess(self, u):
        p = np.diff(u) / self.d
        s = np.sqrt(p * p + self.a2)
        J = self.c * p / s / self.d
        g = np.zeros_like(u)
        g[1:] += J
        g[:-1] -= J
        half = 0.5 * self.lam * self.c
        g[1:] += half
        g[:-1] += half
        w = self.c * self.a2 / s ** 3 / self.d ** 2
        diag = np.zeros_like(u)
        diag[1:] += w
        diag[:-1] += w
        return g, diag, -w


def _line_search(energy, u, step, E, slope, project, cfg: SolverConfig):
    if cfg.step_rule == "fixed":
        un = project(u + cfg.step_size * step)
        return un, energy(un), cfg.step_size
    t = 1.0
    while True:
        un = project(u + t * step)
        En = energy(un)
        if En <= E + ARMIJO * t * slope or t < 1e-12:
            return un, En, t
        t *= SHRINK


def solve_radial(cfg: SolverConfig, R: float, ctx: GroupContext):
    """Projected variable-metric descent for the radial discretization.

    Grid r_k = R sin(pi k / (2K)); the search direction solves the
    tridiagonal Hessian system, the step is chosen by Armijo backtracking and
    the iterate is clamped at 0. Returns (RadialSample, SolverReport).
    """
    if not R > 0:
        raise RejectedInput("R must be positive")
    K = cfg.grid_size
    lam = critical_lam(R, ctx) if cfg.lam is None else cfg.lam
    r = R * np.sin(0.5 * np.pi * np.arange(K + 1) / K)
    r[-1] = R
    prob = _RadialProblem(r, ctx.n, lam)
    exact = RadialProfile.critical(ctx.n, R).u(r)
    target = half_volume(R, ctx)
    init = cfg.init if cfg.init is not None else (lambda rr: 0.1 * (1.0 - (rr / R) ** 2))
    u = np.asarray(init(r), dtype=float).copy()
    u[-1] = 0.0

    def project(v):
        v = np.maximum(v, 0.0)
        v[-1] = 0.0
        return v

    u = project(u)
    E = prob.energy(u)
    trace, ctrace, strace = [E], [abs(prob.volume(u) - target) / target], [float(np.max(np.abs(u - exact)))]
    converged = False
    t0 = time.perf_counter()
    it = 0
    for it in range(1, cfg.max_iter + 1):
        g, diag, off = prob.grad_hess(u)
        gf, df = g[:-1], diag[:-1]
        of = off[: K - 1]
        ab = np.zeros((3, K))
        ab[0, 1:] = of
        ab[1] = df
        ab[2, :-1] = of
        step = np.zeros_like(u)
        step[:-1] = solve_banded((1, 1), ab, -gf)
        slope = float(g @ step)
        if slope >= 0:
            step = -g
            step[-1] = 0.0
            slope = float(g @ step)
        u, E_new, _ = _line_search(prob.energy, u, step, E, slope, project, cfg)
        trace.append(E_new)
        ctrace.append(abs(prob.volume(u) - target) / target)
        strace.append(float(np.max(np.abs(u - exact))))
        if -slope < cfg.tol_energy or abs(E - E_new) < 0.1 * cfg.tol_energy:
            E = E_new
            converged = True
            break
        E = E_new
    report = SolverReport(
        iterations=it,
        energy_trace=trace,
        final_energy=E,
        constraint_residual=ctrace[-1],
        sup_error_vs_closed_form=strace[-1],
        converged=converged,
        constraint_trace=ctrace,
        sup_error_trace=strace,
        extras={"elapsed_s": time.perf_counter() - t0, "lam": lam, "grid_size": K},
    )
    return RadialSample(r, u, ctx.n), report


# ---------------------------------------------------------------------------
# two-dimensional descent (n = 1, no symmetry imposed)
# ---------------------------------------------------------------------------

def default_2d_init(R: float) -> Callable:
    return lambda x, y: 0.3 * R * R * (1.0 - (x * x + y * y) / (R * R)) * (1.0 + 0.2 * x / R)


@dataclass
class PolarSolution:
    mesh: PolarMesh
    u: np.ndarray

    def to_disk_graph(self, N: int) -> DiskGraph:
        mesh = self.mesh
        return DiskGraph.sample(lambda dx, dy: mesh.evaluate(self.u, dx, dy), N, mesh.R)


def _newton_polar(mesh: PolarMesh, u: np.ndarray, lam: float, eps: float, cfg: SolverConfig,
                  budget: int, record=None):
    """Regularized Newton with Armijo backtracking on the polar scheme.

    eps shrinks after full steps and grows after short ones.
    """
    E = mesh.energy(u, lam)

    def energy(v):
        return mesh.energy(v, lam)

    def project(v):
        return np.maximum(v, 0.0)

    it = 0
    converged = False
    for it in range(1, budget + 1):
        g, H = mesh.grad_hess(u, lam, eps)
        step = spla.spsolve(H, -g, permc_spec="MMD_AT_PLUS_A")
        slope = float(g @ step)
        if slope >= 0:
            step = -g
            slope = float(g @ step)
        u, E_new, t = _line_search(energy, u, step, E, slope, project, cfg)
        if t == 1.0:
            eps = max(0.1 * eps, 1e-12)
        else:
            eps = min(eps * (10.0 if t < 0.25 else np.sqrt(10.0)), 1.0)
        E = E_new
        if record is not None:
            record(u, E)
        if -slope < cfg.tol_energy:
            converged = True
            break
    return u, eps, it, converged


def solve_2d_polar(cfg: SolverConfig, R: float):
    """Solve on the polar scheme with Nr = M = grid_size, coarse to fine.

    The initial graph (non-radial by default) is sampled on the coarsest
    level; each level's result is interpolated to the next.
    """
    if not R > 0:
        raise RejectedInput("R must be positive")
    ctx = GroupContext(1)
    lam = critical_lam(R, ctx) if cfg.lam is None else cfg.lam
    init = cfg.init if cfg.init is not None else default_2d_init(R)
    N = cfg.grid_size
    sizes = [N]
    while len(sizes) < cfg.levels and sizes[-1] // 2 >= 16 and sizes[-1] % 2 == 0:
        sizes.append(sizes[-1] // 2)
    sizes.reverse()
    profile = RadialProfile.critical(1, R)
    target = half_volume(R, ctx)
    t0 = time.perf_counter()
    mesh = PolarMesh(sizes[0], sizes[0], R)
    u = np.maximum(np.asarray(init(mesh.x, mesh.y), dtype=float), 0.0)
    eps = 1.0
    total = 0
    trace: list[float] = []
    ctrace: list[float] = []
    strace: list[float] = []
    spread: list[float] = []
    level_log = []
    converged = False
    for k, size in enumerate(sizes):
        if k:
            fine = PolarMesh(size, size, R)
            u = mesh.prolong_to(u, fine)
            mesh = fine
            eps = max(eps, 1e-3)
        last = k == len(sizes) - 1
        exact = profile.u(mesh.r)

        def record(v, E, mesh=mesh, exact=exact):
            trace.append(E)
            ctrace.append(abs(mesh.volume(v) - target) / target)
            strace.append(float(np.max(np.abs(v - exact))))
            spread.append(mesh.circular_spread(v))

        if last:
            record(u, mesh.energy(u, lam))
        u, eps, it, converged = _newton_polar(mesh, u, lam, eps, cfg, cfg.max_iter - total,
                                              record if last else None)
        total += it
        level_log.append({"size": size, "iterations": it, "converged": converged})
    P = mesh.perimeter(u)
    V = mesh.volume(u)
    ratio = (2.0 * V) ** 0.75 / (2.0 * P)
    report = SolverReport(
        iterations=total,
        energy_trace=trace,
        final_energy=trace[-1],
        constraint_residual=ctrace[-1],
        sup_error_vs_closed_form=strace[-1],
        converged=converged,
        constraint_trace=ctrace,
        sup_error_trace=strace,
        extras={
            "elapsed_s": time.perf_counter() - t0,
            "lam": lam,
            "grid_size": N,
            "levels": level_log,
            "circular_spread": spread[-1],
            "spread_trace": spread,
            "perimeter": P,
            "volume": V,
            "iso_ratio": ratio,
            "iso_gap": iso_constant(ctx) - ratio,
        },
    )
    return PolarSolution(mesh, u), report


def solve_2d(cfg: SolverConfig, R: float):
    """Full two-dimensional solve; returns (DiskGraph on a grid_size^2 grid, SolverReport)."""
    sol, report = solve_2d_polar(cfg, R)
    return sol.to_disk_graph(cfg.grid_size), report


# ---------------------------------------------------------------------------
# Gateaux derivative
# ---------------------------------------------------------------------------

def _as_field(u, R_hint: float | None = None) -> SmoothField:
    if isinstance(u, SmoothField):
        return u
    try:
        f = AnalyticRadial.of(u)
    except RejectedInput:
        raise RejectedInput("expected a SmoothField, DiskGraph or radial profile") from None
    return SmoothField.from_radial(f.u, f.du, f.R)


def _check_admissible_field(u: SmoothField, phi: SmoothField) -> None:
    if abs(u.R - phi.R) > 1e-14 * u.R:
        raise RejectedInput("variation lives on a different disk")
    ang = 2.0 * np.pi * np.arange(256) / 256
    bx, by = phi.R * np.cos(ang), phi.R * np.sin(ang)
    rule = polar_rule(u.R)
    scale = max(1.0, float(np.max(np.abs(phi.value(rule.x, rule.y)))))
    # profiles with a vertical tangent grow like sqrt(R - |z|), so rounding of
    # the boundary points alone leaves values of order 1e-8
    if np.max(np.abs(phi.value(bx, by))) > 1e-6 * scale:
        raise RejectedInput("variation does not vanish on the boundary")
    uv = u.value(rule.x, rule.y)
    pv = phi.value(rule.x, rule.y)
    if np.any((uv <= 0) & (np.abs(pv) > 1e-12 * scale)):
        raise RejectedInput("variation is not supported inside the support of u")


def _check_admissible_grid(u: DiskGraph, phi: DiskGraph) -> None:
    if phi.N != u.N or phi.R != u.R or phi.center != u.center:
        raise RejectedInput("variation must be sampled on the same grid as u")
    if not phi.trace.is_zero or np.any(phi.values[~phi.inside] != 0):
        raise RejectedInput("variation does not vanish on the boundary")
    if np.any((u.values <= 0) & u.inside & (phi.values != 0)):
        raise RejectedInput("variation is not supported inside the support of u")


def gateaux_derivative(u, phi, lam: float, eps_char: float = 1e-8) -> float:
    """∫ [<∇u + z⊥/2, ∇phi> / |∇u + z⊥/2| + lam phi] dz.

    Grid inputs use the derivative of the cut-cell discretization; analytic
    inputs use the polar Gauss-Legendre rule. Points where the horizontal
    vector is below eps_char * R (the characteristic set) contribute the
    zero subgradient.
    """
    if isinstance(u, DiskGraph) or isinstance(phi, DiskGraph):
        if not (isinstance(u, DiskGraph) and isinstance(phi, DiskGraph)):
            raise RejectedInput("u and phi must both be grid graphs")
        _check_admissible_grid(u, phi)
        c = cell_field(u)
        a = c.gx + 0.5 * c.yc
        b = c.gy - 0.5 * c.xc
        m = np.hypot(a, b)
        live = (c.frac > 0) & (m >= eps_char * u.R)
        m = np.where(live, m, 1.0)
        P = np.where(phi.inside, phi.values, 0.0)
        px = (P[1:, 1:] - P[:-1, 1:] + P[1:, :-1] - P[:-1, :-1]) / (2.0 * u.h)
        py = (P[1:, 1:] - P[1:, :-1] + P[:-1, 1:] - P[:-1, :-1]) / (2.0 * u.h)
        dens = np.where(live, (a * px + b * py) / m, 0.0)
        h2 = u.h * u.h
        return tree_sum(dens.ravel()) * h2 + lam * tree_sum(P[phi.inside]) * h2
    uf = _as_field(u)
    pf = _as_field(phi)
    _check_admissible_field(uf, pf)
    rule = polar_rule(uf.R)
    gx, gy = uf.grad(rule.x, rule.y)
    a = gx + 0.5 * rule.y
    b = gy - 0.5 * rule.x
    m = np.hypot(a, b)
    live = m >= eps_char * uf.R
    m = np.where(live, m, 1.0)
    px, py = pf.grad(rule.x, rule.y)
    dens = np.where(live, (a * px + b * py) / m, 0.0) + lam * pf.value(rule.x, rule.y)
    return tree_sum(rule.w * dens)
