"""Executable checks of the convexity lemmas and the characteristic transport flow."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from .closed_form import RadialProfile, iso_constant
from .errors import RejectedInput
from .functionals import (
    SmoothField,
    energy_smooth,
    l2_norm_smooth,
    perimeter_smooth,
    volume_smooth,
)
from .group import GroupContext

# fixed Monte Carlo seeds; every suite records the seed it used
SEEDS = {
    "eigen": 20_061,
    "gap": 20_062,
    "inequality": 20_063,
    "midpoint": 20_064,
    "gateaux": 20_065,
    "corpus": 20_066,
}


# ---------------------------------------------------------------------------
# rank-one eigenvalue lemma
# ---------------------------------------------------------------------------

def rank_one_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise RejectedInput("a must be a vector with at least 2 entries")
    nrm2 = float(a @ a)
    if nrm2 == 0.0:
        raise RejectedInput("a must be nonzero")
    return np.eye(a.size) - np.outer(a, a) / nrm2


def rank_one_eigen_check(a) -> tuple[np.ndarray, float]:
    """Eigenvalues of I - a a^T/|a|^2 and their max deviation from {0, 1, ..., 1}."""
    A = rank_one_matrix(a)
    ev = np.linalg.eigvalsh(A)
    expected = np.ones_like(ev)
    expected[0] = 0.0
    return ev, float(np.max(np.abs(ev - expected)))


# ---------------------------------------------------------------------------
# convexity gap and the key inequality
# ---------------------------------------------------------------------------

def _pair(alpha, q) -> tuple[np.ndarray, np.ndarray]:
    alpha = np.asarray(alpha, dtype=float)
    q = np.asarray(q, dtype=float)
    if alpha.shape[-1] != q.shape[-1]:
        raise RejectedInput("alpha and q must have the same dimension")
    if np.any(np.linalg.norm(alpha, axis=-1) == 0.0):
        raise RejectedInput("alpha must be nonzero")
    return alpha, q


def _wedge_sq(alpha: np.ndarray, q: np.ndarray) -> np.ndarray:
    """|alpha ^ q|^2 = |alpha|^2 |q|^2 - <alpha, q>^2 as a sum of squared minors."""
    minors = alpha[..., :, None] * q[..., None, :]
    minors = minors - np.swapaxes(minors, -1, -2)
    return 0.5 * np.sum(minors * minors, axis=(-1, -2))


def convexity_gap(alpha, q):
    """f(q) = |alpha| |q|^2 - (|q + alpha| - |alpha|) <q, alpha>; rows are independent samples.

    Evaluated as (|q|^2 d + 2 |alpha ^ q|^2) / (|q + alpha| + |alpha|) with
    d = |alpha| |q + alpha| - <alpha, q + alpha> >= 0, which avoids cancellation near f = 0.
    """
    alpha, q = _pair(alpha, q)
    na = np.linalg.norm(alpha, axis=-1)
    nqa = np.linalg.norm(q + alpha, axis=-1)
    qq = np.sum(q * q, axis=-1)
    wedge = _wedge_sq(alpha, q)
    b = na * nqa
    c = np.sum(alpha * (q + alpha), axis=-1)
    pos = c > 0
    d = np.where(pos, wedge / np.where(pos, b + c, 1.0), b - c)
    out = (qq * d + 2.0 * wedge) / (nqa + na)
    return out if np.ndim(out) else float(out)


def convexity_gap_direct(alpha, q):
    """f(q) from its defining formula, kept as a cross-check on the stable evaluation."""
    alpha, q = _pair(alpha, q)
    na = np.linalg.norm(alpha, axis=-1)
    out = na * np.sum(q * q, axis=-1) - (np.linalg.norm(q + alpha, axis=-1) - na) * np.sum(q * alpha, axis=-1)
    return out if np.ndim(out) else float(out)


def gap_scale(alpha, q):
    """Magnitude of the terms in f, used to express rounding error in relative units."""
    alpha, q = _pair(alpha, q)
    na = np.linalg.norm(alpha, axis=-1)
    nq = np.linalg.norm(q, axis=-1)
    return na * nq * (nq + na)


def key_inequality_check(alpha, q, tol: float = 1e-12):
    """(holds, slack) with slack = |q|^2 |alpha| - (|q + alpha| - |alpha|) <q, alpha>."""
    alpha, q = _pair(alpha, q)
    lhs = (np.linalg.norm(q + alpha, axis=-1) - np.linalg.norm(alpha, axis=-1)) * np.sum(q * alpha, axis=-1)
    rhs = np.sum(q * q, axis=-1) * np.linalg.norm(alpha, axis=-1)
    slack = rhs - lhs
    holds = slack >= -tol
    if np.ndim(slack):
        return holds, slack
    return bool(holds), float(slack)


def _dec(x) -> Decimal:
    f = Fraction(x)
    return Decimal(f.numerator) / Decimal(f.denominator)


def exact_gap(alpha: Sequence, q: Sequence, digits: int = 60) -> tuple[Decimal, Decimal]:
    """Both rearrangements evaluated in decimal arithmetic with `digits` significant digits.

    Inputs are converted exactly (floats and Fractions are both accepted).
    Returns (gap formula, inequality slack).
    """
    with localcontext() as c:
        c.prec = digits
        a = [_dec(v) for v in alpha]
        b = [_dec(v) for v in q]
        na = sum(v * v for v in a).sqrt()
        nq2 = sum(v * v for v in b)
        nqa = sum((x + y) * (x + y) for x, y in zip(a, b)).sqrt()
        dot = sum(x * y for x, y in zip(a, b))
        gap = na * nq2 - (nqa - na) * dot
        slack = nq2 * na - nqa * dot + na * dot
    return gap, slack


# ---------------------------------------------------------------------------
# characteristic flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveState:
    z: tuple[float, float]
    s: float
    rho: float


@dataclass
class FlowResult:
    z0: np.ndarray
    rho0: float
    R: float
    s: np.ndarray
    z: np.ndarray
    rho: np.ndarray
    steps: int
    rejected: int

    @property
    def s_max(self) -> float:
        return 2.0 * np.log(self.R / float(np.hypot(*self.z0)))

    def states(self) -> list[CurveState]:
        return [CurveState((float(x), float(y)), float(s), float(r))
                for (x, y), s, r in zip(self.z, self.s, self.rho)]

    def radius_ratio(self) -> np.ndarray:
        """|z(s)|^2 / (|z0|^2 e^s)."""
        return np.sum(self.z ** 2, axis=1) / (float(self.z0 @ self.z0) * np.exp(self.s))

    def transport_residual(self) -> float:
        """Max relative mismatch between rho0 e^(-s) and the radial solution rho0 |z0|^2/|z|^2 on the curve."""
        r2 = np.sum(self.z ** 2, axis=1)
        radial = self.rho0 * float(self.z0 @ self.z0) / r2
        return float(np.max(np.abs(radial - self.rho) / np.abs(self.rho)))

    def _bracket(self) -> np.ndarray:
        r2 = np.sum(self.z ** 2, axis=1)
        return r2 / (self.R * self.R - r2) + 1.0

    def grad_phi_sq(self) -> np.ndarray:
        """rho0^2 |z0|^2 / 4 times the bracket; tends to rho0^2 |z0|^2 / 4 at the center."""
        e = np.exp(self.s)
        return self.rho0 ** 2 / e ** 2 / 4.0 * float(self.z0 @ self.z0) * e ** 2 * self._bracket()

    def grad_phi_sq_transported(self) -> np.ndarray:
        """rho(s)^2 |z(s)|^2 / 4 times the same bracket (diverges as s -> -inf)."""
        return self.rho ** 2 * np.sum(self.z ** 2, axis=1) / 4.0 * self._bracket()

    def center_limit(self) -> float:
        return float(self.grad_phi_sq()[np.argmin(self.s)])

    def as_dict(self) -> dict:
        return {
            "z0": [float(v) for v in self.z0],
            "rho0": self.rho0,
            "R": self.R,
            "s_range": [float(self.s.min()), float(self.s.max())],
            "s_max": self.s_max,
            "steps": self.steps,
            "rejected": self.rejected,
            "max_radius_error": float(np.max(np.abs(self.radius_ratio() - 1.0))),
            "transport_residual": self.transport_residual(),
            "center_limit": self.center_limit(),
            "expected_limit": self.rho0 ** 2 * float(self.z0 @ self.z0) / 4.0,
        }


def _flow_rhs(profile: RadialProfile):
    cap = profile.s_max * (1.0 - 1e-15)

    def f(z: np.ndarray) -> np.ndarray:
        x, y = z
        d = profile.slope(min(0.25 * (x * x + y * y), cap))
        return np.array([0.5 * x - 0.5 * d * y, 0.5 * y + 0.5 * d * x])

    return f


def _rk4(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(f, z0, s_end, h0, tol, adaptive):
    """RK4 from s = 0 to s_end; with adaptive=True each step is accepted when
    one step and two half steps agree to tol (relative), otherwise halved;
    after an easy step the step grows back towards h0."""
    sgn = 1.0 if s_end >= 0 else -1.0
    s, z = 0.0, np.array(z0, dtype=float)
    S, Z = [s], [z.copy()]
    h = h0
    rejected = 0
    while sgn * (s_end - s) > 1e-15:
        step = sgn * min(h, abs(s_end - s))
        if adaptive:
            full = _rk4(f, z, step)
            half = _rk4(f, _rk4(f, z, 0.5 * step), 0.5 * step)
            err = float(np.max(np.abs(full - half))) / max(float(np.max(np.abs(half))), 1e-300)
            if err > tol and abs(step) > 1e-14:
                h = 0.5 * abs(step)
                rejected += 1
                continue
            z = half + (half - full) / 15.0
            if err < tol / 64.0:
                h = min(2.0 * h, h0)
        else:
            z = _rk4(f, z, step)
        s += step
        S.append(s)
        Z.append(z.copy())
    return np.array(S), np.array(Z), rejected


def characteristic_flow(z0, rho0: float, R: float, s_range: tuple[float, float] | None = None,
                        h: float = 1e-3, tol: float = 1e-13, adaptive: bool = True) -> FlowResult:
    """Integral curve of x' = x/2 - ū'y/2, y' = y/2 + ū'x/2 through z0 (at s = 0).

    ū' is the slope of the critical profile at |z|^2/4. The default range
    runs from s = -20 (towards the center) to just below
    s_max = 2 log(R/|z0|), where the curve reaches the boundary circle.
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (2,):
        raise RejectedInput("z0 must be a 2-vector")
    if not R > 0:
        raise RejectedInput("R must be positive")
    r0 = float(np.hypot(*z0))
    if r0 == 0.0 or r0 >= R:
        raise RejectedInput("require 0 < |z0| < R")
    s_max = 2.0 * np.log(R / r0)
    lo, hi = (-20.0, s_max - 1e-8) if s_range is None else s_range
    if hi > s_max or lo > hi:
        raise RejectedInput(f"s_range must satisfy lo <= hi <= s_max = {s_max}")
    f = _flow_rhs(RadialProfile.critical(1, R))
    S, Z, rej = np.array([0.0]), z0[None, :].copy(), 0
    if lo < 0:
        sb, zb, rb = _integrate(f, z0, lo, h, tol, adaptive)
        S, Z, rej = sb[::-1], zb[::-1], rej + rb
    if hi > 0:
        sf, zf, rf = _integrate(f, z0, hi, h, tol, adaptive)
        S, Z, rej = np.concatenate([S, sf[1:]]), np.concatenate([Z, zf[1:]]), rej + rf
    keep = (S >= lo - 1e-15) & (S <= hi + 1e-15)
    S, Z = S[keep], Z[keep]
    return FlowResult(z0, float(rho0), float(R), S, Z, rho0 * np.exp(-S), len(S) - 1, rej)


# ---------------------------------------------------------------------------
# random admissible graphs and variations on a disk (n = 1)
# ---------------------------------------------------------------------------

def profile_field(R: float = 1.0, scale: float = 1.0) -> SmoothField:
    p = RadialProfile.critical(1, R)
    return SmoothField.from_radial(lambda r: scale * p.u(r), lambda r: scale * p.du(r), R)


def _cubic(c: np.ndarray, X, Y):
    # c: 10 coefficients of 1, X, Y, X^2, XY, Y^2, X^3, X^2Y, XY^2, Y^3
    P = (c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y + c[5] * Y * Y
         + c[6] * X ** 3 + c[7] * X * X * Y + c[8] * X * Y * Y + c[9] * Y ** 3)
    Px = c[1] + 2 * c[3] * X + c[4] * Y + 3 * c[6] * X * X + 2 * c[7] * X * Y + c[8] * Y * Y
    Py = c[2] + c[4] * X + 2 * c[5] * Y + c[7] * X * X + 2 * c[8] * X * Y + 3 * c[9] * Y * Y
    return P, Px, Py


def bump_variation(coeffs, R: float = 1.0, power: int = 2) -> SmoothField:
    """phi = (1 - |z|^2/R^2)^power * P(x/R, y/R) with P cubic; vanishes on the boundary."""
    c = np.asarray(coeffs, dtype=float)

    def value(x, y):
        X, Y = x / R, y / R
        w = 1.0 - X * X - Y * Y
        P, _, _ = _cubic(c, X, Y)
        return w ** power * P

    def grad(x, y):
        X, Y = x / R, y / R
        w = 1.0 - X * X - Y * Y
        P, Px, Py = _cubic(c, X, Y)
        dw = power * w ** (power - 1)
        return ((w ** power * Px - 2.0 * X * dw * P) / R,
                (w ** power * Py - 2.0 * Y * dw * P) / R)

    return SmoothField(value, grad, R)


def random_variation(rng: np.random.Generator, R: float = 1.0) -> SmoothField:
    return bump_variation(rng.uniform(-1.0, 1.0, 10), R)


def tilted_graph(amp: float, coeffs, R: float = 1.0) -> SmoothField:
    """u = amp R^2 (1 - |z|^2/R^2) exp(b x/R + c y/R + d (x^2 - y^2)/R^2 + e x y/R^2); positive inside."""
    b, c, d, e = (float(v) for v in coeffs)

    def parts(x, y):
        X, Y = x / R, y / R
        w = 1.0 - X * X - Y * Y
        g = np.exp(b * X + c * Y + d * (X * X - Y * Y) + e * X * Y)
        return X, Y, w, g

    def value(x, y):
        X, Y, w, g = parts(x, y)
        return amp * R * R * w * g

    def grad(x, y):
        X, Y, w, g = parts(x, y)
        gx = b + 2 * d * X + e * Y
        gy = c - 2 * d * Y + e * X
        return (amp * R * g * (-2.0 * X + w * gx), amp * R * g * (-2.0 * Y + w * gy))

    return SmoothField(value, grad, R)


def random_graph(rng: np.random.Generator, R: float = 1.0) -> SmoothField:
    amp = rng.uniform(0.1, 0.6)
    return tilted_graph(amp, rng.uniform(-0.5, 0.5, 4), R)


def set_iso_ratio(upper: SmoothField, lower: SmoothField | None = None) -> float:
    """|E|^(3/4) / P_H(E) for E = {-lower(z) < t < upper(z)} in the first Heisenberg group."""
    lower = upper if lower is None else lower
    V = volume_smooth(upper) + volume_smooth(lower)
    P = perimeter_smooth(upper) + perimeter_smooth(lower, orientation=-1)
    return V ** 0.75 / P


def sup_distance(u: SmoothField, v: SmoothField, samples: int = 64) -> float:
    r = u.R * np.linspace(0.0, 1.0, samples + 1)
    ang = 2.0 * np.pi * np.arange(samples) / samples
    X = (r[:, None] * np.cos(ang)[None, :]).ravel()
    Y = (r[:, None] * np.sin(ang)[None, :]).ravel()
    return float(np.max(np.abs(u.value(X, Y) - v.value(X, Y))))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

@dataclass
class SuiteSummary:
    name: str
    passed: bool
    count: int
    max_violation: float
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "count": self.count,
            "max_violation": self.max_violation,
            "seed": self.seed,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def eigen_suite(per_dim: int = 1000, dims: Sequence[int] = range(2, 11),
                seed: int = SEEDS["eigen"], tol: float = 1e-10) -> SuiteSummary:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_trace = 0.0
    count = 0
    for m in dims:
        for _ in range(per_dim):
            a = rng.standard_normal(m)
            ev, dev = rank_one_eigen_check(a)
            worst = max(worst, dev)
            worst_trace = max(worst_trace, abs(float(np.sum(ev)) - (m - 1)))
            count += 1
    return SuiteSummary("eigen", worst < tol, count, worst, seed,
                        {"max_trace_error": worst_trace, "dims": list(dims)})


def gap_suite(samples: int = 1_000_000, dims: Sequence[int] = (2, 4), seed: int = SEEDS["gap"],
              tol: float = 1e-12, batch: int = 100_000) -> SuiteSummary:
    """f(q) >= -tol on uniform samples in [-10, 10]; near-zero values are compared with
    their distance to the ray {rho alpha : rho >= -1}."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    drift = 0.0
    ray_near, ray_all = [], []
    count = 0
    for m in dims:
        left = samples // len(dims)
        while left > 0:
            k = min(batch, left)
            a = rng.uniform(-10.0, 10.0, (k, m))
            # half the samples sit near the ray, where the gap is small
            rho = rng.uniform(-3.0, 3.0, (k // 2, 1))
            q = rng.uniform(-10.0, 10.0, (k, m))
            q[: k // 2] = rho * a[: k // 2] + 1e-3 * rng.standard_normal((k // 2, m))
            f = convexity_gap(a, q)
            worst = min(worst, float(f.min()))
            scale = gap_scale(a, q) + 1e-300
            drift = max(drift, float(np.max(np.abs(convexity_gap_direct(a, q) - f) / scale)))
            rr = np.maximum(np.sum(q * a, axis=1) / np.sum(a * a, axis=1), -1.0)
            dist = np.linalg.norm(q - rr[:, None] * a, axis=1) / np.linalg.norm(a, axis=1)
            near = f / scale < 1e-6
            ray_near.append(dist[near])
            ray_all.append(dist)
            count += k
            left -= k
    near = np.concatenate(ray_near)
    every = np.concatenate(ray_all)
    # the direct formula must agree with the stable one to rounding
    ok = worst >= -tol and drift < 1e-13
    return SuiteSummary("convexity_gap", ok, count, max(0.0, -worst), seed, {
        "min_gap": worst,
        "direct_form_rel_drift": drift,
        "near_zero_count": int(near.size),
        "near_zero_median_ray_distance": float(np.median(near)) if near.size else float("nan"),
        "overall_median_ray_distance": float(np.median(every)),
    })


def inequality_suite(samples: int = 100_000, spot: int = 100, dim: int = 2,
                     seed: int = SEEDS["inequality"], tol: float = 1e-12) -> SuiteSummary:
    """Floating-point slack on random pairs plus decimal confirmation on rational samples."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-10.0, 10.0, (samples, dim))
    q = rng.uniform(-10.0, 10.0, (samples, dim))
    holds, slack = key_inequality_check(a, q, tol)
    identity = float(np.max(np.abs(slack - convexity_gap(a, q)) / (gap_scale(a, q) + 1e-300)))
    exact_min = None
    exact_diff = Decimal(0)
    for _ in range(spot):
        ai = [Fraction(int(v), 1000) for v in rng.integers(-10_000, 10_001, dim)]
        qi = [Fraction(int(v), 1000) for v in rng.integers(-10_000, 10_001, dim)]
        if all(v == 0 for v in ai):
            ai[0] = Fraction(1)
        g, s = exact_gap(ai, qi)
        exact_min = s if exact_min is None else min(exact_min, s)
        exact_diff = max(exact_diff, abs(g - s))
    ok = bool(np.all(holds)) and identity < 1e-13 and exact_min >= 0 and exact_diff < Decimal("1e-15")
    return SuiteSummary("key_inequality", ok, samples + spot, max(0.0, -float(slack.min())), seed, {
        "min_slack": float(slack.min()),
        "float_identity_error": identity,
        "exact_min_slack": float(exact_min),
        "exact_identity_error": float(exact_diff),
    })


def midpoint_convexity_suite(corpus: Sequence[SmoothField], lam: float,
                             pairs: Sequence[tuple[int, int]] | None = None,
                             tol: float = 1e-10) -> SuiteSummary:
    """F_lam[(u+v)/2] <= (F_lam[u] + F_lam[v])/2 + tol for the given index pairs (default: all)."""
    if not corpus:
        raise RejectedInput("empty corpus")
    R = corpus[0].R
    if any(abs(u.R - R) > 1e-14 * R for u in corpus):
        raise RejectedInput("all graphs must share the same support disk")
    if pairs is None:
        pairs = [(i, j) for i in range(len(corpus)) for j in range(i, len(corpus))]
    E = [energy_smooth(u, lam) for u in corpus]
    worst = -np.inf
    for i, j in pairs:
        mid = corpus[i].combine(0.5, corpus[j], 0.5)
        excess = energy_smooth(mid, lam) - 0.5 * (E[i] + E[j])
        worst = max(worst, excess)
    return SuiteSummary("midpoint_convexity", worst <= tol, len(pairs), max(0.0, worst), None,
                        {"max_excess": worst})


def random_corpus(size: int, R: float = 1.0, seed: int = SEEDS["midpoint"]) -> list[SmoothField]:
    rng = np.random.default_rng(seed)
    corpus = [profile_field(R), SmoothField.zero(R)]
    while len(corpus) < size:
        corpus.append(random_graph(rng, R))
    return corpus


def gateaux_suite(count: int = 20, R: float = 1.0, seed: int = SEEDS["gateaux"],
                  rel_tol: float = 1e-5) -> SuiteSummary:
    from .variational import gateaux_derivative

    rng = np.random.default_rng(seed)
    u = profile_field(R)
    lam = -2.0 / R
    worst = 0.0
    for _ in range(count):
        phi = random_variation(rng, R)
        d = gateaux_derivative(u, phi, lam)
        worst = max(worst, abs(d) / l2_norm_smooth(phi))
    return SuiteSummary("gateaux_at_minimizer", worst < rel_tol, count, worst, seed)


def iso_corpus(R: float = 1.0, seed: int = SEEDS["corpus"], random_count: int = 12) -> list[tuple[str, SmoothField, SmoothField]]:
    """Admissible non-optimal sets as (label, upper, lower) triples."""
    rng = np.random.default_rng(seed)
    out: list[tuple[str, SmoothField, SmoothField]] = []
    for c in (0.5, 0.8, 0.95, 1.05, 1.25, 2.0):
        f = profile_field(R, c)
        out.append((f"scaled_profile_{c}", f, f))
    for amp in (0.2, 0.4):
        f = tilted_graph(amp, (0.0, 0.0, 0.0, 0.0), R)
        out.append((f"paraboloid_{amp}", f, f))
    base = profile_field(R)
    for k in range(3):
        f = base + bump_variation(rng.uniform(-1.0, 1.0, 10), R) * 0.02
        out.append((f"perturbed_profile_{k}", f, f))
    for k in range(random_count):
        out.append((f"random_{k}", random_graph(rng, R), random_graph(rng, R)))
    return out


def iso_corpus_suite(R: float = 1.0, seed: int = SEEDS["corpus"], strict_gap: float = 1e-4,
                     far: float = 0.05) -> SuiteSummary:
    C = iso_constant(GroupContext(1))
    base = profile_field(R)
    rows = []
    ok = True
    worst = -np.inf
    for label, up, lo in iso_corpus(R, seed):
        ratio = set_iso_ratio(up, lo)
        dist = max(sup_distance(up, base), sup_distance(lo, base))
        gap = C - ratio
        good = gap > 0 and (dist <= far or gap > strict_gap)
        ok &= good
        worst = max(worst, ratio - C)
        rows.append({"label": label, "iso_ratio": ratio, "gap": gap, "sup_distance": dist, "passed": good})
    return SuiteSummary("iso_corpus", ok, len(rows), max(0.0, worst), seed, {"C_Q": C, "rows": rows})


# reference values from closed forms (Q = 4 and Q = 6, R = 1)
REFERENCE_CONSTANTS = {
    "Q4_half_volume": 3.0 * np.pi ** 2 / 32.0,
    "Q4_half_perimeter": np.pi ** 2 / 4.0,
    "Q4_C_Q": 0.32151853428937,
    "Q6_half_volume": 5.0 * np.pi ** 3 / 128.0,
    "Q6_half_perimeter": 3.0 * np.pi ** 3 / 16.0,
}


def constants_suite(rel_tol: float = 1e-10) -> SuiteSummary:
    """Closed forms and quadratures against the stored reference table; the ratio identity for Q = 4, 6."""
    from .closed_form import (
        half_perimeter,
        half_perimeter_quadrature,
        half_volume,
        half_volume_quadrature,
        iso_ratio,
    )

    computed = {}
    for n in (1, 2):
        ctx = GroupContext(n)
        Q = ctx.Q
        computed[f"Q{Q}_half_volume"] = (half_volume(1.0, ctx), half_volume_quadrature(1.0, ctx))
        computed[f"Q{Q}_half_perimeter"] = (half_perimeter(1.0, ctx), half_perimeter_quadrature(1.0, ctx))
        ratio = iso_ratio(half_volume(1.0, ctx), half_perimeter(1.0, ctx), Q)
        computed[f"Q{Q}_ratio_identity"] = (ratio, iso_constant(ctx))
    computed["Q4_C_Q"] = (iso_constant(GroupContext(1)),)
    worst = 0.0
    failing = []
    rows = {}
    for key, values in computed.items():
        ref = REFERENCE_CONSTANTS.get(key, values[-1])
        err = max(abs(v - ref) / abs(ref) for v in values)
        rows[key] = {"reference": ref, "values": list(values), "rel_error": err}
        worst = max(worst, err)
        # the stored C_Q carries 14 significant digits
        limit = 1e-12 if key == "Q4_C_Q" else rel_tol
        if err > max(limit, rel_tol):
            failing.append(key)
    return SuiteSummary("constants", not failing, len(rows), worst, None, {"rows": rows, "failing": failing})


def scaling_suite(factors: Sequence[float] = (0.5, 2.0, 3.7), rel_tol: float = 1e-8) -> SuiteSummary:
    """Perimeter ~ lam^(Q-1) and volume ~ lam^Q under dilations of the critical profile."""
    from .functionals import AnalyticRadial, h_perimeter_radial, volume_radial

    worst = 0.0
    for n in (1, 2):
        ctx = GroupContext(n)
        base = AnalyticRadial.of(RadialProfile.critical(n, 1.0))
        P0 = h_perimeter_radial(base, ctx)
        V0 = volume_radial(base, ctx)
        for f in factors:
            d = base.dilate(f)
            worst = max(worst,
                        abs(h_perimeter_radial(d, ctx) / (f ** (ctx.Q - 1) * P0) - 1.0),
                        abs(volume_radial(d, ctx) / (f ** ctx.Q * V0) - 1.0))
    return SuiteSummary("scaling", worst < rel_tol, 2 * len(factors) * 2, worst)


def curvature_suite(cases: Sequence[tuple[int, float]] = ((4, 1.0), (4, 2.0), (6, 1.0)),
                    points: int = 100, tol: float = 1e-8) -> SuiteSummary:
    """Mean curvature of the critical profile against (Q-2)/R at interior points."""
    from .functionals import mean_curvature_radial

    worst = 0.0
    for Q, R in cases:
        p = RadialProfile.critical((Q - 2) // 2, R)
        s = p.s_max * np.linspace(0.01, 0.99, points)
        H = mean_curvature_radial(p, s)
        worst = max(worst, float(np.max(np.abs(H - (Q - 2) / R))))
    return SuiteSummary("curvature", worst < tol, points * len(cases), worst)


def regularity_suite(third_tol: float = 5e-3, match_tol: float = 1e-6) -> SuiteSummary:
    """One-sided derivative limits at the center: third derivative +1 from the left and -1
    from the right, first and second derivatives continuous."""
    from .closed_form import regularity_probe

    probe = regularity_probe(GroupContext(1))
    third = max(abs(probe.left[3] - 1.0), abs(probe.right[3] + 1.0))
    match = max(abs(probe.right[k] - probe.left[k]) for k in (1, 2))
    ok = third < third_tol and match < match_tol
    return SuiteSummary("regularity", ok, 6, max(third, match), None, probe.as_dict())
