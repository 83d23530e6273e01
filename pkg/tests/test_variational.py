from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from hgeo.analysis import profile_field, random_graph, random_variation
from hgeo.closed_form import RadialProfile, radius_for_volume
from hgeo.errors import RejectedInput
from hgeo.functionals import SmoothField, energy_2d, energy_smooth, l2_norm_smooth
from hgeo.graph import DiskGraph
from hgeo.group import GroupContext
from hgeo.variational import (
    SolverConfig,
    gateaux_derivative,
    lagrange_search,
    solve_2d,
    solve_2d_polar,
    solve_ode,
    solve_radial,
)

Q4 = GroupContext(1)
Q6 = GroupContext(2)
PROFILE = RadialProfile.critical(1, 1.0)


def test_config_validation():
    with pytest.raises(RejectedInput):
        SolverConfig(grid_size=32)
    with pytest.raises(RejectedInput):
        SolverConfig(tol_energy=0.0)
    with pytest.raises(RejectedInput):
        SolverConfig(tol_constraint=-1.0)
    with pytest.raises(RejectedInput):
        SolverConfig(step_rule="armijo")


# ODE route -----------------------------------------------------------------------

@pytest.mark.parametrize("ctx,R,frac", [(Q4, 1.0, 1.0), (Q4, 2.0, 1.0), (Q6, 1.0, 1.0), (Q4, 1.0, 0.5), (Q6, 3.0, 0.8)])
def test_ode_reproduces_closed_form(ctx, R, frac):
    lam = frac * -(ctx.Q - 2) / R
    prof = solve_ode(lam, R, ctx)
    exact = RadialProfile(ctx.n, R, lam)
    assert np.max(np.abs(prof.u - exact.u(prof.r))) < 1e-8 * R * R
    sel = (prof.r >= 0.05 * R) & (prof.r <= 0.95 * R)
    assert np.max(np.abs(prof.F[sel] - lam / (2 * ctx.n))) < 1e-10


def test_ode_volume_matches_oracle():
    assert solve_ode(-2.0, 1.0, Q4).half_volume == pytest.approx(3 * np.pi ** 2 / 32, abs=1e-12)


def test_ode_rejections():
    with pytest.raises(RejectedInput, match="H-minimal"):
        solve_ode(0.0, 1.0, Q4)
    with pytest.raises(RejectedInput):
        solve_ode(-2.5, 1.0, Q4)
    with pytest.raises(RejectedInput):
        solve_ode(1.0, 1.0, Q4)
    with pytest.raises(RejectedInput):
        solve_ode(-2.0, 0.0, Q4)


# multiplier search -------------------------------------------------------------------

def test_lagrange_search_examples():
    V = 3 * np.pi ** 2 / 16
    R, lam = lagrange_search(V, Q4)
    assert R == pytest.approx(1.0, abs=1e-8) and lam == pytest.approx(-2.0, abs=1e-8)
    R16, lam16 = lagrange_search(16 * V, Q4)
    assert R16 == pytest.approx(2 * R, rel=1e-10) and lam16 == pytest.approx(lam / 2, rel=1e-10)
    assert lagrange_search(2.5, Q6)[0] == pytest.approx(radius_for_volume(2.5, Q6), rel=1e-8)
    with pytest.raises(RejectedInput):
        lagrange_search(-1.0, Q4)


# radial descent ---------------------------------------------------------------------

def test_radial_recovers_profile():
    sample, rep = solve_radial(SolverConfig(grid_size=4096), 1.0, Q4)
    assert rep.converged
    assert rep.sup_error_vs_closed_form < 1e-3
    assert np.all(np.diff(rep.energy_trace) <= 0)
    assert sample.u[-1] == 0.0 and np.all(sample.u >= 0)


def test_radial_n2_and_other_radius():
    _, rep = solve_radial(SolverConfig(grid_size=2048), 2.0, Q6)
    assert rep.converged and rep.sup_error_vs_closed_form < 4e-3
    assert np.all(np.diff(rep.energy_trace) <= 0)


def test_radial_stationary_at_closed_form():
    # the sampled closed form is within discretization error of the discrete minimizer
    cfg = SolverConfig(grid_size=4096, init=PROFILE.u, max_iter=100, tol_energy=1e-10)
    _, rep = solve_radial(cfg, 1.0, Q4)
    assert abs(rep.energy_trace[0] - rep.energy_trace[-1]) < cfg.tol_energy
    assert np.all(np.diff(rep.energy_trace) <= 0)


def test_radial_nonconvergence_keeps_partial_result():
    sample, rep = solve_radial(SolverConfig(grid_size=1024, max_iter=2), 1.0, Q4)
    assert not rep.converged and rep.iterations == 2
    assert len(rep.energy_trace) == 3 and sample.u.shape == (1025,)


def test_fixed_step_rule_runs():
    _, rep = solve_radial(SolverConfig(grid_size=512, step_rule="fixed", step_size=0.5, max_iter=200), 1.0, Q4)
    assert rep.sup_error_vs_closed_form < 5e-3


def test_ode_and_descent_agree_on_shared_grid():
    K = 2048
    sample, _ = solve_radial(SolverConfig(grid_size=K), 1.0, Q4)
    prof = solve_ode(-2.0, 1.0, Q4, samples=K + 1)
    assert np.allclose(prof.r, sample.r, atol=1e-15)
    assert np.max(np.abs(prof.u - sample.u)) < 2e-3


def test_report_serialization(tmp_path):
    _, rep = solve_radial(SolverConfig(grid_size=256), 1.0, Q4)
    d = json.loads(rep.to_json())
    assert d["iterations"] == rep.iterations and d["converged"]
    path = tmp_path / "trace.csv"
    rep.write_trace_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iter", "energy", "constraint_residual", "sup_error"]
    assert len(rows) == len(rep.energy_trace) + 1
    assert float(rows[-1][1]) == rep.final_energy


# 2D descent ---------------------------------------------------------------------------

def test_2d_nonradial_start_small_grid():
    g, rep = solve_2d(SolverConfig(grid_size=64), 1.0)
    assert isinstance(g, DiskGraph) and g.N == 64
    assert rep.converged
    assert rep.extras["circular_spread"] < 5e-3
    assert rep.sup_error_vs_closed_form < 2e-2
    assert np.all(np.diff(rep.energy_trace) <= 0)


def test_2d_radial_start_stays_radial():
    cfg = SolverConfig(grid_size=64, init=lambda x, y: 0.3 * (1 - x * x - y * y))
    _, rep = solve_2d_polar(cfg, 1.0)
    assert max(rep.extras["spread_trace"]) < 1e-10


# Gateaux derivative ---------------------------------------------------------------------

def test_gateaux_vanishes_at_minimizer():
    rng = np.random.default_rng(11)
    u = profile_field()
    for _ in range(5):
        phi = random_variation(rng)
        assert abs(gateaux_derivative(u, phi, -2.0)) < 1e-5 * l2_norm_smooth(phi)
    # the radial profile object is accepted directly
    assert abs(gateaux_derivative(PROFILE, random_variation(rng), -2.0)) < 1e-8


@pytest.mark.parametrize("which", ["profile", "random"])
def test_gateaux_matches_difference_quotient(which):
    rng = np.random.default_rng(5)
    u = profile_field() if which == "profile" else random_graph(rng)
    phi = random_variation(rng)
    d = gateaux_derivative(u, phi, -2.0)
    E0 = energy_smooth(u, -2.0)
    errs = [abs(d - (energy_smooth(u + phi * eps, -2.0) - E0) / eps) for eps in (1e-3, 1e-4)]
    assert errs[1] < 0.2 * errs[0]
    assert errs[0] < 1e-2 * l2_norm_smooth(phi) + 1e-6


def test_gateaux_descent_direction_for_inflated_profile():
    u = profile_field(scale=1.1)
    direction = profile_field(scale=-0.1)
    assert gateaux_derivative(u, direction, -2.0) < 0


def test_gateaux_rejects_inadmissible():
    u = profile_field()
    lifted = SmoothField(lambda x, y: 1.0 + 0 * x, lambda x, y: (0 * x, 0 * y), 1.0)
    with pytest.raises(RejectedInput):
        gateaux_derivative(u, lifted, -2.0)
    with pytest.raises(RejectedInput):
        gateaux_derivative(u, random_variation(np.random.default_rng(0), R=2.0), -2.0)


def test_gateaux_grid_matches_difference_quotient():
    g = DiskGraph.from_radial(lambda r: 0.3 * (1 - r * r), 64, 1.0)
    rng = np.random.default_rng(2)
    phi_field = random_variation(rng)
    phi = DiskGraph.sample(phi_field.value, 64, 1.0)
    d = gateaux_derivative(g, phi, -2.0)
    E0 = energy_2d(g, -2.0)
    errs = [abs(d - (energy_2d(g.with_values(g.values + eps * phi.values), -2.0) - E0) / eps)
            for eps in (1e-3, 1e-4)]
    assert errs[1] < 0.2 * errs[0]


def test_gateaux_grid_rejects_inadmissible():
    g = DiskGraph.from_radial(PROFILE.u, 64, 1.0)
    bad = DiskGraph(values=np.ones((65, 65)), R=1.0)
    with pytest.raises(RejectedInput):
        gateaux_derivative(g, bad, -2.0)
    with pytest.raises(RejectedInput):
        gateaux_derivative(g, DiskGraph.from_radial(PROFILE.u, 32, 1.0), -2.0)
    with pytest.raises(RejectedInput):
        gateaux_derivative(g, profile_field(), -2.0)


# convexity properties of the functional --------------------------------------------------

def test_convexity_along_segments():
    rng = np.random.default_rng(21)
    for _ in range(10):
        u, v = random_graph(rng), random_graph(rng)
        th = rng.uniform(0.05, 0.95)
        mix = u.combine(th, v, 1 - th)
        lhs = energy_smooth(mix, -2.0)
        rhs = th * energy_smooth(u, -2.0) + (1 - th) * energy_smooth(v, -2.0)
        assert lhs <= rhs + 1e-10


def test_subgradient_inequality_at_minimizer():
    rng = np.random.default_rng(22)
    u = profile_field()
    E0 = energy_smooth(u, -2.0)
    for _ in range(10):
        phi = random_variation(rng) * rng.uniform(0.01, 0.3)
        assert energy_smooth(u + phi, -2.0) - E0 >= gateaux_derivative(u, phi, -2.0) - 1e-8


def test_global_minimality_on_corpus():
    rng = np.random.default_rng(23)
    E0 = energy_smooth(profile_field(), -2.0)
    for _ in range(50):
        assert E0 <= energy_smooth(random_graph(rng), -2.0)
