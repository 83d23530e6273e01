from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgeo.errors import RejectedInput
from hgeo.functionals import h_perimeter_2d
from hgeo.graph import DiskGraph, inversion_graph
from hgeo.group import (
    GroupContext,
    HeisenbergPoint,
    dilate,
    group_inv,
    group_mul,
    inversion_map,
    perp,
    translate_graph,
)

coord = st.floats(-10.0, 10.0, allow_nan=False)


def points(n: int = 1):
    return st.builds(lambda z, t: HeisenbergPoint(np.array(z), t),
                     st.lists(coord, min_size=2 * n, max_size=2 * n), coord)


def close(a: HeisenbergPoint, b: HeisenbergPoint, tol: float = 1e-12) -> bool:
    return np.allclose(a.as_tuple(), b.as_tuple(), rtol=0.0, atol=tol)


def test_context_homogeneous_dimension():
    assert GroupContext(1).Q == 4
    assert GroupContext(3).Q == 8
    with pytest.raises(RejectedInput):
        GroupContext(0)


def test_point_validation():
    with pytest.raises(RejectedInput):
        HeisenbergPoint(np.array([1.0, 2.0, 3.0]), 0.0)
    g = HeisenbergPoint.from_xyt([1.0, 2.0], [3.0, 4.0], 5.0)
    assert g.n == 2
    assert list(g.x) == [1.0, 2.0] and list(g.y) == [3.0, 4.0]


def test_mul_direct_evaluation():
    a = HeisenbergPoint.from_xyt([1.0], [0.0], 0.0)
    b = HeisenbergPoint.from_xyt([0.0], [1.0], 0.0)
    assert group_mul(a, b).as_tuple() == (1.0, 1.0, 0.5)


def test_identity_and_inverse_examples():
    g = HeisenbergPoint.from_xyt([1.0], [1.0], 0.5)
    assert group_mul(g, HeisenbergPoint.identity(1)).as_tuple() == g.as_tuple()
    assert group_inv(g).as_tuple() == (-1.0, -1.0, -0.5)
    assert group_inv(HeisenbergPoint.identity(1)).as_tuple() == (0.0, 0.0, 0.0)


def test_dimension_mismatch_rejected():
    with pytest.raises(RejectedInput):
        group_mul(HeisenbergPoint.identity(1), HeisenbergPoint.identity(2))


def test_perp_block_swap():
    assert list(perp(np.array([1.0, 2.0, 3.0, 4.0]))) == [3.0, 4.0, -1.0, -2.0]


@settings(derandomize=True, max_examples=200)
@given(points(), points(), points())
def test_associativity(a, b, c):
    assert close(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c)), 1e-12)


@settings(derandomize=True, max_examples=100)
@given(points(2))
def test_inverse(g):
    assert close(group_mul(g, group_inv(g)), HeisenbergPoint.identity(2), 1e-12)
    assert close(group_mul(group_inv(g), g), HeisenbergPoint.identity(2), 1e-12)


@settings(derandomize=True, max_examples=200)
@given(points(), points(), st.floats(0.1, 5.0))
def test_dilation_is_automorphism(a, b, lam):
    lhs = dilate(group_mul(a, b), lam)
    rhs = group_mul(dilate(a, lam), dilate(b, lam))
    assert np.allclose(lhs.as_tuple(), rhs.as_tuple(), rtol=1e-12, atol=1e-12)


@settings(derandomize=True, max_examples=100)
@given(points(), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_dilation_semigroup(g, lam, mu):
    a = dilate(dilate(g, lam), mu)
    b = dilate(g, lam * mu)
    assert np.allclose(a.as_tuple(), b.as_tuple(), rtol=1e-13, atol=1e-13)


def test_dilation_examples():
    g = HeisenbergPoint.from_xyt([1.0], [0.0], 1.0)
    assert dilate(g, 2.0).as_tuple() == (2.0, 0.0, 4.0)
    assert dilate(g, 1.0).as_tuple() == g.as_tuple()
    with pytest.raises(RejectedInput):
        dilate(g, 0.0)
    with pytest.raises(RejectedInput):
        dilate(g, -1.0)


def test_inversion_example():
    g = HeisenbergPoint.from_xyt([1.0], [0.0], 2.0)
    assert inversion_map(g).as_tuple() == (0.0, 1.0, -2.0)


@settings(derandomize=True, max_examples=200)
@given(points(), points())
def test_inversion_involution_and_automorphism(a, b):
    assert inversion_map(inversion_map(a)).as_tuple() == a.as_tuple()
    # the swap reverses the sign of the bilinear term, as does t -> -t
    assert close(inversion_map(group_mul(a, b)), group_mul(inversion_map(a), inversion_map(b)), 1e-12)


def test_inversion_preserves_cell_volumes():
    # a sampled box maps to a box with the same edge lengths
    rng = np.random.default_rng(3)
    lo = rng.uniform(-1, 1, 3)
    size = rng.uniform(0.1, 1.0, 3)
    corners = [HeisenbergPoint.from_xyt([lo[0] + i * size[0]], [lo[1] + j * size[1]], lo[2] + k * size[2])
               for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    img = np.array([inversion_map(c).as_tuple() for c in corners])
    extent = img.max(axis=0) - img.min(axis=0)
    assert np.prod(extent) == pytest.approx(np.prod(size), rel=1e-14)


def _profile_graph(N: int = 64) -> DiskGraph:
    from hgeo.closed_form import RadialProfile

    p = RadialProfile.critical(1, 1.0)
    return DiskGraph.from_radial(p.u, N, 1.0)


def test_translate_identity_and_vertical_shift():
    u = _profile_graph()
    v = translate_graph(u, HeisenbergPoint.identity(1))
    assert np.array_equal(v.values, u.values)
    w = translate_graph(u, HeisenbergPoint.from_xyt([0.0], [0.0], 0.7))
    X, Y = w.node_coords()
    assert np.allclose(w.values[u.inside], u.values[u.inside] + 0.7, atol=1e-15)


def test_translate_matches_group_action():
    u = _profile_graph()
    g0 = HeisenbergPoint.from_xyt([0.3], [-0.2], 0.1)
    v = translate_graph(u, g0)
    # a graph point (z, u(z)) is carried to g0 * (z, u(z))
    dx, dy = u.offsets()
    sel = u.inside & (np.hypot(dx, dy) < 0.8)
    for i, j in list(zip(*np.nonzero(sel)))[::97]:
        p = group_mul(g0, HeisenbergPoint.from_xyt([dx[i, j]], [dy[i, j]], u.values[i, j]))
        assert float(v.interpolate(np.array([p.x[0]]), np.array([p.y[0]]))[0]) == pytest.approx(p.t, abs=1e-12)


def test_translate_preserves_perimeter():
    u = _profile_graph(128)
    v = translate_graph(u, HeisenbergPoint.from_xyt([-1.7], [2.5], -3.0))
    assert h_perimeter_2d(v) == pytest.approx(h_perimeter_2d(u), abs=1e-12)


def test_translate_rejects_higher_n():
    with pytest.raises(RejectedInput):
        translate_graph(_profile_graph(), HeisenbergPoint.identity(2))


def test_inversion_graph_preserves_perimeter():
    u = _profile_graph(96)
    assert h_perimeter_2d(inversion_graph(u)) == pytest.approx(h_perimeter_2d(u), abs=1e-12)
