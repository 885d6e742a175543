import numpy as np
import pytest

from graphgeo.extrinsic import (
    graph_embedding_jet,
    minimality_report,
    second_fundamental_at,
)
from graphgeo.identities import PointData
from graphgeo.scenarios import get, registry


# ---------------------------------------------------------------------------
# Embedding jet
# ---------------------------------------------------------------------------

def test_embedding_jet_constant_map():
    sc = get("constant-s2")
    p = sc.domain.point([0.4, -0.2])
    jet = graph_embedding_jet(sc.f, p)
    assert np.abs(jet.d1[:2] - np.eye(2)).max() == 0.0
    assert np.abs(jet.d1[2:]).max() == 0.0
    assert np.abs(jet.d2).max() == 0.0


def test_embedding_jet_identity_map():
    sc = get("identity-s2")
    jet = graph_embedding_jet(sc.f, sc.domain.point([0.1, 0.1]))
    assert np.abs(jet.d1 - np.vstack([np.eye(2), np.eye(2)])).max() == 0.0


def test_embedding_jet_fd_cross_check():
    sc = get("holo-w2")
    x = np.array([0.5, -0.3])

    def d1_at(y):
        return graph_embedding_jet(sc.f, sc.domain.point(y)).d1

    exact = graph_embedding_jet(sc.f, sc.domain.point(x)).d2

    def disc(h):
        fd = np.zeros_like(exact)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd[:, :, k] = (d1_at(x + e) - d1_at(x - e)) / (2 * h)
        # exact layout: d2[C, i, j]; fd built as d_j of d1[C, i]
        return np.abs(fd - exact).max()

    d1, d2 = disc(1e-4), disc(5e-5)
    assert d1 < 1e-10 or 3.5 <= d1 / d2 <= 4.5


# ---------------------------------------------------------------------------
# Second fundamental form
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["constant-s2", "constant-s3", "identity-s2",
                                  "identity-s3", "rotation-s2", "torus-linear"])
def test_totally_geodesic_scenarios_have_vanishing_a(name):
    sc = get(name)
    rng = np.random.default_rng(20)
    for p in sc.random_points(10, rng):
        ext = second_fundamental_at(sc.f, p)
        assert ext.a_norm_sq < 1e-10
        assert ext.h_norm < 1e-10


@pytest.mark.parametrize("name", ["holo-w2", "holo-w3"])
def test_holomorphic_graphs_are_minimal_but_curved(name):
    sc = get(name)
    rng = np.random.default_rng(21)
    max_a = 0.0
    for p in sc.random_points(100, rng):
        ext = second_fundamental_at(sc.f, p)
        assert ext.h_norm < 1e-6
        max_a = max(max_a, ext.a_norm_sq)
    assert max_a > 1e-4


def test_normality_of_a_on_all_scenarios():
    # Gauss formula: A(e_i, e_j) is orthogonal to the graph tangent space
    rng = np.random.default_rng(22)
    for sc in registry().values():
        for p in sc.random_points(10, rng):
            ext = second_fundamental_at(sc.f, p)
            assert ext.tangency_residual < 1e-6


def _random_orthonormal_frame(g, rng):
    m = g.shape[0]
    basis = []
    while len(basis) < m:
        v = rng.normal(size=m)
        for b in basis:
            v = v - float(b @ g @ v) * b
        norm = np.sqrt(float(v @ g @ v))
        if norm > 1e-6:
            basis.append(v / norm)
    return np.array(basis).T


def test_scalar_invariants_are_frame_independent():
    rng = np.random.default_rng(23)
    for name in ("holo-w2", "proj-s3-s1", "conformal-shrink"):
        sc = get(name)
        for p in sc.random_points(5, rng):
            ext = second_fundamental_at(sc.f, p)
            d = PointData(sc.f, p)
            E = _random_orthonormal_frame(d.g, rng)
            a_sq = 0.0
            h_m = np.zeros(sc.domain.dim)
            h_n = np.zeros(sc.target.dim)
            for i in range(sc.domain.dim):
                for j in range(sc.domain.dim):
                    a = ext.a_coord(E[:, i], E[:, j])
                    a_sq += d.product_inner(a, a)
                    if i == j:
                        h_m += a.m_part
                        h_n += a.n_part
            from graphgeo.product_space import SplitVector
            h_norm = np.sqrt(d.product_inner(SplitVector(h_m, h_n),
                                             SplitVector(h_m, h_n)))
            assert abs(a_sq - ext.a_norm_sq) < 1e-8
            assert abs(h_norm - ext.h_norm) < 1e-8


def test_normal_estimate_on_frame_normals():
    # the split form on any normal direction is bounded by the shifted level
    rng = np.random.default_rng(24)
    for sc in registry().values():
        for p in sc.random_points(5, rng):
            d = PointData(sc.f, p)
            lam_max_sq = float(d.frames.lambdas[-1] ** 2)
            for c in (lam_max_sq, lam_max_sq + 1.0):
                bound = (c - 1.0) / (1.0 + c)
                for xi in d.frames.xi:
                    lhs = d.split_form(xi, xi)
                    rhs = bound * d.product_inner(xi, xi)
                    assert lhs <= rhs + 1e-10


# ---------------------------------------------------------------------------
# Minimality report
# ---------------------------------------------------------------------------

def test_minimality_report_identity():
    sc = get("identity-s2")
    rep = minimality_report(sc.f, sc.grid_points((6, 6)))
    assert rep.is_totally_geodesic
    assert rep.is_minimal


def test_minimality_report_w2():
    sc = get("holo-w2")
    rep = minimality_report(sc.f, sc.grid_points((8, 8)))
    assert rep.is_minimal
    assert not rep.is_totally_geodesic
    # genuinely curved: certified well above the decision threshold
    assert rep.max_a_norm > 10 * rep.geodesic_tol


def test_minimality_report_projection_not_minimal():
    sc = get("proj-s3-s1")
    rep = minimality_report(sc.f, sc.grid_points((4, 4, 4)))
    assert not rep.is_minimal
    assert rep.max_h_norm > 10 * rep.minimal_tol


def test_minimality_report_torus_linear():
    sc = get("torus-linear")
    rep = minimality_report(sc.f, sc.grid_points((5, 5)))
    assert rep.is_totally_geodesic


def test_minimality_report_empty_grid():
    sc = get("identity-s2")
    with pytest.raises(ValueError):
        minimality_report(sc.f, [])
