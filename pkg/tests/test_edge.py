import numpy as np
import pytest
from hypothesis import given, strategies as st

from dngedge import families
from dngedge.edge import CurveEdge, boundary_projections, compose, edge_jet_at
from dngedge.errors import DomainError
from dngedge.helicoid import background_solve, closed_form_curvatures
from dngedge.spacetime import minkowski
from dngedge.worldsheet import Domain

M = minkowski()


def test_helicoid_tangent_and_frames():
    w, R = 0.6, 1.0
    b, e = families.build("helicoid", omega0=w, R=R)
    ej = edge_jet_at(e, b, M, [0.4])
    th = w * 0.4
    f = ej.composed.f[:, 0]
    assert np.allclose(f, [1, -R * w * np.sin(th), R * w * np.cos(th), 0])
    # eta points out of the sheet: increasing r at r = R
    assert np.allclose(ej.eta_a, [0, 1])
    assert np.allclose(ej.eta, [0, np.cos(th), np.sin(th), 0])
    assert np.allclose(ej.v_a, [1 / np.sqrt(1 - w * w * R * R), 0])


@given(st.floats(0.2, 2.0), st.floats(0.05, 0.9))
def test_helicoid_edge_closed_forms(R, sq):
    w = np.sqrt(sq) / R
    u = sq
    b, e = families.build("helicoid", omega0=w, R=R)
    ej = edge_jet_at(e, b, M, [0.1])
    assert abs(ej.k - (-R * w * w / (1 - u))) < 1e-10
    bp = boundary_projections(ej)
    assert abs(bp.K_perp_par[0] - (-w / (1 - u))) < 1e-10
    assert np.max(np.abs(bp.K_par_par)) < 1e-12 and np.max(np.abs(bp.K_perp_perp)) < 1e-12
    assert bp.offdiag_residual < 1e-9


def test_rdot_par_par_closed_form():
    bg = background_solve(1, 1, 1)
    for rd in (0.15, -0.1):
        b = families.Helicoid(omega0=bg.omega0, R=1.0, Rdot=rd)
        ej = edge_jet_at(b.edge(), b, M, [0.0])
        expect = closed_form_curvatures(bg, Rdot=rd)["K_par_par"]
        assert abs(boundary_projections(ej).K_par_par[0] - expect) < 1e-8


def test_static_plane_edge():
    b, e = families.build("plane")
    ej = edge_jet_at(e, b, M, [0.0])
    assert np.allclose(ej.composed.f[:, 0], [1, 0, 0, 0])
    assert np.allclose(ej.h, [[-1.0]])
    assert not np.any(ej.L) and not np.any(ej.sigma)
    # the sheet lies at s >= 0, so eta = -d_s
    assert np.allclose(ej.eta_a, [0, -1])


def test_hyperbolic_edge_acceleration():
    for rho in (0.5, 1.0, 2.0):
        b, e = families.build("hyperbolic", rho=rho)
        ej = edge_jet_at(e, b, M, [0.3])
        assert abs(ej.k + 1 / rho) < 1e-10


def test_edge_leaving_domain():
    b, _ = families.build("plane")
    bad = CurveEdge(lambda t: ((t, -0.5), (1.0, 0.0), (0.0, 0.0)), Domain([-1], [1]))
    with pytest.raises(DomainError):
        compose(bad, b, M, [0.0])
