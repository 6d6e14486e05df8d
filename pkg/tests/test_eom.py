import numpy as np
import pytest
from hypothesis import given, strategies as st

from dngedge import fdcheck, families
from dngedge.deformation import DeformationField, edge_context, edge_field_data
from dngedge.eom import (background_residuals, boundary_linear_apply, bulk_jacobi_apply, endpoint_system,
                         jacobi_coefficients, pure_mode_obstruction)
from dngedge.fields import Constant, from_sympy
from dngedge.helicoid import background_solve, closed_form_curvatures, endpoint_modes, straight_string_modes
from dngedge.spacetime import minkowski
from dngedge.worldsheet import jet_at

M = minkowski()


def on_shell_helicoid(mu=1.0, mass=1.0, R=1.0):
    bg = background_solve(mu, mass, R)
    b = families.Helicoid(omega0=bg.omega0, R=R)
    return bg, b


def test_helicoid_background_on_shell():
    bg, b = on_shell_helicoid(1.3, 0.7, 0.9)
    pts = b.domain.grid([20, 20])
    ts = np.linspace(-1, 1, 11)
    res = background_residuals(b, [b.edge(+1), b.edge(-1)], M, bg.mu, bg.mass, pts, [ts, ts])
    assert max(res.maxima.values()) <= 1e-9
    assert res.split_residual(bg.mass) <= 1e-12


def test_angular_acceleration_breaks_bulk_equation():
    w, acc = 0.5, 0.3
    b = families.Helicoid(omega0=w, alpha=acc)
    for t, r in [(0.0, 0.5), (0.0, -0.3)]:
        j = jet_at(b, M, [t, r])
        assert abs(j.K[0, 0, 0] - (-r * acc / np.sqrt(1 - r * r * w * w))) < 1e-12
        assert abs(j.mean[0]) > 1e-3


@given(st.floats(0.3, 3.0), st.floats(0.5, 4.0))
def test_hyperbolic_endpoint_on_shell(rho, mu):
    b, e = families.build("hyperbolic", rho=rho)
    res = background_residuals(b, [e], M, mu, mu * rho, b.domain.grid([5, 5]), [np.linspace(-1, 1, 7)])
    assert max(res.maxima.values()) <= 1e-9


def test_plane_wave_on_flat_sheet():
    b, _ = families.build("plane")
    fields = [from_sympy("cos(t - s)", ["t", "s"]), from_sympy("sin(2*t + 2*s)", ["t", "s"])]
    for p in b.domain.grid([5, 5]):
        assert np.max(np.abs(bulk_jacobi_apply(b, M, p, fields))) <= 1e-9


def test_helicoid_free_channel_wave():
    w = 0.7
    b = families.Helicoid(omega0=w)
    X = f"asin({w}*s)/{w}"
    fields = [Constant(0.0), from_sympy(f"sin(t - {X})", ["t", "s"])]
    for p in b.domain.grid([6, 6], margin=0.05):
        assert np.max(np.abs(bulk_jacobi_apply(b, M, p, fields))) <= 1e-8


def test_helicoid_in_plane_channel_potential():
    w = 0.7
    b = families.Helicoid(omega0=w)
    fields = [from_sympy(f"sqrt(1 - {w}**2*s**2)", ["t", "s"]), Constant(0.0)]  # cos(w X)
    for p in b.domain.grid([4, 5], margin=0.05):
        c = np.sqrt(1 - w * w * p[1] ** 2)
        expect = -w * w / c - 2 * w * w / c ** 3
        out = bulk_jacobi_apply(b, M, p, fields)
        assert abs(out[0] - expect) <= 1e-8 * max(1, abs(expect)) and abs(out[1]) < 1e-10


def test_channel_decoupling():
    b = families.Helicoid(omega0=0.8)
    for p in b.domain.grid([5, 5], margin=0.05):
        c = jacobi_coefficients(b, M, p)
        assert abs(c["mass"][0, 1]) <= 1e-10 and abs(c["mass"][1, 0]) <= 1e-10
        assert np.max(np.abs(c["first"][:, 0, 1])) <= 1e-10 and np.max(np.abs(c["first"][:, 1, 0])) <= 1e-10


def test_totally_geodesic_psi_equation():
    b, e = families.build("plane")
    ctx = edge_context(e, b, M, [0.2])
    f = fdcheck.random_field(5)
    d = edge_field_data(f, ctx)
    ops = boundary_linear_apply(ctx, f)
    assert abs(ops.motion2 - np.einsum("AB,AB->", ctx.ej.h_inv, d.DDpsi)) < 1e-14


@pytest.mark.parametrize("mu,mass", [(2.0, 1.0), (1.0, 1.0), (3.0, 1.5)])
def test_straight_string_rates(mu, mass):
    b, e = families.build("hyperbolic", rho=mass / mu)
    es = endpoint_system(e, b, M, [0.2], mu=mu, mass=mass)
    A1, A0, _ = es.ode_form()
    assert np.max(np.abs(A1)) < 1e-12
    rate = np.sqrt(-A0[0, 0])
    assert abs(rate - straight_string_modes(mu, mass)["psi_rates"][0]) <= 1e-9
    assert np.max(np.abs(A0[1:, :])) < 1e-12 and np.max(np.abs(A0[:, 1:])) < 1e-12


def test_helicoid_endpoint_system_matches_closed_forms():
    bg, b = on_shell_helicoid()
    c = closed_form_curvatures(bg)
    spec = endpoint_modes(bg)
    ref = None
    for t in (-0.5, 0.0, 0.5):
        es = endpoint_system(b.edge(), b, M, [t], mu=1, mass=1)
        assert abs(es.K_perp_par[0] - c["K_perp_par"]) <= 1e-10
        assert abs(es.k - c["k"]) <= 1e-10
        assert abs(es.dK_perp_par[0]) <= 1e-9
        assert es.overall_sign == -1.0
        if ref is not None:
            assert np.max(np.abs(es.A0 - ref.A0)) <= 1e-10 and np.max(np.abs(es.A1 - ref.A1)) <= 1e-10
        ref = es
        for w in spec.roots:
            H = es.harmonic_matrix(w)[:2, :2]
            assert abs(np.linalg.det(H)) <= 1e-9 * np.max(np.abs(H)) ** 2


def test_endpoint_rows_have_no_bulk_feedback():
    bg, b = on_shell_helicoid()
    es = endpoint_system(b.edge(), b, M, [0.0], mu=1, mass=1)
    assert np.array_equal(es.bulk_coupling[0], np.zeros(2))
    ctx = edge_context(b.edge(), b, M, [0.0])
    f = fdcheck.random_field(2)
    d = edge_field_data(f, ctx)
    d0 = edge_field_data(f, ctx)
    d0.eta_grad_phi = np.zeros(2)
    a, z = boundary_linear_apply(ctx, d), boundary_linear_apply(ctx, d0)
    assert a.motion2 == z.motion2 and np.array_equal(a.motion3, z.motion3)
    assert np.allclose(a.motion3_connection, es.k * d.eta_grad_phi)


@pytest.fixture(scope="module")
def helicoid_obstruction():
    bg, b = on_shell_helicoid()
    e = b.edge()
    return {ch: pure_mode_obstruction(e, b, M, channel=c, normals=n).defect
            for ch, (c, n) in {"edge": ("edge", None), "phi1": ("bulk", [0]), "phi2": ("bulk", [1])}.items()}


def test_pure_edge_states_obstructed(helicoid_obstruction):
    assert helicoid_obstruction["edge"] > 0.1


def test_pure_in_plane_bulk_states_obstructed(helicoid_obstruction):
    assert helicoid_obstruction["phi1"] > 0.1


def test_out_of_plane_channel_admits_pure_states(helicoid_obstruction):
    # phi2 = a + b tau solves both boundary operators with psi = 0
    assert helicoid_obstruction["phi2"] < 1e-8


def test_decoupled_regime_has_no_obstruction():
    b, e = families.build("plane")
    assert pure_mode_obstruction(e, b, M, basis=24, samples=60).defect < 1e-8


def test_motion3_needs_connection_term_off_geodesic_edge():
    case = fdcheck.VerificationCase("motion3-linearization", "hyperbolic", {"rho": 0.8},
                                    {"kind": "random", "seed": 1}, mass=0.8)
    assert fdcheck.measure_response(case).passed
    bulk, edge, metric, fld = fdcheck._context(case)
    _, raw, _ = fdcheck._raw_for(case, bulk, edge, metric, fld)
    ctx = edge_context(edge, bulk, metric, [case.u])
    ops = boundary_linear_apply(ctx, fld)
    assert np.max(np.abs(ops.motion3_connection)) > 1e-2
    bare = fdcheck.compare(case, raw.q["hK"], -ops.motion3)
    assert not bare.passed


def test_boundary_operators_are_negated_responses():
    from dngedge.deformation import deform_k_trace, deform_K_trace
    b, e = families.build("catenoid")
    ctx = edge_context(e, b, M, [0.3])
    f = fdcheck.random_field(8)
    ops = boundary_linear_apply(ctx, f)
    assert abs(ops.motion2 + deform_k_trace(ctx, f)) < 1e-12
    assert np.allclose(ops.motion3, -deform_K_trace(ctx, f), atol=1e-12)
