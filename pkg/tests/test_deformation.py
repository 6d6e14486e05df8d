import numpy as np
import pytest
from hypothesis import given, strategies as st

from dngedge import fdcheck, families
from dngedge.deformation import (DeformationField, deform_edge_metric, deform_k_AB, deform_k_trace,
                                 deform_K_AB, deform_K_trace, deformation_connection, deformation_response,
                                 edge_context, edge_field_data, hypersurface_check)
from dngedge.errors import InputError
from dngedge.fields import Constant, ScalarField, TrigField, from_sympy
from dngedge.spacetime import minkowski

M = minkowski()
ALL = (deform_edge_metric, deform_k_AB, deform_k_trace, deform_K_AB, deform_K_trace)


def ctx_for(name, u=0.3, **params):
    b, e = families.build(name, **params)
    return edge_context(e, b, M, [u])


def const_field(psi=0.0, phi=(0.0, 0.0)):
    return DeformationField(Constant(psi), [Constant(p) for p in phi])


@pytest.mark.parametrize("name", ["plane", "tilted-plane", "cylinder", "helicoid", "catenoid"])
def test_null_field_gives_zero(name):
    ctx = ctx_for(name)
    for fn in ALL:
        assert not np.any(fn(ctx, DeformationField.null()))


@given(st.integers(0, 10 ** 6))
def test_flat_half_plane_vanishes(seed):
    ctx = ctx_for("plane")
    f = fdcheck.random_field(seed)
    assert not np.any(deform_edge_metric(ctx, f))
    # totally geodesic sheet with geodesic edge: k-response is -D^2 psi alone
    d = edge_field_data(f, ctx)
    assert np.isclose(deform_k_trace(ctx, f), -np.einsum("AB,AB->", ctx.ej.h_inv, d.DDpsi), atol=1e-14)


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from(["tilted-plane", "cylinder", "helicoid", "catenoid"]))
def test_linearity(s1, s2, a, b, name):
    ctx = ctx_for(name)
    f1, f2 = fdcheck.random_field(s1), fdcheck.random_field(s2)
    d1, d2 = edge_field_data(f1, ctx), edge_field_data(f2, ctx)
    comb = edge_field_data(a * f1 + b * f2, ctx)
    for fn in ALL:
        lhs, rhs = fn(ctx, comb), a * fn(ctx, d1) + b * fn(ctx, d2)
        assert np.max(np.abs(np.asarray(lhs) - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_helicoid_delh_constant_psi():
    w = np.sqrt(0.5)
    ctx = ctx_for("helicoid", omega0=w, R=1.0)
    u = 0.5
    dh = deform_edge_metric(ctx, const_field(psi=1.0))
    # coordinate time: h_tt = -(1 - u); proper time divides by the lapse squared
    assert abs(dh[0, 0] - 2 * ctx.ej.k * ctx.ej.h[0, 0]) < 1e-14
    assert abs(dh[0, 0] / (1 - u) - 2 * w * w / (1 - u)) < 1e-12


def test_geodesic_edge_constant_psi():
    ctx = ctx_for("plane")
    assert not np.any(deform_k_AB(ctx, const_field(psi=1.0)))


@given(st.floats(0.5, 3.0), st.floats(-1, 1))
def test_straight_edge_sine(w, t):
    b, e = families.build("plane")
    ctx = edge_context(e, b, M, [t])
    f = DeformationField(ScalarField(lambda xi: np.sin(w * xi[0]),
                                     lambda xi: np.array([w * np.cos(w * xi[0]), 0.0]),
                                     lambda xi: np.array([[-w * w * np.sin(w * xi[0]), 0], [0, 0]])),
                         [Constant(0.0), Constant(0.0)])
    # -h^{tt} d_t^2 psi with h_tt = -1
    assert abs(deform_k_trace(ctx, f) - (-w * w * np.sin(w * t))) < 1e-12


def test_totally_geodesic_hK_is_minus_laplacian():
    ctx = ctx_for("plane")
    f = fdcheck.random_field(3)
    d = edge_field_data(f, ctx)
    expect = -np.einsum("AB,ABi->i", ctx.ej.h_inv, d.DDphi)
    assert np.allclose(deform_K_trace(ctx, f), expect, atol=1e-14)


def test_helicoid_hK_constant_phi():
    ctx = ctx_for("helicoid", omega0=np.sqrt(0.5), R=1.0)
    phi = np.array([0.7, -0.4])
    out = deform_K_trace(ctx, const_field(phi=phi))
    # K_par_par = 0 and K_perp_par^2 = 2 at u = 1/2
    assert np.allclose(out, [-2.0 * phi[0], 0.0], atol=1e-12)


def test_connection_vanishes_on_shell_boundary():
    ctx = ctx_for("helicoid", omega0=0.6)
    f = DeformationField(fdcheck.random_field(1).psi, [Constant(0.3), Constant(-0.2)])
    conn = deformation_connection(ctx, f)
    assert np.max(np.abs(conn.gamma_0i)) < 1e-14
    assert np.allclose(conn.plain_k_AB, deform_k_AB(ctx, f), atol=1e-14)


def test_connection_off_shell_and_hypersurface_formula():
    b, e = families.build("catenoid")
    ctx = edge_context(e, b, M, [0.3])
    psi = fdcheck.deterministic_fields()[0].psi
    f = DeformationField(psi, [Constant(0.0), Constant(0.0)])
    d = edge_field_data(f, ctx)
    K_ee = np.einsum("iab,a,b->i", ctx.ej.bulk.K, ctx.ej.eta_a, ctx.ej.eta_a)
    assert np.any(np.abs(K_ee) > 1e-3)
    assert np.allclose(deformation_connection(ctx, f).gamma_0i, -K_ee * d.psi, atol=1e-14)
    plain, hyper = hypersurface_check(e, b, M, [0.3], f)
    assert np.max(np.abs(plain - hyper)) < 1e-6 * max(1.0, np.max(np.abs(hyper)))


def test_twist_free_rotation_part():
    ctx = ctx_for("helicoid")
    g = np.array([[0.0, 0.2], [-0.2, 0.0]])
    conn = deformation_connection(ctx, const_field(psi=1.0), gamma_ij=g)
    assert np.allclose(conn.gamma_ij, g, atol=1e-14)


def test_flat_appendix_variants_bitwise():
    b, e = families.build("catenoid")
    ctx = edge_context(e, b, M, [0.3], with_riemann=True)
    f = edge_field_data(fdcheck.random_field(11), ctx)
    for fn in ALL[1:]:
        assert np.array_equal(fn(ctx, f, curved=True), fn(ctx, f))
    a, c = deformation_response(ctx, f), deformation_response(ctx, f, curved=True)
    assert np.array_equal(a.connection.plain_hK, c.connection.plain_hK)


def test_curved_variant_needs_riemann():
    ctx = ctx_for("catenoid")
    with pytest.raises(InputError):
        deform_k_AB(ctx, const_field(psi=1.0), curved=True)


def test_flipped_divergence_sign_fails_oracle():
    case = fdcheck.VerificationCase("dtrKAB", "catenoid")
    report = fdcheck.measure_response(case)
    assert report.passed
    bulk, edge, metric, fld = fdcheck._context(case)
    _, raw, _ = fdcheck._raw_for(case, bulk, edge, metric, fld)
    ctx = edge_context(edge, bulk, metric, [case.u])
    flipped = deform_K_trace(ctx, fld, flip_divergence_sign=True)
    bad = fdcheck.compare(case, [x[1:] for x in raw.q["hat_trace"]], flipped)
    assert not bad.passed and bad.rel_error > 0.1


def test_component_mismatch():
    ctx = ctx_for("plane")
    with pytest.raises(InputError):
        edge_field_data(DeformationField(Constant(0.0), [Constant(0.0)]), ctx)


def test_sympy_fields():
    f = from_sympy("t**2 * sin(s)", ["t", "s"])
    v, g, H = f.jet(np.array([0.5, 0.3]))
    assert np.isclose(v, 0.25 * np.sin(0.3))
    assert np.allclose(g, [np.sin(0.3), 0.25 * np.cos(0.3)])
    assert np.allclose(H, [[2 * np.sin(0.3), np.cos(0.3)], [np.cos(0.3), -0.25 * np.sin(0.3)]])
    with pytest.raises(InputError):
        from_sympy("t + q", ["t", "s"])


def test_trig_field_jet_matches_fallback():
    tf = TrigField.random(np.random.default_rng(0))
    num = ScalarField(tf)
    a, b = tf.jet(np.array([0.2, 0.4])), num.jet(np.array([0.2, 0.4]))
    assert np.allclose(a[1], b[1], atol=1e-6) and np.allclose(a[2], b[2], atol=1e-5)
