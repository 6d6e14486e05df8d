import numpy as np
import pytest
from hypothesis import given, strategies as st

from dngedge.errors import DegeneracyError, DomainError, SignatureError
from dngedge.spacetime import (christoffel_at, from_expressions, lowered_riemann, metric_at, minkowski,
                               minkowski_cylindrical, provider_by_name, riemann_at,
                               riemann_symmetry_residuals)

coords = st.floats(-3, 3)


@given(st.lists(coords, min_size=4, max_size=4))
def test_minkowski_cartesian_constant(x):
    g = metric_at(minkowski(), np.array(x))
    assert np.array_equal(g, np.diag([-1.0, 1, 1, 1]))
    assert not np.any(christoffel_at(minkowski(), np.array(x)).christoffel)


def test_cylindrical_metric_and_christoffel():
    M = minkowski_cylindrical()
    p = np.array([0.0, 2.0, 0.3, 0.0])
    assert np.allclose(metric_at(M, p), np.diag([-1.0, 1, 4, 1]))
    G = christoffel_at(M, p).christoffel
    expect = np.zeros((4, 4, 4))
    expect[1, 2, 2] = -2.0
    expect[2, 1, 2] = expect[2, 2, 1] = 0.5
    assert np.allclose(G, expect, atol=1e-12)


def test_symbolic_christoffel_oracle():
    import sympy
    t, r, th, z = sympy.symbols("t r th z")
    g = sympy.diag(-1, 1, r ** 2, 1)
    X = [t, r, th, z]
    gi = g.inv()
    M = from_expressions(["t", "r", "th", "z"], {"0,0": "-1", "1,1": "1", "2,2": "r**2", "3,3": "1"})
    p = {t: 0.1, r: 1.7, th: 0.4, z: -0.2}
    G = christoffel_at(M, np.array([float(v) for v in p.values()])).christoffel
    for m in range(4):
        for n in range(4):
            for q in range(4):
                ex = sum(gi[m, s] * (sympy.diff(g[s, n], X[q]) + sympy.diff(g[s, q], X[n])
                                     - sympy.diff(g[n, q], X[s])) for s in range(4)) / 2
                assert abs(G[m, n, q] - float(ex.subs(p))) < 1e-10


def test_cylindrical_axis_is_degenerate():
    with pytest.raises(DegeneracyError):
        metric_at(minkowski_cylindrical(), np.array([0.0, 0.0, 0.0, 0.0]))


def test_outside_chart_rejected():
    with pytest.raises(DomainError):
        metric_at(minkowski_cylindrical(), np.array([0.0, -1.0, 0.0, 0.0]))


def test_euclidean_metric_rejected():
    M = from_expressions(["a", "b"], {"0,0": "1", "1,1": "1"})
    with pytest.raises(SignatureError):
        metric_at(M, np.zeros(2))


def test_flat_riemann_vanishes():
    assert not np.any(riemann_at(minkowski(), np.zeros(4)).riemann)
    M = from_expressions(["t", "r", "th", "z"], {"0,0": "-1", "1,1": "1", "2,2": "r**2", "3,3": "1"})
    assert np.max(np.abs(riemann_at(M, np.array([0.0, 1.3, 0.2, 0.0])).riemann)) < 1e-8


def sphere_block():
    return from_expressions(["t", "th", "ph", "z"], {"0,0": "-1", "1,1": "1", "2,2": "sin(th)**2", "3,3": "1"},
                            domain="(th > 0) & (th < 3.14159)")


@given(st.floats(0.3, 2.8), st.floats(-3, 3))
def test_sphere_constant_curvature(th, ph):
    M = sphere_block()
    s = riemann_at(M, np.array([0.0, th, ph, 0.0]))
    R = lowered_riemann(M, s)
    g = metric_at(M, s.point)[1:3, 1:3]
    block = R[1:3, 1:3, 1:3, 1:3]
    expect = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    assert np.max(np.abs(block - expect)) < 1e-6
    assert abs(R[1, 2, 1, 2] - np.sin(th) ** 2) < 1e-6
    assert max(riemann_symmetry_residuals(R).values()) < 1e-6


def test_product_of_flat_blocks():
    M = from_expressions(["t", "x", "r", "ph"], {"0,0": "-1", "1,1": "1", "2,2": "1", "3,3": "r**2"})
    assert np.max(np.abs(riemann_at(M, np.array([0.0, 0.1, 1.5, 0.4])).riemann)) < 1e-8


def test_provider_lookup(tmp_path):
    assert provider_by_name("minkowski-cylindrical").name == "minkowski-cylindrical"
    f = tmp_path / "m.json"
    f.write_text('{"coordinates": ["t", "x"], "components": {"0,0": "-1", "1,1": "1"}}')
    M = provider_by_name(f"custom:{f}")
    assert np.array_equal(metric_at(M, np.zeros(2)), np.diag([-1.0, 1.0]))
    with pytest.raises(KeyError):
        provider_by_name("nope")
