"""Ambient spacetime: metric, Christoffel symbols and Riemann tensor.

Signature is mostly plus, (-, +, ..., +). Index placement of the stored arrays:

* ``christoffel[mu, nu, rho]`` is Gamma^mu_{nu rho};
* ``riemann[mu, nu, sigma, rho]`` is R^mu_{nu sigma rho} with
  R^mu_{nu sigma rho} = d_sigma Gamma^mu_{nu rho} - d_rho Gamma^mu_{nu sigma}
  + Gamma^mu_{sigma lam} Gamma^lam_{nu rho} - Gamma^mu_{rho lam} Gamma^lam_{nu sigma},
  so that a unit two-sphere has R_{theta phi theta phi} = sin^2 theta.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _numdiff
from .errors import DegeneracyError, DomainError, MetricError, SignatureError

SYMMETRY_TOL = 1e-14
DET_TOL = 1e-12


class MetricProvider:
    """Immutable description of an ambient metric on a single chart.

    ``metric(x)`` returns the N x N matrix g_{mu nu}; ``dmetric(x)``, when given,
    returns d_rho g_{mu nu} indexed ``[rho, mu, nu]``. ``constant`` providers have
    exactly vanishing Christoffel symbols, ``flat`` providers exactly vanishing
    Riemann tensor.
    """

    def __init__(self, dim, metric, dmetric=None, domain=None, name="custom",
                 flat=False, constant=False, coordinates=None):
        self.dim = int(dim)
        self._metric = metric
        self._dmetric = dmetric
        self._domain = domain
        self.name = name
        self.flat = bool(flat or constant)
        self.constant = bool(constant)
        self.coordinates = tuple(coordinates) if coordinates else tuple(f"x{i}" for i in range(self.dim))

    def __repr__(self):
        return f"MetricProvider({self.name!r}, dim={self.dim})"

    def in_domain(self, point):
        return True if self._domain is None else bool(self._domain(np.asarray(point, dtype=float)))

    @property
    def has_analytic_derivative(self):
        return self._dmetric is not None

    def raw_metric(self, point):
        return np.asarray(self._metric(np.asarray(point, dtype=float)), dtype=float)

    def raw_dmetric(self, point):
        return np.asarray(self._dmetric(np.asarray(point, dtype=float)), dtype=float)


def _check_point(provider, point):
    point = np.asarray(point, dtype=float)
    if point.shape != (provider.dim,):
        raise DomainError(f"point has shape {point.shape}, expected ({provider.dim},)")
    if not provider.in_domain(point):
        raise DomainError(f"point {point.tolist()} outside the domain of {provider.name}")
    return point


def metric_at(provider, point):
    """Validated metric matrix g_{mu nu} at ``point``."""
    point = _check_point(provider, point)
    g = provider.raw_metric(point)
    if np.max(np.abs(g - g.T)) > SYMMETRY_TOL:
        raise MetricError(f"metric of {provider.name} not symmetric at {point.tolist()}")
    if abs(np.linalg.det(g)) <= DET_TOL:
        raise DegeneracyError(f"metric of {provider.name} degenerate at {point.tolist()}")
    negative = int(np.sum(np.linalg.eigvalsh(g) < 0.0))
    if negative != 1:
        raise SignatureError(
            f"metric of {provider.name} has {negative} negative eigenvalues at {point.tolist()}")
    return g


def metric_derivative(provider, point):
    """d_rho g_{mu nu} indexed ``[rho, mu, nu]``."""
    point = _check_point(provider, point)
    n = provider.dim
    if provider.constant:
        return np.zeros((n, n, n))
    if provider.has_analytic_derivative:
        return provider.raw_dmetric(point)
    for a in range(n):
        h = _numdiff.default_step(point[a])
        for s in (-1.0, 1.0):
            probe = point.copy()
            probe[a] += s * h
            if not provider.in_domain(probe):
                raise DomainError(
                    f"finite-difference neighbourhood of {point.tolist()} leaves the chart")
    dg = _numdiff.gradient(provider.raw_metric, point)
    return 0.5 * (dg + np.swapaxes(dg, 1, 2))


@dataclass(frozen=True)
class CurvatureSample:
    point: np.ndarray
    christoffel: np.ndarray
    riemann: Optional[np.ndarray] = None


def _christoffel_array(provider, point):
    n = provider.dim
    if provider.constant:
        return np.zeros((n, n, n))
    g = metric_at(provider, point)
    dg = metric_derivative(provider, point)
    # lowered[s, nu, rho] = d_nu g_{s rho} + d_rho g_{s nu} - d_s g_{nu rho}
    lowered = (np.einsum("nsr->snr", dg) + np.einsum("rsn->snr", dg) - dg)
    gamma = 0.5 * np.einsum("ms,snr->mnr", np.linalg.inv(g), lowered)
    return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))


def christoffel_at(provider, point):
    point = _check_point(provider, point)
    return CurvatureSample(point=point, christoffel=_christoffel_array(provider, point))


RIEMANN_STEP = 1e-3


def riemann_at(provider, point):
    """Christoffel symbols and Riemann tensor R^mu_{nu sigma rho}."""
    point = _check_point(provider, point)
    n = provider.dim
    gam = _christoffel_array(provider, point)
    if provider.flat:
        return CurvatureSample(point=point, christoffel=gam, riemann=np.zeros((n, n, n, n)))
    dgam = np.empty((n, n, n, n))  # [sigma, mu, nu, rho] = d_sigma Gamma^mu_{nu rho}
    for s in range(n):
        h = RIEMANN_STEP * max(1.0, abs(point[s]))
        for sign in (-1.0, 1.0):
            probe = point.copy()
            probe[s] += sign * h
            if not provider.in_domain(probe):
                raise DomainError(
                    f"curvature neighbourhood of {point.tolist()} leaves the chart")
        dgam[s] = _numdiff.richardson_partial(
            lambda y: _christoffel_array(provider, y), point, s, h)
    riem = (np.einsum("smnr->mnsr", dgam) - np.einsum("rmns->mnsr", dgam)
            + np.einsum("msl,lnr->mnsr", gam, gam) - np.einsum("mrl,lns->mnsr", gam, gam))
    return CurvatureSample(point=point, christoffel=gam, riemann=riem)


def lowered_riemann(provider, sample):
    """R_{mu nu sigma rho} = g_{mu lam} R^lam_{nu sigma rho}."""
    g = metric_at(provider, sample.point)
    return np.einsum("ml,lnsr->mnsr", g, sample.riemann)


def riemann_symmetry_residuals(lowered):
    """Max residuals of the algebraic Riemann symmetries of a lowered tensor."""
    r = lowered
    return {
        "antisym_first_pair": float(np.max(np.abs(r + np.swapaxes(r, 0, 1)))),
        "antisym_second_pair": float(np.max(np.abs(r + np.swapaxes(r, 2, 3)))),
        "pair_exchange": float(np.max(np.abs(r - np.transpose(r, (2, 3, 0, 1))))),
        "first_bianchi": float(np.max(np.abs(
            r + np.transpose(r, (0, 2, 3, 1)) + np.transpose(r, (0, 3, 1, 2))))),
    }


# --------------------------------------------------------------------------- built-ins

def minkowski(dim=4):
    eta = np.diag([-1.0] + [1.0] * (dim - 1))
    return MetricProvider(dim, lambda x: eta, name="minkowski-cartesian", constant=True,
                          coordinates=("t", "x", "y", "z")[:dim] if dim <= 4 else None)


def minkowski_cylindrical():
    """(t, r, theta, z) chart; the domain is r >= 0, the axis r = 0 is degenerate."""

    def metric(x):
        return np.diag([-1.0, 1.0, x[1] ** 2, 1.0])

    def dmetric(x):
        d = np.zeros((4, 4, 4))
        d[1, 2, 2] = 2.0 * x[1]
        return d

    return MetricProvider(4, metric, dmetric, domain=lambda x: x[1] >= 0.0,
                          name="minkowski-cylindrical", flat=True,
                          coordinates=("t", "r", "theta", "z"))


def from_expressions(coordinates, components, name="custom", domain=None, analytic_derivative=True):
    """Metric from a table of closed-form component expressions.

    ``components`` maps ``"mu,nu"`` (or ``(mu, nu)``) to an expression string in
    the coordinate names; missing components are zero and the table is
    symmetrised (an entry for ``(mu, nu)`` also fills ``(nu, mu)``).
    ``domain``, if given, is an expression that must evaluate truthy (e.g.
    ``"th > 0"``).
    """
    import sympy

    syms = sympy.symbols(list(coordinates), real=True)
    n = len(syms)
    local = dict(zip(coordinates, syms))
    mat = [[sympy.Integer(0)] * n for _ in range(n)]
    for key, expr in components.items():
        mu, nu = (int(s) for s in key.split(",")) if isinstance(key, str) else key
        val = sympy.sympify(expr, locals=local)
        mat[mu][nu] = val
        mat[nu][mu] = val
    gmat = sympy.Matrix(mat)
    g_fn = sympy.lambdify(syms, gmat, "numpy")
    metric = lambda x: np.array(g_fn(*x), dtype=float)
    dmetric = None
    if analytic_derivative:
        d_fn = sympy.lambdify(syms, [gmat.diff(s) for s in syms], "numpy")
        dmetric = lambda x: np.array(d_fn(*x), dtype=float)
    dom = None
    if domain is not None:
        d_expr = sympy.sympify(domain, locals=local)
        d_fn2 = sympy.lambdify(syms, d_expr, "numpy")
        dom = lambda x: bool(d_fn2(*x))
    constant = all(sympy.sympify(e).free_symbols == set() for row in mat for e in row)
    return MetricProvider(n, metric, dmetric, domain=dom, name=name, constant=constant,
                          coordinates=coordinates)


BUILTIN = {
    "minkowski-cartesian": minkowski,
    "minkowski-cylindrical": minkowski_cylindrical,
}


def provider_by_name(name):
    """Resolve ``minkowski-cartesian``, ``minkowski-cylindrical`` or ``custom:<file>``."""
    if name in BUILTIN:
        return BUILTIN[name]()
    if name.startswith("custom:"):
        import json
        with open(name[len("custom:"):], encoding="utf-8") as fh:
            spec = json.load(fh)
        return from_expressions(spec["coordinates"], spec["components"],
                                name=spec.get("name", name), domain=spec.get("domain"),
                                analytic_derivative=spec.get("analytic_derivative", True))
    raise KeyError(f"unknown metric provider {name!r}")
