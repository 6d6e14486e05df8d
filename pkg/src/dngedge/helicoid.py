"""Rigidly rotating straight string with massive endpoints.

Background: theta = omega0 t, endpoints at r = +-R with M R omega0^2 = mu (1 - u),
u = R^2 omega0^2. Conformal coordinate omega0 X = arcsin(omega0 r).
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.optimize import brentq

from .errors import InputError, PhysicsError

U_CUTOFF = 0.98
NULL_WARNING = 0.95


class NullEdgeWarning(UserWarning):
    """The endpoint worldline is close to null."""


@dataclass(frozen=True)
class HelicoidBackground:
    R: float
    omega0: float
    mu: float
    mass: float

    @property
    def u(self):
        return (self.R * self.omega0) ** 2

    @property
    def X_R(self):
        return float(np.arcsin(self.R * self.omega0) / self.omega0)

    @property
    def end_residual(self):
        return self.mass * self.R * self.omega0 ** 2 - self.mu * (1.0 - self.u)

    def curvatures(self):
        return closed_form_curvatures(self)


def background_solve(mu, mass, R):
    """Positive root omega0 of M R w^2 + mu R^2 w^2 - mu = 0."""
    for name, v in (("mu", mu), ("mass", mass), ("R", R)):
        if not np.isfinite(v) or v <= 0:
            raise InputError(f"{name} must be positive, got {v}")
    w2 = mu / (mass * R + mu * R * R)
    bg = HelicoidBackground(R=float(R), omega0=float(np.sqrt(w2)), mu=float(mu), mass=float(mass))
    if bg.u >= NULL_WARNING:
        warnings.warn(f"u = {bg.u:.4f}: endpoint close to null", NullEdgeWarning, stacklevel=2)
    return bg


def closed_form_curvatures(bg, Rdot=0.0):
    """k, K_perp_par, K_par_par, K_perp_perp on the endpoint worldline.

    ``K_perp_par_squared`` is the variant with a squared denominator, reported
    for comparison and never used.
    """
    u, w, R = bg.u, bg.omega0, bg.R
    return {
        "k": -R * w * w / (1.0 - u),
        "K_perp_par": -w / (1.0 - u),
        "K_perp_par_squared": -w / (1.0 - u) ** 2,
        "K_par_par": -2.0 * w * Rdot / ((1.0 - Rdot ** 2 - u) * np.sqrt(1.0 - u)),
        "K_perp_perp": 0.0,
    }


def conformal_X(omega0, r):
    return np.arcsin(omega0 * np.asarray(r)) / omega0


# --------------------------------------------------------------------------- endpoint modes

@dataclass
class ModeSpectrum:
    roots: np.ndarray = None          # four endpoint eigenfrequencies
    x_roots: np.ndarray = None        # roots of the resolvent quadratic in omega^2
    a: float = None                   # k^2
    b: float = None                   # K_perp_par^2
    coefficients: tuple = None        # (1, a - 2b, (a + b) b)
    discriminant: float = None
    complex_verdict: bool = None
    phi2_roots: tuple = (0.0, 0.0)
    bulk: dict = field(default_factory=dict)


def endpoint_modes(bg):
    """Solve w^4 + (a - 2b) w^2 + (a + b) b = 0 through the quadratic in x = w^2."""
    c = closed_form_curvatures(bg)
    a, b = c["k"] ** 2, c["K_perp_par"] ** 2
    p, q = a - 2.0 * b, (a + b) * b
    disc = p * p - 4.0 * q
    sq = np.sqrt(complex(disc))
    x = np.array([(-p + sq) / 2.0, (-p - sq) / 2.0])
    w = np.sqrt(x)
    roots = np.array([w[0], -w[0], w[1], -w[1]])
    verdict = bool(np.all(np.abs(roots.imag) > 1e-8 * np.abs(roots)))
    return ModeSpectrum(roots=roots, x_roots=x, a=a, b=b, coefficients=(1.0, p, q), discriminant=disc,
                        complex_verdict=verdict)


def quartic_residual(spec):
    """Max mismatch between the re-expanded root product and the quartic coefficients."""
    poly = np.poly(spec.roots)
    target = np.array([1.0, 0.0, spec.coefficients[1], 0.0, spec.coefficients[2]])
    return float(np.max(np.abs(poly - target)))


# --------------------------------------------------------------------------- bulk spectrum

def _check_u(bg):
    if bg.u >= U_CUTOFF:
        warnings.warn(f"u = {bg.u:.4f}: potential singular near the null edge", NullEdgeWarning,
                      stacklevel=3)
        raise PhysicsError(f"bulk spectrum refused for u = {bg.u:.4f} >= {U_CUTOFF}")


def potential(bg, X, channel):
    if channel == 2:
        return np.zeros_like(np.asarray(X, dtype=float))
    return 2.0 * bg.omega0 ** 2 / np.cos(bg.omega0 * np.asarray(X)) ** 2


def _shoot(bg, E, channel, dense=False):
    XR = bg.X_R
    rhs = lambda X, y: [y[1], (potential(bg, X, channel) - E) * y[0]]
    sol = solve_ivp(rhs, (-XR, XR), [0.0, 1.0], method="DOP853", rtol=1e-12, atol=1e-14,
                    dense_output=dense)
    return sol


def _miss(bg, E, channel):
    return _shoot(bg, E, channel).y[0, -1]


def shooting_eigenvalues(bg, n, channel=1, rtol=1e-14):
    """Lowest ``n`` Dirichlet eigenvalues Omega^2 by shooting and bracketed root finding (brentq).

    The scan step is a quarter of the smallest free level spacing, which bounds
    the spacing of the perturbed levels from below.
    """
    XR = bg.X_R
    Vmax = float(np.max(potential(bg, np.array([0.0, XR]), channel)))
    Vmin = float(np.min(potential(bg, np.array([0.0, XR]), channel)))
    base = (np.pi / (2 * XR)) ** 2
    Emax = (n + 1) ** 2 * base + Vmax
    grid = np.linspace(Vmin, Emax, int((Emax - Vmin) / (0.75 * base)) + 2)
    vals = [_miss(bg, E, channel) for E in grid]
    out = []
    for E0, E1, m0, m1 in zip(grid, grid[1:], vals, vals[1:]):
        if m0 == 0.0:
            out.append(E0)
        elif m0 * m1 < 0:
            out.append(brentq(lambda E: _miss(bg, E, channel), E0, E1, rtol=rtol, xtol=1e-300))
        if len(out) == n:
            break
    if len(out) < n:
        raise PhysicsError(f"found only {len(out)} of {n} eigenvalues")
    return np.array(out)


def matrix_eigenvalues(bg, n, channel=1, points=4000):
    """Lowest ``n`` eigenvalues of the three-point discretisation on a uniform grid."""
    XR = bg.X_R
    X = np.linspace(-XR, XR, points + 2)[1:-1]
    h = X[1] - X[0]
    d = 2.0 / h ** 2 + potential(bg, X, channel)
    e = -np.ones(points - 1) / h ** 2
    return eigh_tridiagonal(d, e, select="i", select_range=(0, n - 1), eigvals_only=True)


def bulk_spectrum(bg, channel=1, n=5, boundary_condition="dirichlet", points=4000):
    """Dirichlet spectrum of -f'' + V f = Omega^2 f on [-X_R, X_R]."""
    if boundary_condition != "dirichlet":
        raise InputError("only Dirichlet conditions define an eigenproblem here")
    if channel not in (1, 2):
        raise InputError("channel must be 1 or 2")
    _check_u(bg)
    exact = np.arange(1, n + 1) * np.pi / (2 * bg.X_R) if channel == 2 else None
    shoot = shooting_eigenvalues(bg, n, channel)
    mat = matrix_eigenvalues(bg, n, channel, points)
    best = exact ** 2 if channel == 2 else shoot
    return {"channel": channel, "omega2": best, "omega": np.sqrt(best), "omega2_shooting": shoot,
            "omega2_matrix": mat, "omega_exact": exact,
            "rel_agreement": float(np.max(np.abs(shoot - mat) / np.abs(shoot))), "X_R": bg.X_R}


def eigenfunction(bg, E, channel=1, samples=2001):
    """Shooting solution for ``E``, sampled on a uniform grid including the ends."""
    sol = _shoot(bg, E, channel, dense=True)
    X = np.linspace(-bg.X_R, bg.X_R, samples)
    return X, sol.sol(X)[0]


def interior_zeros(values, rel=1e-9):
    v = np.asarray(values)[1:-1]
    v = v[np.abs(v) > rel * np.max(np.abs(v))]
    return int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])))


def forced_response(bg, omega, left=1.0, right=1.0, channel=1, points=2000):
    """Bulk profile driven at frequency ``omega`` by prescribed end amplitudes."""
    _check_u(bg)
    XR = bg.X_R
    X = np.linspace(-XR, XR, points + 2)
    h = X[1] - X[0]
    Xi = X[1:-1]
    diag = 2.0 / h ** 2 + potential(bg, Xi, channel) - omega ** 2
    ab = np.zeros((3, points), dtype=complex)
    ab[0, 1:] = -1.0 / h ** 2
    ab[1] = diag
    ab[2, :-1] = -1.0 / h ** 2
    rhs = np.zeros(points, dtype=complex)
    rhs[0] += left / h ** 2
    rhs[-1] += right / h ** 2
    f = solve_banded((1, 1), ab, rhs)
    return X, np.concatenate([[left], f, [right]])


# --------------------------------------------------------------------------- baseline

def straight_string_modes(mu, mass):
    """Endpoint rates of a straight string with accelerated ends."""
    if mu <= 0 or mass <= 0:
        raise InputError("mu and mass must be positive")
    rate = mu / mass
    return {"psi_rates": (rate, -rate), "phi_rates": (0.0, 0.0), "destabilizing": True}


def spectrum_record(bg, n_bulk=5):
    """JSON-ready summary of the endpoint and bulk spectra."""
    spec = endpoint_modes(bg)
    c = closed_form_curvatures(bg)
    rec = {"u": bg.u, "mu": bg.mu, "M": bg.mass, "R": bg.R, "omega0": bg.omega0,
           "omega0_squared": bg.omega0 ** 2, "k": c["k"], "Kperp": c["K_perp_par"],
           "Kperp_squared_denominator": c["K_perp_par_squared"], "quadratic": list(spec.coefficients),
           "discriminant": spec.discriminant, "all_complex": spec.complex_verdict,
           "roots": [[float(r.real), float(r.imag)] for r in spec.roots],
           "phi2_roots": list(spec.phi2_roots)}
    if bg.u < U_CUTOFF:
        rec["bulk_eigenvalues"] = {f"Phi{ch}": bulk_spectrum(bg, ch, n_bulk)["omega2"].tolist()
                                   for ch in (1, 2)}
    else:
        rec["bulk_eigenvalues"] = None
        rec["caveat"] = "bulk spectrum refused near the null edge"
    return rec
