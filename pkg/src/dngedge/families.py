"""Built-in worldsheet families with analytic jets, and their edges.

All families live in four-dimensional Minkowski space with Cartesian
coordinates (t, x, y, z) and are parametrised by xi = (t, s).
"""
import numpy as np

from .edge import CoordinateEdge, CurveEdge
from .worldsheet import Domain, Embedding


def _vec(*c):
    return np.array(c, dtype=float)


class Plane(Embedding):
    """Static flat sheet X = (t, s, 0, 0) with a straight edge at s = s0."""

    name = "plane"

    def __init__(self, t_range=(-1.0, 1.0), s_range=(0.0, 1.0)):
        super().__init__(2, 4, Domain([t_range[0], s_range[0]], [t_range[1], s_range[1]]),
                         {"t_range": list(t_range), "s_range": list(s_range)})

    def _jet(self, xi):
        t, s = xi
        return _vec(t, s, 0, 0), np.array([[1.0, 0.0], [0.0, 1.0], [0, 0], [0, 0]]), np.zeros((4, 2, 2))

    def seeds(self, xi):
        return _FLAT_SEEDS, np.zeros((2, 2, 4))

    def edge(self):
        return CoordinateEdge(2, 1, self.domain.lows[1], Domain([self.domain.lows[0]], [self.domain.highs[0]]))


_FLAT_SEEDS = np.array([[0, 0, 1.0, 0], [0, 0, 0, 1.0]])


def _boost_y(beta):
    ch, sh = np.cosh(beta), np.sinh(beta)
    B = np.eye(4)
    B[0, 0] = B[2, 2] = ch
    B[0, 2] = B[2, 0] = sh
    return B


def _rotation(i, j, angle):
    R = np.eye(4)
    c, s = np.cos(angle), np.sin(angle)
    R[i, i] = R[j, j] = c
    R[i, j], R[j, i] = -s, s
    return R


class TiltedPlane(Embedding):
    """Boosted and rotated plane; the edge s = 0 moves with velocity ``edge_velocity``."""

    name = "tilted-plane"

    def __init__(self, rapidity=0.3, angle=0.4, tilt=0.2, edge_velocity=0.25,
                 t_range=(-1.0, 1.0), s_range=(0.0, 1.0)):
        super().__init__(2, 4, Domain([t_range[0], s_range[0]], [t_range[1], s_range[1]]),
                         {"rapidity": rapidity, "angle": angle, "tilt": tilt,
                          "edge_velocity": edge_velocity})
        self.L = _rotation(2, 3, tilt) @ _rotation(1, 2, angle) @ _boost_y(rapidity)
        self.v = float(edge_velocity)

    def _jet(self, xi):
        t, s = xi
        base = _vec(t, s + self.v * t, 0, 0)
        e = self.L @ np.array([[1.0, 0.0], [self.v, 1.0], [0, 0], [0, 0]])
        return self.L @ base, e, np.zeros((4, 2, 2))

    def seeds(self, xi):
        return _FLAT_SEEDS @ self.L.T, np.zeros((2, 2, 4))

    def edge(self):
        return CoordinateEdge(2, 1, self.domain.lows[1], Domain([self.domain.lows[0]], [self.domain.highs[0]]))


class Cylinder(Embedding):
    """Static circular cylinder X = (t, a cos s, a sin s, 0); inward radial normal first."""

    name = "cylinder"

    def __init__(self, a=1.0, t_range=(-1.0, 1.0), s_range=(0.0, 1.0)):
        super().__init__(2, 4, Domain([t_range[0], s_range[0]], [t_range[1], s_range[1]]), {"a": a})
        self.a = float(a)

    def _jet(self, xi):
        t, s = xi
        a, c, sn = self.a, np.cos(xi[1]), np.sin(xi[1])
        e = np.array([[1.0, 0.0], [0.0, -a * sn], [0.0, a * c], [0.0, 0.0]])
        dd = np.zeros((4, 2, 2))
        dd[:, 1, 1] = _vec(0, -a * c, -a * sn, 0)
        return _vec(t, a * c, a * sn, 0), e, dd

    def seeds(self, xi):
        c, sn = np.cos(xi[1]), np.sin(xi[1])
        S = np.array([[0, -c, -sn, 0], [0, 0, 0, 1.0]])
        dS = np.zeros((2, 2, 4))
        dS[1, 0] = _vec(0, sn, -c, 0)
        return S, dS

    def edge(self):
        return CoordinateEdge(2, 1, self.domain.lows[1], Domain([self.domain.lows[0]], [self.domain.highs[0]]))


class Helicoid(Embedding):
    """Rotating straight string X = (t, r cos th, r sin th, 0), th = th0 + w0 t + alpha t^2 / 2.

    The bulk occupies -R <= r <= R(t) with R(t) = R + Rdot t on the upper end.
    The first normal is the azimuthal one,
    n^1 = (r thdot, -sin th, cos th, 0) / sqrt(1 - r^2 thdot^2), the second is z.
    """

    name = "helicoid"

    def __init__(self, omega0=0.5, R=1.0, alpha=0.0, theta0=0.0, Rdot=0.0, T=1.0):
        upper = (lambda t: R + Rdot * t) if Rdot else None
        super().__init__(2, 4, Domain([-T, -R], [T, R + abs(Rdot) * T], upper=upper),
                         {"omega0": omega0, "R": R, "alpha": alpha, "theta0": theta0,
                          "Rdot": Rdot, "T": T})
        self.omega0, self.R, self.alpha = float(omega0), float(R), float(alpha)
        self.theta0, self.Rdot, self.T = float(theta0), float(Rdot), float(T)

    def theta(self, t):
        return self.theta0 + self.omega0 * t + 0.5 * self.alpha * t * t

    def theta_dot(self, t):
        return self.omega0 + self.alpha * t

    def _jet(self, xi):
        t, r = xi
        th, w, acc = self.theta(t), self.theta_dot(t), self.alpha
        c, s = np.cos(th), np.sin(th)
        x = _vec(t, r * c, r * s, 0)
        e = np.array([[1.0, 0.0], [-r * w * s, c], [r * w * c, s], [0.0, 0.0]])
        dd = np.zeros((4, 2, 2))
        dd[:, 0, 0] = _vec(0, -r * w * w * c - r * acc * s, -r * w * w * s + r * acc * c, 0)
        dd[:, 0, 1] = dd[:, 1, 0] = _vec(0, -w * s, w * c, 0)
        return x, e, dd

    def seeds(self, xi):
        th, w = self.theta(xi[0]), self.theta_dot(xi[0])
        c, s = np.cos(th), np.sin(th)
        S = np.array([[0, -s, c, 0], [0, 0, 0, 1.0]])
        dS = np.zeros((2, 2, 4))
        dS[0, 0] = -w * _vec(0, c, s, 0)
        return S, dS

    def edge(self, end=+1):
        tdom = Domain([-self.T], [self.T])
        if self.Rdot:
            R, Rd = self.R, self.Rdot
            return CurveEdge(lambda t: ((t, R + Rd * t), (1.0, Rd), (0.0, 0.0)), tdom, name="helicoid-end")
        value = self.domain.highs[1] if end > 0 else self.domain.lows[1]
        return CoordinateEdge(2, 1, value, tdom, name="helicoid-end")


class Catenoid(Embedding):
    """Rotating catenary meridian X = (t, rho cos(W t), rho sin(W t), s), rho = c cosh(s/c).

    Off-shell test sheet with non-zero K_{ts}, K_{ss} and normal-bundle twist.
    """

    name = "catenoid"

    def __init__(self, c=1.0, Omega=0.3, t_range=(-1.0, 1.0), s_range=(0.2, 1.0)):
        super().__init__(2, 4, Domain([t_range[0], s_range[0]], [t_range[1], s_range[1]]),
                         {"c": c, "Omega": Omega})
        self.c, self.W = float(c), float(Omega)

    def _rho(self, s):
        c = self.c
        return c * np.cosh(s / c), np.sinh(s / c), np.cosh(s / c) / c

    def _jet(self, xi):
        t, s = xi
        rho, r1, r2 = self._rho(s)
        W = self.W
        ph = W * t
        cp, sp = np.cos(ph), np.sin(ph)
        x = _vec(t, rho * cp, rho * sp, s)
        e = np.array([[1.0, 0.0], [-rho * W * sp, r1 * cp], [rho * W * cp, r1 * sp], [0.0, 1.0]])
        dd = np.zeros((4, 2, 2))
        dd[:, 0, 0] = _vec(0, -rho * W * W * cp, -rho * W * W * sp, 0)
        dd[:, 0, 1] = dd[:, 1, 0] = _vec(0, -r1 * W * sp, r1 * W * cp, 0)
        dd[:, 1, 1] = _vec(0, r2 * cp, r2 * sp, 0)
        return x, e, dd

    def seeds(self, xi):
        t, s = xi
        _, r1, r2 = self._rho(s)
        W = self.W
        cp, sp = np.cos(W * t), np.sin(W * t)
        S = np.array([[0, cp, sp, -r1], [0, -sp, cp, 0]])
        dS = np.zeros((2, 2, 4))
        dS[0, 0] = _vec(0, -W * sp, W * cp, 0)
        dS[0, 1] = _vec(0, -W * cp, -W * sp, 0)
        dS[1, 0] = _vec(0, 0, 0, -r2)
        return S, dS

    def edge(self):
        return CoordinateEdge(2, 1, self.domain.lows[1], Domain([self.domain.lows[0]], [self.domain.highs[0]]))


class HyperbolicEnd(Embedding):
    """Flat sheet X = (t, sqrt(rho^2 + t^2) + s, 0, 0), s >= 0.

    The edge s = 0 is a hyperbola of proper acceleration 1/rho pointing into the
    sheet: a straight string of tension mu with an endpoint of mass M = mu rho.
    """

    name = "hyperbolic"

    def __init__(self, rho=1.0, length=1.0, T=1.0):
        super().__init__(2, 4, Domain([-T, 0.0], [T, length]), {"rho": rho, "length": length})
        self.rho = float(rho)

    def _jet(self, xi):
        t, s = xi
        q = np.sqrt(self.rho ** 2 + t * t)
        e = np.array([[1.0, 0.0], [t / q, 1.0], [0, 0], [0, 0]])
        dd = np.zeros((4, 2, 2))
        dd[1, 0, 0] = self.rho ** 2 / q ** 3
        return _vec(t, q + s, 0, 0), e, dd

    def seeds(self, xi):
        return _FLAT_SEEDS, np.zeros((2, 2, 4))

    def edge(self):
        return CoordinateEdge(2, 1, 0.0, Domain([self.domain.lows[0]], [self.domain.highs[0]]))


FAMILIES = {
    "plane": Plane,
    "tilted-plane": TiltedPlane,
    "cylinder": Cylinder,
    "helicoid": Helicoid,
    "catenoid": Catenoid,
    "hyperbolic": HyperbolicEnd,
}


def build(name, **params):
    """Instantiate a family by name; returns ``(bulk, edge)``."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise KeyError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    bulk = cls(**params)
    return bulk, bulk.edge()
