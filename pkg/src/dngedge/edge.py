"""Edge worldsheet as the composition xi = chi(u), x = X(xi).

The adapted normal frame is m^I = {eta, n^i} with index 0 reserved for the
within-sheet unit normal eta. Gauss-Weingarten data of the composed embedding:
L_AB^I = -g(m^I, D_A f_B) and sigma_A^{IJ} = g(m^J, D_A m^I).

eta is oriented *outward*, away from the bulk. With the curvature sign above
this is the orientation for which the edge equation mu_b k = -mu holds with
positive tension and mass (an endpoint is pulled towards the string).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _numdiff
from .errors import ConsistencyError, DegeneracyError, DomainError, OrientationError, SignatureError
from .worldsheet import COMPLEX_STEP, Domain, jet_at

ORIENTATION_STEP = 1e-4

TOLERANCES = {
    "metric_two_routes": 1e-11,
    "frame_orthonormality": 1e-12,
    "L_inherited": 1e-10,
    "L0_intrinsic": 1e-10,
    "sigma_inherited": 1e-10,
    "sigma_i0": 1e-10,
    "sigma_antisymmetry": 1e-10,
    "v_normalisation": 1e-12,
    "eta_v_orthogonality": 1e-12,
}


class EdgeEmbedding:
    """Map u^A -> xi^a of the edge into the bulk parameter space."""

    def __init__(self, dim, bulk_dim, domain, name="edge"):
        self.dim = int(dim)
        self.bulk_dim = int(bulk_dim)
        self.domain = domain
        self.name = name
        self.axis = None
        self.value = None

    def chart(self, u):
        """``(xi, eps[a, A], deps[a, A, B])``."""
        raise NotImplementedError

    def parameter_of(self, xi):
        """Edge parameter attached to a nearby bulk point (coordinate edges only)."""
        raise NotImplementedError(f"{type(self).__name__} has no bulk extension")


class CoordinateEdge(EdgeEmbedding):
    """Edge on the coordinate hypersurface xi^axis = value; u are the other coordinates."""

    def __init__(self, bulk_dim, axis, value, domain, name="coordinate-edge"):
        super().__init__(bulk_dim - 1, bulk_dim, domain, name)
        self.axis = int(axis)
        self.value = float(value)
        self._others = [a for a in range(bulk_dim) if a != self.axis]

    def chart(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        xi = np.empty(self.bulk_dim)
        xi[self._others] = u
        xi[self.axis] = self.value
        eps = np.zeros((self.bulk_dim, self.dim))
        for A, a in enumerate(self._others):
            eps[a, A] = 1.0
        return xi, eps, np.zeros((self.bulk_dim, self.dim, self.dim))

    def parameter_of(self, xi):
        return np.asarray(xi, dtype=float)[self._others]


class CurveEdge(EdgeEmbedding):
    """One-dimensional edge u -> xi(u) in a two-dimensional bulk parameter space."""

    def __init__(self, curve, domain, name="curve-edge"):
        super().__init__(1, 2, domain, name)
        self._curve = curve

    def chart(self, u):
        u = float(np.atleast_1d(u)[0])
        xi, dxi, ddxi = self._curve(u)
        return (np.asarray(xi, dtype=float), np.asarray(dxi, dtype=float).reshape(2, 1),
                np.asarray(ddxi, dtype=float).reshape(2, 1, 1))


@dataclass(frozen=True)
class ComposedEdge:
    u: np.ndarray
    xi: np.ndarray
    eps: np.ndarray          # [a, A]
    deps: np.ndarray         # [a, A, B]
    bulk: object             # WorldsheetJet at xi
    f: np.ndarray            # [mu, A]
    Df: np.ndarray           # [mu, A, B] covariant D_A f_B
    h: np.ndarray
    h_alt: np.ndarray        # gamma_ab eps eps route
    h_inv: np.ndarray
    christoffel: np.ndarray  # [C, A, B]


@dataclass(frozen=True)
class EdgeJet:
    composed: ComposedEdge
    eta_a: np.ndarray        # [a]
    eta: np.ndarray          # [mu]
    deta_a: np.ndarray       # [A, a]
    m: np.ndarray            # [I, mu], m[0] = eta
    L: np.ndarray            # [I, A, B]
    sigma: np.ndarray        # [A, I, J]
    checks: dict = field(default_factory=dict)
    v_a: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    lapse: Optional[float] = None

    # convenience views ------------------------------------------------------
    @property
    def bulk(self):
        return self.composed.bulk

    @property
    def h(self):
        return self.composed.h

    @property
    def h_inv(self):
        return self.composed.h_inv

    @property
    def k_AB(self):
        return self.L[0]

    @property
    def K_AB(self):
        return self.L[1:]

    @property
    def K_A(self):
        """K_A^i = sigma_A^{i0}, shape ``[A, i]``."""
        return self.sigma[:, 1:, 0]

    @property
    def k(self):
        return float(np.einsum("AB,AB->", self.h_inv, self.L[0]))

    @property
    def hK(self):
        return np.einsum("AB,iAB->i", self.h_inv, self.L[1:])


def compose(edge, bulk, metric, u, check_domain=True):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if check_domain and not edge.domain.contains(u, tol=1e-12):
        raise DomainError(f"edge parameter {u.tolist()} outside the domain of {edge.name}")
    xi, eps, deps = edge.chart(u)
    if check_domain:
        if not bulk.domain.contains(xi, tol=1e-10):
            raise DomainError(f"edge point {xi.tolist()} leaves the bulk domain")
        if bulk.domain.boundary_distance(xi) > 1e-10:
            raise DomainError(f"edge point {xi.tolist()} is not on the bulk boundary")
    jet = jet_at(bulk, metric, xi, check_domain=False)
    f = jet.e @ eps
    Df = np.einsum("mab,aA,bB->mAB", jet.De, eps, eps) + np.einsum("ma,aAB->mAB", jet.e, deps)
    h = f.T @ jet.g @ f
    h_alt = eps.T @ jet.gamma @ eps
    if abs(np.linalg.det(h)) <= 1e-12:
        raise DegeneracyError(f"edge metric degenerate (null edge) at u={u.tolist()}")
    if int(np.sum(np.linalg.eigvalsh(h) < 0.0)) != 1:
        raise SignatureError(f"edge worldsheet not timelike at u={u.tolist()}")
    h_inv = np.linalg.inv(h)
    chris = np.einsum("CD,mD,mn,nAB->CAB", h_inv, f, jet.g, Df)
    return ComposedEdge(u=u, xi=xi, eps=eps, deps=deps, bulk=jet, f=f, Df=Df, h=h,
                        h_alt=h_alt, h_inv=h_inv, christoffel=chris)


def _in_sheet_normal(eps, gamma, pick=None):
    """Unit gamma-normal to span(eps) inside the sheet; complex-step safe."""
    D = gamma.shape[0]
    hm = eps.T @ gamma @ eps
    best = None
    for c in (range(D) if pick is None else [pick]):
        w = np.zeros(D, dtype=gamma.dtype)
        w[c] = 1.0
        v = w - eps @ np.linalg.solve(hm, eps.T @ (gamma @ w))
        n2 = v @ gamma @ v
        if best is None or np.real(n2) > np.real(best[1]):
            best = (v, n2, c)
    v, n2, c = best
    return v / np.sqrt(n2), c


def adapted_frame(composed, bulk_domain):
    """eta (outward), its u-derivative, and the adapted frame m^I."""
    jet = composed.bulk
    eps, gamma = composed.eps, jet.gamma
    eta_a, pick = _in_sheet_normal(eps, gamma)
    delta = ORIENTATION_STEP * bulk_domain.diameter
    lo, hi = np.asarray(bulk_domain.lows[:-1]), np.asarray(bulk_domain.highs[:-1])

    def inside(p):  # along-edge coordinates clamped so corners do not confuse the test
        p = p.copy()
        p[:-1] = np.clip(p[:-1], lo, hi)
        return bulk_domain.contains(p)

    fwd = inside(composed.xi + delta * eta_a)
    bwd = inside(composed.xi - delta * eta_a)
    if fwd == bwd:
        raise OrientationError(f"cannot orient the edge normal at xi={composed.xi.tolist()}")
    sign = -1.0 if fwd else 1.0
    eta_a = sign * eta_a
    # u-derivative of eta^a through eps(u) and gamma(xi(u))
    dgamma = (np.einsum("mca,mn,nb->cab", jet.De, jet.g, jet.e)
              + np.einsum("ma,mn,ncb->cab", jet.e, jet.g, jet.De))
    A = eps.shape[1]
    deta = np.empty((A, eps.shape[0]))
    for B in range(A):
        de = composed.deps[:, :, B]
        dgm = np.einsum("cab,c->ab", dgamma, eps[:, B])
        ce, _ = _in_sheet_normal(eps + 1j * COMPLEX_STEP * de, gamma + 1j * COMPLEX_STEP * dgm, pick)
        deta[B] = sign * np.imag(ce) / COMPLEX_STEP
    eta = jet.e @ eta_a
    m = np.vstack([eta[None, :], jet.normals])
    g = jet.g
    for I in range(m.shape[0]):  # Gram-Schmidt polish
        for J in range(I):
            m[I] = m[I] - m[J] * (m[J] @ g @ m[I])
        m[I] = m[I] / np.sqrt(m[I] @ g @ m[I])
    return eta_a, deta, m


def edge_extrinsic(composed, eta_a, deta, m, raise_on_failure=True):
    jet = composed.bulk
    g = jet.g
    eps = composed.eps
    L = -np.einsum("Im,mn,nAB->IAB", m, g, composed.Df)
    L = 0.5 * (L + np.swapaxes(L, 1, 2))
    # covariant derivatives of the frame along the edge
    D_eta = (np.einsum("mca,cA,a->Am", jet.De, eps, eta_a) + np.einsum("ma,Aa->Am", jet.e, deta))
    D_n = np.einsum("aim,aA->Aim", jet.Dnormals, eps)
    Dm = np.concatenate([D_eta[:, None, :], D_n], axis=1)  # [A, I, mu]
    sigma_raw = np.einsum("AIm,mn,Jn->AIJ", Dm, g, m)
    sigma = 0.5 * (sigma_raw - np.swapaxes(sigma_raw, 1, 2))

    checks = {}
    checks["metric_two_routes"] = float(np.max(np.abs(composed.h - composed.h_alt)))
    checks["frame_orthonormality"] = float(np.max(np.abs(m @ g @ m.T - np.eye(m.shape[0]))))
    checks["L_inherited"] = float(np.max(np.abs(
        L[1:] - np.einsum("iab,aA,bB->iAB", jet.K, eps, eps))))
    eta_low = jet.gamma @ eta_a
    L0_in = -np.einsum("c,cab,aA,bB->AB", eta_low, jet.christoffel, eps, eps) \
        - np.einsum("c,cAB->AB", eta_low, composed.deps)
    checks["L0_intrinsic"] = float(np.max(np.abs(L[0] - L0_in)))
    checks["sigma_inherited"] = float(np.max(np.abs(
        sigma[:, 1:, 1:] - np.einsum("aA,aij->Aij", eps, jet.omega))))
    checks["sigma_i0"] = float(np.max(np.abs(
        sigma[:, 1:, 0] - np.einsum("a,bA,iab->Ai", eta_a, eps, jet.K))))
    checks["sigma_antisymmetry"] = float(np.max(np.abs(sigma_raw + np.swapaxes(sigma_raw, 1, 2))))

    v_a = v = lapse = None
    if eps.shape[1] == 1:
        lapse = float(np.sqrt(-composed.h[0, 0]))
        v_a = eps[:, 0] / lapse
        v = jet.e @ v_a
        checks["v_normalisation"] = float(abs(v @ g @ v + 1.0))
        checks["eta_v_orthogonality"] = float(abs(m[0] @ g @ v))
    if raise_on_failure:
        bad = {k: r for k, r in checks.items() if r > TOLERANCES[k]}
        if bad:
            worst = max(bad, key=lambda k: bad[k] / TOLERANCES[k])
            raise ConsistencyError(f"edge identity {worst} violated: {bad[worst]:.3e}", worst=worst)
    return EdgeJet(composed=composed, eta_a=eta_a, eta=m[0].copy(), deta_a=deta, m=m, L=L,
                   sigma=sigma, checks=checks, v_a=v_a, v=v, lapse=lapse)


def edge_jet_at(edge, bulk, metric, u, check_domain=True, raise_on_failure=True):
    """compose + adapted_frame + edge_extrinsic in one call."""
    comp = compose(edge, bulk, metric, u, check_domain=check_domain)
    eta_a, deta, m = adapted_frame(comp, bulk.domain)
    return edge_extrinsic(comp, eta_a, deta, m, raise_on_failure=raise_on_failure)


@dataclass(frozen=True)
class BoundaryProjections:
    K_par_par: np.ndarray
    K_perp_par: np.ndarray
    K_perp_perp: np.ndarray
    omega_perp: np.ndarray       # eta^a omega_a^{ij}
    omega_tan: np.ndarray        # v^a omega_a^{ij}
    offdiag_residual: float      # |K_ab + K_perp_par (eta_a v_b + eta_b v_a)|
    mass_form: np.ndarray        # K_ab^i K^ab_j at the boundary


def boundary_projections(ej):
    """Scalar projections of the bulk extrinsic curvature on a one-dimensional edge."""
    if ej.v_a is None:
        raise ValueError("boundary projections need a one-dimensional edge")
    jet = ej.bulk
    K = jet.K
    v, eta = ej.v_a, ej.eta_a
    Kpp = np.einsum("iab,a,b->i", K, v, v)
    Kep = np.einsum("iab,a,b->i", K, eta, v)
    Kee = np.einsum("iab,a,b->i", K, eta, eta)
    vl, el = jet.gamma @ v, jet.gamma @ eta
    recon = K + np.einsum("i,ab->iab", Kep, np.outer(el, vl) + np.outer(vl, el))
    Kup = np.einsum("ac,bd,jcd->jab", jet.gamma_inv, jet.gamma_inv, K)
    mass = np.einsum("iab,jab->ij", K, Kup)
    return BoundaryProjections(
        K_par_par=Kpp, K_perp_par=Kep, K_perp_perp=Kee,
        omega_perp=np.einsum("a,aij->ij", eta, jet.omega),
        omega_tan=np.einsum("a,aij->ij", v, jet.omega),
        offdiag_residual=float(np.max(np.abs(recon))), mass_form=mass)


EDGE_DERIVATIVE_STEP = 1e-3


def edge_derivatives(edge, bulk, metric, u, step=EDGE_DERIVATIVE_STEP):
    """u-derivatives of sigma_A^{IJ} and L_AB^I: ``sigma[B, A, I, J]``, ``L[B, I, A, C]``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))

    def pack(w):
        ej = edge_jet_at(edge, bulk, metric, w, check_domain=False, raise_on_failure=False)
        return np.concatenate([ej.sigma.ravel(), ej.L.ravel()])

    base = edge_jet_at(edge, bulk, metric, u, check_domain=False, raise_on_failure=False)
    scale = max(1.0, float(np.max(np.abs(u))))
    grad = _numdiff.gradient(pack, u, h=step * scale)
    n = base.sigma.size
    A = u.size
    return {"sigma": grad[:, :n].reshape((A,) + base.sigma.shape),
            "L": grad[:, n:].reshape((A,) + base.L.shape)}
