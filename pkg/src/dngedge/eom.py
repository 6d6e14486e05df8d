"""Background equations of motion and their linearisations.

Background: K^i = 0 in the bulk, mu_b k = -mu and h^{AB} K_AB^i = 0 on the edge.
Linearised: the Jacobi operator in the bulk and the two coupled boundary
operators, whose negatives are the hatted responses of k and h^{AB} K_AB^i.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C

from .deformation import EdgeFieldData, edge_context, edge_field_data, proper_time_data
from .edge import boundary_projections, edge_jet_at
from .errors import InputError
from .spacetime import lowered_riemann, riemann_at
from .worldsheet import jet_at, jet_derivatives


# --------------------------------------------------------------------------- background

@dataclass
class BackgroundResiduals:
    bulk: np.ndarray          # [point, i]  K^i
    edge: np.ndarray          # [point]     mu_b k + mu
    boundary: np.ndarray      # [point, i]  h^{AB} K_AB^i
    unified: np.ndarray       # [point, I]  mu_b L^I + mu delta^{I0}
    bulk_points: np.ndarray
    edge_points: list = field(default_factory=list)

    @property
    def maxima(self):
        m = lambda a: float(np.max(np.abs(a))) if np.size(a) else 0.0
        return {"bulk": m(self.bulk), "edge": m(self.edge), "boundary": m(self.boundary),
                "unified": m(self.unified)}

    def split_residual(self, mass):
        """Defect of the algebraic split of the unified residual."""
        if not np.size(self.unified):
            return 0.0
        d0 = np.abs(self.unified[:, 0] - self.edge)
        di = np.abs(self.unified[:, 1:] - mass * self.boundary)
        return float(max(d0.max(), di.max()))


def background_residuals(bulk, edges, metric, mu, mass, bulk_points, edge_params):
    """Evaluate the background residuals.

    ``edges`` is a list of edge embeddings and ``edge_params`` a matching list of
    parameter arrays.
    """
    pts = np.atleast_2d(np.asarray(bulk_points, dtype=float))
    Kb = np.array([jet_at(bulk, metric, p).mean for p in pts])
    e_res, b_res, uni, where = [], [], [], []
    for edge, us in zip(edges, edge_params):
        for u in np.atleast_1d(us):
            ej = edge_jet_at(edge, bulk, metric, [u])
            e_res.append(mass * ej.k + mu)
            b_res.append(ej.hK)
            tr = np.einsum("AB,IAB->I", ej.h_inv, ej.L)
            uni.append(mass * tr + mu * np.eye(tr.size)[0])
            where.append((edge.name, float(u)))
    return BackgroundResiduals(bulk=Kb, edge=np.array(e_res), boundary=np.array(b_res),
                               unified=np.array(uni), bulk_points=pts, edge_points=where)


# --------------------------------------------------------------------------- bulk

def _field_jets(fields, xi):
    js = [f.jet(xi) for f in fields]
    return (np.array([j[0] for j in js]), np.stack([j[1] for j in js], axis=-1),
            np.stack([j[2] for j in js], axis=-1))


def _jacobi(jet, domega, val, grad, hess, riemann=None):
    """Twist-covariant d'Alembertian plus mass term for jets val[i], grad[a, i], hess[a, b, i]."""
    om = jet.omega
    nab = grad - np.einsum("bij,j->bi", om, val)                        # nabla~_b Phi^i
    d_nab = hess - np.einsum("abij,j->abi", domega, val) - np.einsum("bij,aj->abi", om, grad)
    hess_t = (d_nab - np.einsum("cab,ci->abi", jet.christoffel, nab)
              - np.einsum("aij,bj->abi", om, nab))
    box = np.einsum("ab,abi->i", jet.gamma_inv, hess_t)
    Kup = np.einsum("ac,bd,jcd->jab", jet.gamma_inv, jet.gamma_inv, jet.K)
    mass = np.einsum("iab,jab->ij", jet.K, Kup)
    if riemann is not None:
        e, n = jet.e, jet.normals
        mass = mass - np.einsum("mnsr,ma,in,sb,jr,ab->ij", riemann, e, n, e, n, jet.gamma_inv)
    return box + mass @ val


def bulk_jacobi_apply(bulk, metric, xi, phi_fields, curved=False):
    """Delta~ Phi^i + K_ab^i K^ab_j Phi^j (minus the ambient curvature projection if curved)."""
    xi = np.asarray(xi, dtype=float)
    if len(phi_fields) == 0:
        raise InputError("no normal components supplied")
    jet = jet_at(bulk, metric, xi, check_domain=False)
    dom = jet_derivatives(bulk, metric, xi)["omega"]
    R = lowered_riemann(metric, riemann_at(metric, jet.x)) if curved else None
    return _jacobi(jet, dom, *_field_jets(phi_fields, xi), riemann=R)


def jacobi_coefficients(bulk, metric, xi, curved=False):
    """Coefficients of the Jacobi operator: ``second[a, b]``, ``first[a, i, j]``, ``mass[i, j]``.

    Obtained by applying the operator to unit jets, so the returned numbers are
    exactly what :func:`bulk_jacobi_apply` uses.
    """
    xi = np.asarray(xi, dtype=float)
    jet = jet_at(bulk, metric, xi, check_domain=False)
    dom = jet_derivatives(bulk, metric, xi)["omega"]
    R = lowered_riemann(metric, riemann_at(metric, jet.x)) if curved else None
    n, D = jet.normals.shape[0], xi.size
    zv, zg, zh = np.zeros(n), np.zeros((D, n)), np.zeros((D, D, n))
    mass = np.empty((n, n))
    first = np.empty((D, n, n))
    for j in range(n):
        v = zv.copy()
        v[j] = 1.0
        mass[:, j] = _jacobi(jet, dom, v, zg, zh, R)
        for a in range(D):
            g = zg.copy()
            g[a, j] = 1.0
            first[a, :, j] = _jacobi(jet, dom, zv, g, zh, R)
    return {"second": jet.gamma_inv, "first": first, "mass": mass}


# --------------------------------------------------------------------------- boundary

@dataclass
class BoundaryOperators:
    motion2: float
    motion3: np.ndarray
    motion3_connection: np.ndarray   # k * eta.nabla~ phi^i

    @property
    def motion3_total(self):
        return self.motion3 + self.motion3_connection


def boundary_linear_apply(ctx, field, curved=False):
    """Both boundary operators at one edge point.

    ``motion3_connection`` is the term k (eta.nabla~)phi^i that the on-shell
    linearisation of h^{AB} K_AB^i = 0 adds through the deformation connection.
    """
    d = edge_field_data(field, ctx)
    ej = ctx.ej
    hinv, k, K, KA = ej.h_inv, ej.k_AB, ej.K_AB, ej.K_A
    kup = hinv @ k @ hinv
    Kup = np.einsum("AC,BD,iCD->iAB", hinv, hinv, K)
    m2 = (np.einsum("AB,AB->", hinv, d.DDpsi) + np.einsum("AB,ABi,i->", hinv, ctx.DtK, d.phi)
          + np.einsum("AB,Bi,Ai->", hinv, KA, d.Dphi)
          + np.einsum("AB,Ai,Bi->", hinv, KA, d.Dphi) - np.einsum("AB,Ai,Bi->", hinv, KA, KA) * d.psi
          + np.einsum("AB,AB->", kup, k) * d.psi + np.einsum("AB,iAB,i->", kup, K, d.phi))
    m3 = (np.einsum("AB,ABi->i", hinv, d.DDphi) - np.einsum("AB,ABi->i", hinv, ctx.DtK) * d.psi
          - np.einsum("AB,Bi,A->i", hinv, KA, d.Dpsi)
          - np.einsum("AB,Ai,B->i", hinv, KA, d.Dpsi) - np.einsum("AB,Ai,Bj,j->i", hinv, KA, KA, d.phi)
          + np.einsum("iAB,jAB,j->i", K, Kup, d.phi) + np.einsum("iAB,AB->i", K, kup) * d.psi)
    if curved:
        if ctx.riemann is None:
            raise InputError("curved variant needs an EdgeContext built with_riemann=True")
        f, m = ej.composed.f, ej.m
        R = np.einsum("mnsr,mA,In,sB,Jr,AB->IJ", ctx.riemann, f, m, f, m, hinv)
        m2 = m2 + R[0, 0] * d.psi + R[0, 1:] @ d.phi
        m3 = m3 + R[1:, 1:] @ d.phi + R[1:, 0] * d.psi
    return BoundaryOperators(motion2=float(m2), motion3=m3, motion3_connection=ej.k * d.eta_grad_phi)


# --------------------------------------------------------------------------- endpoint ODEs

@dataclass
class EndpointSystem:
    """Boundary operators on a one-dimensional edge as  A2 y'' + A1 y' + A0 y + B g.

    y = (psi, phi^1, ..., phi^n) in proper time with twist-covariant derivatives
    for phi, and g = eta.nabla~ phi the bulk normal gradient. Row 0 is motion2,
    rows 1.. are motion3 (including the connection term).
    """

    K_perp_par: np.ndarray
    dK_perp_par: np.ndarray      # twist-covariant proper-time derivative
    k: float
    omega_par: np.ndarray        # v^a omega_a^{ij}
    omega_perp: np.ndarray       # eta^a omega_a^{ij}
    mass: float
    mu: float
    A2: np.ndarray
    A1: np.ndarray
    A0: np.ndarray
    bulk_coupling: np.ndarray
    K_par_par: np.ndarray = None
    K_perp_perp: np.ndarray = None

    @property
    def overall_sign(self):
        """Sign of the psi'' coefficient relative to the harmonic form with unit psi'' coefficient."""
        return float(np.sign(self.A2[0, 0]))

    def harmonic_matrix(self, omega):
        """Coefficient matrix for y = y0 exp(-i omega tau)."""
        return -omega ** 2 * self.A2 - 1j * omega * self.A1 + self.A0

    def ode_form(self):
        """Normalised so the second-derivative block is the identity."""
        inv = np.linalg.inv(self.A2)
        return inv @ self.A1, inv @ self.A0, inv @ self.bulk_coupling


def endpoint_system(edge, bulk, metric, u, mu=1.0, mass=1.0, ctx=None):
    ctx = ctx or edge_context(edge, bulk, metric, u)
    ej = ctx.ej
    if ej.lapse is None:
        raise InputError("endpoint system needs a one-dimensional edge")
    n = ej.bulk.normals.shape[0]
    size = n + 1

    def apply(y, dy, ddy, g):
        data = proper_time_data(ctx, (y[0], dy[0], ddy[0]), np.stack([y[1:], dy[1:], ddy[1:]], axis=1), g)
        ops = boundary_linear_apply(ctx, data)
        return np.concatenate([[ops.motion2], ops.motion3_total])

    z, zg = np.zeros(size), np.zeros(n)
    A = [np.empty((size, size)) for _ in range(3)]
    for j in range(size):
        unit = z.copy()
        unit[j] = 1.0
        A[0][:, j] = apply(unit, z, z, zg)
        A[1][:, j] = apply(z, unit, z, zg)
        A[2][:, j] = apply(z, z, unit, zg)
    B = np.empty((size, n))
    for j in range(n):
        g = zg.copy()
        g[j] = 1.0
        B[:, j] = apply(z, z, z, g)
    bp = boundary_projections(ej)
    lapse = ej.lapse
    return EndpointSystem(K_perp_par=ej.K_A[0] / lapse, dK_perp_par=ctx.DtK[0, 0] / lapse ** 2,
                          k=ej.k, omega_par=bp.omega_tan, omega_perp=bp.omega_perp, mass=mass, mu=mu,
                          A2=A[2], A1=A[1], A0=A[0], bulk_coupling=B,
                          K_par_par=bp.K_par_par, K_perp_perp=bp.K_perp_perp)


# --------------------------------------------------------------------------- pure modes

def _probe(ctx, comp, n, order):
    """Boundary operators applied to a unit jet of one variable (0 = psi, i = phi^i)."""
    jet = np.zeros(3)
    jet[order] = 1.0
    phi = np.zeros((3, n))
    psi = np.zeros(3)
    if comp == 0:
        psi = jet
    else:
        phi[:, comp - 1] = jet
    data = EdgeFieldData(psi=psi[0], Dpsi=psi[1:2].copy(), DDpsi=psi[2:3].reshape(1, 1).copy(),
                         phi=phi[0].copy(), Dphi=phi[1][None, :].copy(), DDphi=phi[2][None, None, :].copy(),
                         eta_grad_phi=np.zeros(n))
    ops = boundary_linear_apply(ctx, data)
    return np.concatenate([[ops.motion2], ops.motion3])


@dataclass
class ObstructionReport:
    channel: str
    defect: float
    basis_size: int
    samples: int
    window: tuple
    singular_values: np.ndarray


def pure_mode_obstruction(edge, bulk, metric, window=None, basis=64, samples=160, channel="edge",
                          normals=None):
    """Joint solvability defect of both boundary operators for pure candidates.

    ``channel="edge"``: candidates psi with phi = 0 everywhere. ``channel="bulk"``:
    candidates phi^i (restricted to the indices in ``normals``) with psi = 0 and a
    vanishing normal gradient. Candidates are expanded in ``basis`` Chebyshev
    polynomials of the edge parameter and normalised by their sampled l2 norm;
    the defect is min ||residual|| / ||candidate|| over the sampled points.
    """
    lo, hi = (edge.domain.lows[0], edge.domain.highs[0]) if window is None else window
    x = np.cos(np.pi * (np.arange(samples) + 0.5) / samples)
    us = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    scale = 2.0 / (hi - lo)
    ctxs = [edge_context(edge, bulk, metric, [u]) for u in us]
    n = ctxs[0].ej.bulk.normals.shape[0]
    if channel == "edge":
        comps = [0]
    elif channel == "bulk":
        comps = [1 + i for i in (range(n) if normals is None else normals)]
    else:
        raise InputError(f"unknown channel {channel!r}")
    eye = np.eye(basis)
    V = C.chebvander(x, basis - 1)
    d1 = np.stack([C.chebval(x, C.chebder(eye[j], 1)) for j in range(basis)], axis=1) * scale
    d2 = np.stack([C.chebval(x, C.chebder(eye[j], 2)) for j in range(basis)], axis=1) * scale ** 2
    nv = len(comps)
    rows, norm_rows = [], []
    for s, ctx in enumerate(ctxs):
        Gam = ctx.ej.composed.christoffel[0, 0, 0]
        block = np.zeros((n + 1, nv * basis))
        for c_idx, comp in enumerate(comps):
            # the operators are linear in (value, first, covariant second derivative)
            coef = [_probe(ctx, comp, n, j) for j in range(3)]
            cols = coef[0][:, None] * V[s] + coef[1][:, None] * d1[s] \
                + coef[2][:, None] * (d2[s] - Gam * d1[s])
            block[:, c_idx * basis:(c_idx + 1) * basis] = cols
        rows.append(block)
        norm_rows.append(np.kron(np.eye(nv), V[s:s + 1]))
    Op = np.vstack(rows)
    S = np.vstack(norm_rows)
    _, Rm = np.linalg.qr(S)
    sv = np.linalg.svd(np.linalg.solve(Rm.T, Op.T).T, compute_uv=False)
    return ObstructionReport(channel=channel if normals is None else f"{channel}{list(normals)}",
                             defect=float(sv[-1]), basis_size=basis, samples=samples,
                             window=(float(lo), float(hi)), singular_values=sv)
