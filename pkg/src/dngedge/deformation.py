"""Response of edge geometry to a normal deformation psi*eta + phi^i n_i.

Hatted responses are covariant under rotations of the bulk normals. The
edge-tangential derivatives are assembled from the decomposition

    hatD_A phi^i = D~_A phi^i - K_A^i psi,    hatD_A psi = D_A psi + K_A^i phi_i,

with K_A^i = sigma_A^{i0} and D~ the twist-covariant derivative along the edge.
Normal-frame indices are raised and lowered with delta_ij.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .edge import edge_derivatives, edge_jet_at
from .errors import InputError
from .fields import Constant
from .spacetime import lowered_riemann, riemann_at
from .worldsheet import worldsheet_riemann


@dataclass
class DeformationField:
    """Edge-normal scalar ``psi`` and bulk-normal components ``phi`` as fields of xi.

    ``phi`` doubles as the bulk deformation Phi^i; ``phi_tangential`` is carried
    for bookkeeping only and never enters a normal response.
    """

    psi: object
    phi: list
    phi_tangential: Optional[list] = None
    name: str = "field"

    def __add__(self, other):
        return DeformationField(self.psi + other.psi, [a + b for a, b in zip(self.phi, other.phi)],
                                name=f"{self.name}+{other.name}")

    def __rmul__(self, c):
        return DeformationField(c * self.psi, [c * p for p in self.phi], name=f"{c:g}*{self.name}")

    @classmethod
    def null(cls, codim=2, dim=2):
        return cls(Constant(0.0, dim), [Constant(0.0, dim) for _ in range(codim)], name="null")


@dataclass
class EdgeContext:
    """Edge jet plus the derivative data the identities need."""

    ej: object
    dsigma: np.ndarray            # [A, B, I, J] = d_A sigma_B^{IJ}
    DtK: np.ndarray               # [A, B, i] = D~_A K_B^i
    riemann: Optional[np.ndarray] = None   # lowered ambient Riemann at the edge point

    @property
    def f(self):
        return self.ej.composed.f


def edge_context(edge, bulk, metric, u, with_riemann=False):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    ej = edge_jet_at(edge, bulk, metric, u)
    dsig = edge_derivatives(edge, bulk, metric, u)["sigma"]
    KA = ej.K_A
    chris = ej.composed.christoffel
    sig = ej.sigma[:, 1:, 1:]
    DtK = (dsig[:, :, 1:, 0] - np.einsum("CAB,Ci->ABi", chris, KA)
           - np.einsum("Aij,Bj->ABi", sig, KA))
    R = None
    if with_riemann:
        R = lowered_riemann(metric, riemann_at(metric, ej.bulk.x))
    return EdgeContext(ej=ej, dsigma=dsig, DtK=DtK, riemann=R)


@dataclass
class EdgeFieldData:
    """Deformation data on one edge point (edge indices in the edge parameter)."""

    psi: float
    Dpsi: np.ndarray         # [A]
    DDpsi: np.ndarray        # [A, B]
    phi: np.ndarray          # [i]
    Dphi: np.ndarray         # [A, i]    twist-covariant
    DDphi: np.ndarray        # [A, B, i]
    eta_grad_phi: np.ndarray  # [i]  eta^a nabla~_a Phi^i

    def __add__(self, other):
        return EdgeFieldData(*[getattr(self, k) + getattr(other, k) for k in _DATA_KEYS])

    def __rmul__(self, c):
        return EdgeFieldData(*[c * getattr(self, k) for k in _DATA_KEYS])


_DATA_KEYS = ("psi", "Dpsi", "DDpsi", "phi", "Dphi", "DDphi", "eta_grad_phi")


def edge_field_data(field, ctx):
    """Evaluate ``field`` and its edge derivatives at the context point."""
    if isinstance(field, EdgeFieldData):
        return field
    ej = ctx.ej
    comp, jet = ej.composed, ej.bulk
    codim = jet.normals.shape[0]
    if len(field.phi) != codim:
        raise InputError(f"field has {len(field.phi)} normal components, sheet has {codim}")
    eps, deps, chris = comp.eps, comp.deps, comp.christoffel

    def edge_jet(sf):
        v, g, H = sf.jet(comp.xi)
        d1 = g @ eps
        d2 = eps.T @ H @ eps + np.einsum("a,aAB->AB", g, deps)
        return v, d1, d2, g

    p, dp, ddp, _ = edge_jet(field.psi)
    DDpsi = ddp - np.einsum("CAB,C->AB", chris, dp)
    parts = [edge_jet(f) for f in field.phi]
    phi = np.array([q[0] for q in parts])
    dphi = np.stack([q[1] for q in parts], axis=-1)            # [A, i]
    ddphi = np.stack([q[2] for q in parts], axis=-1)           # [A, B, i]
    grad = np.stack([q[3] for q in parts], axis=-1)            # [a, i]
    sig = ej.sigma[:, 1:, 1:]
    dsig = ctx.dsigma[:, :, 1:, 1:]
    Dphi = dphi - np.einsum("Aij,j->Ai", sig, phi)
    dDphi = (ddphi - np.einsum("ABij,j->ABi", dsig, phi) - np.einsum("Bij,Aj->ABi", sig, dphi))
    DDphi = dDphi - np.einsum("CAB,Ci->ABi", chris, Dphi) - np.einsum("Aij,Bj->ABi", sig, Dphi)
    nabla = grad - np.einsum("aij,j->ai", jet.omega, phi)
    return EdgeFieldData(psi=float(p), Dpsi=dp, DDpsi=DDpsi, phi=phi, Dphi=Dphi, DDphi=DDphi,
                         eta_grad_phi=ej.eta_a @ nabla)


def proper_time_data(ctx, psi, phi, eta_grad_phi=None):
    """Field data on a one-dimensional edge from proper-time jets.

    ``psi = (psi, dpsi/dtau, d2psi/dtau2)``; ``phi`` is a list of the same triples
    for the twist-covariant derivatives of each phi^i.
    """
    lapse = ctx.ej.lapse
    if lapse is None:
        raise InputError("proper-time data needs a one-dimensional edge")
    ph = np.asarray(phi, dtype=float).reshape(-1, 3)
    n = ph.shape[0]
    egp = np.zeros(n) if eta_grad_phi is None else np.asarray(eta_grad_phi, dtype=float)
    return EdgeFieldData(psi=float(psi[0]), Dpsi=np.array([lapse * psi[1]]),
                         DDpsi=np.array([[lapse ** 2 * psi[2]]]), phi=ph[:, 0].copy(),
                         Dphi=lapse * ph[None, :, 1], DDphi=lapse ** 2 * ph[None, None, :, 2],
                         eta_grad_phi=egp)


# --------------------------------------------------------------------------- helpers

def _riemann_terms(ctx, a, b):
    """R_{mu nu sigma rho} f^mu_A a^nu f^sigma_B b^rho for frame vectors a, b (rows)."""
    if ctx.riemann is None:
        raise InputError("curved variant needs an EdgeContext built with_riemann=True")
    f = ctx.f
    return np.einsum("mnsr,mA,In,sB,Jr->IJAB", ctx.riemann, f, a, f, b)


def _pieces(ctx):
    ej = ctx.ej
    return ej.h_inv, ej.k_AB, ej.K_AB, ej.K_A


# --------------------------------------------------------------------------- identities

def deform_edge_metric(ctx, field):
    d = edge_field_data(field, ctx)
    ej = ctx.ej
    return 2.0 * np.einsum("iAB,i->AB", ej.K_AB, d.phi) + 2.0 * ej.k_AB * d.psi


def deform_k_AB(ctx, field, curved=False):
    """Hatted response of k_AB."""
    d = edge_field_data(field, ctx)
    hinv, k, K, KA = _pieces(ctx)
    kk = k @ hinv @ k
    KAKB = KA @ KA.T
    sym = np.einsum("Ai,Bi->AB", KA, d.Dphi)
    sym = sym + sym.T
    out = (-d.DDpsi + (KAKB + kk) * d.psi - sym - np.einsum("ABi,i->AB", ctx.DtK, d.phi)
           + np.einsum("AC,CD,iDB,i->AB", k, hinv, K, d.phi))
    if curved:
        m = ctx.ej.m
        R = _riemann_terms(ctx, m[:1], m)
        out = out - R[0, 0] * d.psi - np.einsum("iAB,i->AB", R[0, 1:], d.phi)
    return out


def deform_k_trace(ctx, field, curved=False):
    """Hatted response of k = h^{AB} k_AB."""
    d = edge_field_data(field, ctx)
    hinv, k, K, KA = _pieces(ctx)
    kup = hinv @ k @ hinv
    out = (-np.einsum("AB,AB->", hinv, d.DDpsi)
           + (np.einsum("AB,Ai,Bi->", hinv, KA, KA) - np.einsum("AB,AB->", k, kup)) * d.psi
           - 2.0 * np.einsum("AB,Ai,Bi->", hinv, KA, d.Dphi)
           - np.einsum("AB,ABi,i->", hinv, ctx.DtK, d.phi)
           - np.einsum("AB,iAB,i->", kup, K, d.phi))
    if curved:
        m = ctx.ej.m
        R = np.einsum("AB,IJAB->IJ", hinv, _riemann_terms(ctx, m[:1], m))
        out = out - R[0, 0] * d.psi - R[0, 1:] @ d.phi
    return float(out)


def deform_K_AB(ctx, field, curved=False):
    """Hatted response of K_AB^i, shape ``[i, A, B]``."""
    d = edge_field_data(field, ctx)
    hinv, k, K, KA = _pieces(ctx)
    KK = np.einsum("iAC,CD,jDB->ijAB", K, hinv, K) + np.einsum("Ai,Bj->ijAB", KA, KA)
    sym = np.einsum("Ai,B->iAB", KA, d.Dpsi)
    out = (-np.transpose(d.DDphi, (2, 0, 1)) + np.einsum("ijAB,j->iAB", KK, d.phi)
           + np.einsum("iAC,CD,DB->iAB", K, hinv, k) * d.psi
           + np.transpose(ctx.DtK, (2, 0, 1)) * d.psi + sym + np.swapaxes(sym, 1, 2))
    if curved:
        m = ctx.ej.m
        R = _riemann_terms(ctx, m[1:], m)
        out = out - np.einsum("ijAB,j->iAB", R[:, 1:], d.phi) - R[:, 0] * d.psi
    return out


def deform_K_trace(ctx, field, curved=False, flip_divergence_sign=False):
    """Hatted response of h^{AB} K_AB^i.

    The (D~_A K^{Ai}) psi term carries a plus sign, which is what the trace of
    :func:`deform_K_AB` gives. ``flip_divergence_sign=True`` flips it, for comparison only.
    """
    d = edge_field_data(field, ctx)
    hinv, k, K, KA = _pieces(ctx)
    Kup = np.einsum("AC,BD,iCD->iAB", hinv, hinv, K)
    mass = np.einsum("iAB,jAB->ij", K, Kup) - np.einsum("AB,Ai,Bj->ij", hinv, KA, KA)
    s = -1.0 if flip_divergence_sign else 1.0
    out = (-np.einsum("AB,ABi->i", hinv, d.DDphi) - mass @ d.phi
           - np.einsum("iAB,AB->i", K, hinv @ k @ hinv) * d.psi
           + s * np.einsum("AB,ABi->i", hinv, ctx.DtK) * d.psi
           + 2.0 * np.einsum("AB,Ai,B->i", hinv, KA, d.Dpsi))
    if curved:
        m = ctx.ej.m
        R = np.einsum("AB,IJAB->IJ", hinv, _riemann_terms(ctx, m[1:], m))
        out = out - R[:, 1:] @ d.phi - R[:, 0] * d.psi
    return out


@dataclass
class DeformationConnection:
    gamma_0i: np.ndarray     # [i]
    gamma_ij: np.ndarray     # [i, j]
    plain_k_AB: np.ndarray
    plain_k: float
    plain_K_AB: np.ndarray
    plain_hK: np.ndarray


def deformation_connection(ctx, field, gamma_ij=None, curved=False):
    """Connection coefficients and the plain (un-hatted) responses they imply.

    ``gamma_ij`` is the frame-rotation part of the bulk deformation; it is a
    choice of normal gauge and defaults to zero.
    """
    d = edge_field_data(field, ctx)
    ej = ctx.ej
    jet = ej.bulk
    codim = jet.normals.shape[0]
    K_ee = np.einsum("iab,a,b->i", jet.K, ej.eta_a, ej.eta_a)
    g0i = -K_ee * d.psi + d.eta_grad_phi
    gij = np.zeros((codim, codim)) if gamma_ij is None else np.asarray(gamma_ij, dtype=float)
    gij = gij + d.psi * np.einsum("a,aij->ij", ej.eta_a, jet.omega)
    K, k = ej.K_AB, ej.k_AB
    return DeformationConnection(
        gamma_0i=g0i, gamma_ij=gij,
        plain_k_AB=deform_k_AB(ctx, d, curved) + np.einsum("i,iAB->AB", g0i, K),
        plain_k=deform_k_trace(ctx, d, curved) + float(g0i @ ej.hK),
        plain_K_AB=(deform_K_AB(ctx, d, curved) + np.einsum("ij,jAB->iAB", gij, K)
                    - np.einsum("i,AB->iAB", g0i, k)),
        plain_hK=deform_K_trace(ctx, d, curved) + gij @ ej.hK - g0i * ej.k)


def hypersurface_k_AB(ctx, field, ws_riemann):
    """Normal deformation of k_AB for the edge seen as a hypersurface of the sheet.

    ``ws_riemann`` is the lowered intrinsic Riemann tensor of the sheet at the edge point.
    """
    d = edge_field_data(field, ctx)
    ej = ctx.ej
    eps, eta = ej.composed.eps, ej.eta_a
    k = ej.k_AB
    proj = np.einsum("acbd,aA,bB,c,d->AB", ws_riemann, eps, eps, eta, eta)
    return -d.DDpsi + (k @ ej.h_inv @ k - proj) * d.psi


def hypersurface_check(edge, bulk, metric, u, field):
    """Plain response of k_AB against the hypersurface formula; returns both."""
    ctx = edge_context(edge, bulk, metric, u)
    R = worldsheet_riemann(bulk, metric, ctx.ej.composed.xi)
    return deformation_connection(ctx, field).plain_k_AB, hypersurface_k_AB(ctx, field, R)


@dataclass
class DeformationResponse:
    delta_h: np.ndarray
    delta_k_AB: np.ndarray
    delta_k: float
    delta_K_AB: np.ndarray
    delta_hK: np.ndarray
    connection: DeformationConnection


def deformation_response(ctx, field, gamma_ij=None, curved=False):
    d = edge_field_data(field, ctx)
    return DeformationResponse(
        delta_h=deform_edge_metric(ctx, d), delta_k_AB=deform_k_AB(ctx, d, curved),
        delta_k=deform_k_trace(ctx, d, curved), delta_K_AB=deform_K_AB(ctx, d, curved),
        delta_hK=deform_K_trace(ctx, d, curved),
        connection=deformation_connection(ctx, d, gamma_ij, curved))
