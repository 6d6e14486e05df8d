"""First- and second-order geometry of a timelike worldsheet X^mu(xi^a).

Conventions: extrinsic curvature K^i_{ab} = -g(n^i, D_a e_b), twist potential
omega_a^{ij} = g(n^j, D_a n^i), and the twist-covariant derivative
nabla~_a Phi^i = nabla_a Phi^i - omega_a^{ij} Phi_j.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _numdiff
from .errors import DegeneracyError, DomainError, FrameError, SignatureError
from .spacetime import metric_at, metric_derivative, christoffel_at

SKIP_TOL = 0.05  # relative to the seed's Euclidean length
COMPLEX_STEP = 1e-30


class Domain:
    """Coordinate box, optionally with the last axis bounded by functions of xi[0]."""

    def __init__(self, lows, highs, lower=None, upper=None):
        self.lows = np.asarray(lows, dtype=float)
        self.highs = np.asarray(highs, dtype=float)
        self.lower = lower
        self.upper = upper

    def bounds(self, xi):
        lo = self.lows.copy()
        hi = self.highs.copy()
        if self.lower is not None:
            lo[-1] = self.lower(xi[0])
        if self.upper is not None:
            hi[-1] = self.upper(xi[0])
        return lo, hi

    def contains(self, xi, tol=0.0):
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.bounds(xi)
        return bool(np.all(xi >= lo - tol) and np.all(xi <= hi + tol))

    def boundary_distance(self, xi):
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.bounds(xi)
        return float(np.min(np.minimum(np.abs(xi - lo), np.abs(hi - xi))))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.highs - self.lows))

    def grid(self, counts, margin=0.0):
        """Tensor grid of interior points, ``margin`` as a fraction of each side."""
        axes = []
        for lo, hi, n in zip(self.lows, self.highs, counts):
            pad = margin * (hi - lo)
            axes.append(np.linspace(lo + pad, hi - pad, int(n)))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        return np.array([p for p in pts if self.contains(p)])


class Embedding:
    """Worldsheet embedding. Subclasses implement :meth:`_jet`.

    ``seeds(xi)`` returns the ordered seed vectors for the normal frame together
    with their xi-derivatives (shapes ``(k, N)`` and ``(D, k, N)``); the default is
    the ambient coordinate axes in index order.
    """

    mode = "analytic"
    name = "embedding"

    def __init__(self, dim, ambient_dim, domain, params=None):
        self.dim = int(dim)
        self.ambient_dim = int(ambient_dim)
        self.domain = domain
        self.params = dict(params or {})

    def jet(self, xi):
        """``(x, e, dd)``: position, tangents ``e[mu, a]``, second partials ``dd[mu, a, b]``."""
        x, e, dd = self._jet(np.asarray(xi, dtype=float))
        dd = 0.5 * (dd + np.swapaxes(dd, 1, 2))
        return np.asarray(x, dtype=float), np.asarray(e, dtype=float), dd

    def position(self, xi):
        return self.jet(xi)[0]

    def seeds(self, xi):
        n = self.ambient_dim
        return np.eye(n), np.zeros((self.dim, n, n))

    def _jet(self, xi):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"


class NumericEmbedding(Embedding):
    """User embedding given only by its position map; jets by fourth-order stencils."""

    mode = "numeric"

    def __init__(self, position, dim, ambient_dim, domain, step=2e-3, name="custom", params=None):
        super().__init__(dim, ambient_dim, domain, params)
        self._position = position
        self.step = step
        self.name = name

    def _jet(self, xi):
        scale = max(1.0, float(np.max(np.abs(xi))))
        return _numdiff.jet2(self._position, xi, self.step * scale)


class PerturbedEmbedding(Embedding):
    """``X + eps * V`` where ``vector_jet(xi)`` returns the jet of V (same layout)."""

    def __init__(self, base, vector_jet, eps):
        super().__init__(base.dim, base.ambient_dim, base.domain, dict(base.params, eps=eps))
        self.base = base
        self.vector_jet = vector_jet
        self.eps = float(eps)
        self.mode = base.mode
        self.name = f"{base.name}+eps"

    def _jet(self, xi):
        x, e, dd = self.base.jet(xi)
        if self.eps == 0.0:
            return x, e, dd
        v, dv, ddv = self.vector_jet(xi)
        return x + self.eps * v, e + self.eps * dv, dd + self.eps * ddv

    def seeds(self, xi):
        return self.base.seeds(xi)


# --------------------------------------------------------------------------- frames

def _gram_schmidt(e, g, seeds, count, chosen=None):
    """Orthonormal complement of span(e) from ``seeds``; works on complex input.

    Returns ``(normals, chosen_indices)``. Skipping decisions are taken on the real
    part only so that a complex-step derivative follows the same branch.
    """
    gamma = e.T @ g @ e
    normals = []
    picked = []
    candidates = range(len(seeds)) if chosen is None else chosen
    for idx in candidates:
        v = seeds[idx]
        for _ in range(2):
            v = v - e @ np.linalg.solve(gamma, e.T @ (g @ v))
            for n in normals:
                v = v - n * (n @ g @ v)
        norm2 = v @ g @ v
        size = np.linalg.norm(np.real(seeds[idx]))
        if chosen is None and (np.real(norm2) <= 0.0 or np.sqrt(np.real(norm2)) < SKIP_TOL * size):
            continue
        normals.append(v / np.sqrt(norm2))
        picked.append(idx)
        if len(normals) == count:
            break
    return normals, picked


def normal_frame(e, g, seeds=None):
    """Orthonormal normal frame ``n[i, mu]`` by Gram-Schmidt of ``seeds`` against span(e)."""
    e = np.asarray(e, dtype=float)
    N, D = e.shape
    seeds = np.eye(N) if seeds is None else np.asarray(seeds, dtype=float)
    normals, _ = _gram_schmidt(e, g, seeds, N - D)
    if len(normals) < N - D:
        raise FrameError(f"found {len(normals)} of {N - D} normal directions")
    return np.array(normals)


def normal_frame_with_derivative(e, de, g, dg, seeds, dseeds):
    """Normal frame and its exact derivative along each worldsheet coordinate.

    ``de[c]``, ``dg[c]`` and ``dseeds[c]`` are the xi^c-derivatives of the inputs;
    the frame derivative is obtained by a complex step through the same
    Gram-Schmidt branch.
    """
    N, D = e.shape
    normals, picked = _gram_schmidt(e, g, seeds, N - D)
    if len(normals) < N - D:
        raise FrameError(f"found {len(normals)} of {N - D} normal directions")
    n = np.array(normals)
    dn = np.empty((D,) + n.shape)
    h = COMPLEX_STEP
    for c in range(D):
        cn, _ = _gram_schmidt(e + 1j * h * de[c], g + 1j * h * dg[c],
                              seeds + 1j * h * dseeds[c], N - D, chosen=picked)
        dn[c] = np.imag(np.array(cn)) / h
    return n, dn


# --------------------------------------------------------------------------- jets

@dataclass(frozen=True)
class WorldsheetJet:
    xi: np.ndarray
    x: np.ndarray
    e: np.ndarray            # [mu, a]
    dd: np.ndarray           # [mu, a, b] plain second partials
    De: np.ndarray           # [mu, a, b] covariant D_a e_b
    g: np.ndarray            # ambient metric at x
    dg: np.ndarray           # [c, mu, nu] xi^c-derivative of g along the sheet
    ambient_christoffel: np.ndarray
    gamma: np.ndarray
    gamma_inv: np.ndarray
    christoffel: np.ndarray  # [c, a, b]
    normals: np.ndarray      # [i, mu]
    dnormals: np.ndarray     # [a, i, mu] plain partials of the normals
    Dnormals: np.ndarray     # [a, i, mu] covariant D_a n^i
    K: np.ndarray            # [i, a, b]
    omega: np.ndarray        # [a, i, j]
    mean: np.ndarray         # [i]

    @property
    def codim(self):
        return self.normals.shape[0]

    def lower(self, v):
        return self.g @ v


def _check_worldsheet_metric(gamma, xi):
    det = np.linalg.det(gamma)
    if abs(det) <= 1e-12:
        raise DegeneracyError(f"induced metric degenerate (null worldsheet) at {np.asarray(xi).tolist()}")
    negative = int(np.sum(np.linalg.eigvalsh(gamma) < 0.0))
    if negative != 1:
        raise SignatureError(
            f"induced metric has {negative} negative eigenvalues at {np.asarray(xi).tolist()}")


def jet_at(embedding, metric, xi, check_domain=True):
    """Full worldsheet jet at ``xi``."""
    xi = np.asarray(xi, dtype=float)
    if check_domain and not embedding.domain.contains(xi, tol=1e-12):
        raise DomainError(f"{xi.tolist()} outside the domain of {embedding.name}")
    x, e, dd = embedding.jet(xi)
    g = metric_at(metric, x)
    N, D = e.shape
    if metric.constant:
        chris = np.zeros((N, N, N))
        dg = np.zeros((D, N, N))
    else:
        chris = christoffel_at(metric, x).christoffel
        dg = np.einsum("rmn,ra->amn", metric_derivative(metric, x), e)
    gamma = e.T @ g @ e
    _check_worldsheet_metric(gamma, xi)
    gamma_inv = np.linalg.inv(gamma)
    De = dd + np.einsum("mnr,na,rb->mab", chris, e, e)
    ws_chris = np.einsum("cd,md,mab->cab", gamma_inv, g @ e, De)
    seeds, dseeds = embedding.seeds(xi)
    de = np.transpose(dd, (1, 0, 2))  # de[c][mu, a] = d_c e_a
    n, dn = normal_frame_with_derivative(e, de, g, dg, np.asarray(seeds, dtype=float),
                                         np.asarray(dseeds, dtype=float))
    Dn = dn + np.einsum("mnr,na,ir->aim", chris, e, n)
    K = -np.einsum("im,mn,nab->iab", n, g, De)
    omega = np.einsum("aim,mn,jn->aij", Dn, g, n)
    omega = 0.5 * (omega - np.swapaxes(omega, 1, 2))
    mean = np.einsum("ab,iab->i", gamma_inv, K)
    return WorldsheetJet(xi=xi, x=x, e=e, dd=dd, De=De, g=g, dg=dg, ambient_christoffel=chris,
                         gamma=gamma, gamma_inv=gamma_inv, christoffel=ws_chris, normals=n,
                         dnormals=dn, Dnormals=Dn, K=K, omega=omega, mean=mean)


JET_DERIVATIVE_STEP = 1e-3


def jet_derivatives(embedding, metric, xi, step=JET_DERIVATIVE_STEP):
    """xi-derivatives of the worldsheet Christoffels, K and omega (Richardson central).

    Returns a dict with ``christoffel[d, c, a, b]``, ``K[d, i, a, b]`` and
    ``omega[d, a, i, j]``, the new leading index being the differentiation one.
    """
    xi = np.asarray(xi, dtype=float)

    def pack(y):
        j = jet_at(embedding, metric, y, check_domain=False)
        return np.concatenate([j.christoffel.ravel(), j.K.ravel(), j.omega.ravel()])

    base = jet_at(embedding, metric, xi, check_domain=False)
    scale = max(1.0, float(np.max(np.abs(xi))))
    grad = _numdiff.gradient(pack, xi, h=step * scale)
    D = xi.size
    sizes = [base.christoffel.size, base.K.size, base.omega.size]
    c, k, o = np.split(grad, np.cumsum(sizes)[:-1], axis=1)
    return {
        "christoffel": c.reshape((D,) + base.christoffel.shape),
        "K": k.reshape((D,) + base.K.shape),
        "omega": o.reshape((D,) + base.omega.shape),
    }


def worldsheet_riemann(embedding, metric, xi, step=JET_DERIVATIVE_STEP):
    """Lowered intrinsic Riemann tensor of the induced metric, R_{abcd}."""
    jet = jet_at(embedding, metric, xi, check_domain=False)
    dchris = jet_derivatives(embedding, metric, xi, step)["christoffel"]  # [s, m, n, r]
    G = jet.christoffel
    riem = (np.einsum("smnr->mnsr", dchris) - np.einsum("rmns->mnsr", dchris)
            + np.einsum("msl,lnr->mnsr", G, G) - np.einsum("mrl,lns->mnsr", G, G))
    return np.einsum("ml,lnsr->mnsr", jet.gamma, riem)


def gauss_codazzi_residual(embedding, metric, xi, edge_frame=None, ambient_riemann=None):
    """Integrability defect of the Gauss equation at ``xi``.

    Returns the max-norm of R_{abcd} - (K_ac.K_bd - K_ad.K_bc) [- ambient projection],
    and, if ``edge_frame=(eps, eta)`` is supplied (``eps[a, A]``, ``eta[a]``), also
    the projected combination R_{acbd} eps eps eta eta - K_AB.K_{eta eta} + K_A.K_B.
    """
    jet = jet_at(embedding, metric, xi, check_domain=False)
    R = worldsheet_riemann(embedding, metric, xi)
    K = jet.K
    quad = np.einsum("iac,ibd->abcd", K, K) - np.einsum("iad,ibc->abcd", K, K)
    if ambient_riemann is not None:
        e = jet.e
        quad = quad + np.einsum("mnsr,ma,nb,sc,rd->abcd", ambient_riemann, e, e, e, e)
    out = {"gauss": float(np.max(np.abs(R - quad)))}
    if edge_frame is not None:
        eps, eta = edge_frame
        proj = np.einsum("acbd,aA,bB,c,d->AB", R, eps, eps, eta, eta)
        K_AB = np.einsum("iab,aA,bB->iAB", K, eps, eps)
        K_ee = np.einsum("iab,a,b->i", K, eta, eta)
        K_A = np.einsum("iab,a,bA->iA", K, eta, eps)
        combo = proj - np.einsum("iAB,i->AB", K_AB, K_ee) + np.einsum("iA,iB->AB", K_A, K_A)
        out["edge_projection"] = float(np.max(np.abs(combo)))
    return out
