"""Brute-force deformation oracle.

The bulk is displaced to X + eps*V with V = Phi^i n_i + c(s) psi eta^a e_a, the
tangential part switched off by a C2 cutoff c away from the edge. All geometry is
rebuilt from scratch for each eps and differentiated by central quotients in eps
with one Richardson step.
"""
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from . import _numdiff, families
from .deformation import (DeformationField, deformation_connection, deformation_response,
                          edge_context, edge_field_data, hypersurface_k_AB)
from .edge import CoordinateEdge, _in_sheet_normal, edge_jet_at
from .eom import boundary_linear_apply, bulk_jacobi_apply
from .errors import ConvergenceError, GeometryError, InputError
from .fields import Constant, TrigField, from_sympy
from .spacetime import minkowski
from .worldsheet import PerturbedEmbedding, jet_at, worldsheet_riemann

DEFAULT_EPS = (1e-2, 5e-3, 2.5e-3)
VECTOR_STEP = 4e-3
CUTOFF_FRACTION = 0.1
ORDER_WINDOW = (1.7, 2.3)
ORDER_LIMITS = (1.0, 3.0)
NOISE_FLOOR = 1e-10

IDENTITIES = ("delh", "delkab", "deltrk", "delKAB", "dtrKAB", "goi", "dbkab-consistency")
LINEARIZATION = ("LI-linearization", "madre-linearization", "motion2-linearization",
                 "motion3-linearization")


def smoothstep_cutoff(d, width):
    """1 for |d| <= width/2, 0 for |d| >= width, quintic (C2) in between."""
    x = np.clip((abs(d) - 0.5 * width) / (0.5 * width), 0.0, 1.0)
    return 1.0 - x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _outward_sign(edge, bulk):
    lo, hi = bulk.domain.lows[edge.axis], bulk.domain.highs[edge.axis]
    return -1.0 if abs(edge.value - lo) <= abs(edge.value - hi) else 1.0


def _frame_rows(bulk, edge, metric, tangential=True, width=None):
    """``G(xi)`` with rows n_1 .. n_k and c(xi) eta^a e_a, so that V = (phi, psi) @ G."""
    if not isinstance(edge, CoordinateEdge) or bulk.dim != 2:
        raise InputError("the oracle supports coordinate-line edges of two-dimensional sheets")
    axis, value = edge.axis, edge.value
    other = 1 - axis
    sign = _outward_sign(edge, bulk)
    width = CUTOFF_FRACTION * bulk.domain.diameter if width is None else width
    line = np.zeros((2, 1))
    line[other, 0] = 1.0

    def G(xi):
        jet = jet_at(bulk, metric, xi, check_domain=False)
        tang = np.zeros(bulk.ambient_dim)
        c = smoothstep_cutoff(xi[axis] - value, width) if tangential else 0.0
        if c:
            eta, _ = _in_sheet_normal(line, jet.gamma)
            eta = eta if np.sign(eta[axis]) == sign else -eta
            tang = c * (jet.e @ eta)
        return np.vstack([jet.normals, tang])

    return G


def _field_values(field):
    return list(field.phi) + [field.psi]


def deformation_vector(bulk, edge, field, metric, tangential=True, width=None):
    """``V(xi)`` for a coordinate-line edge."""
    G = _frame_rows(bulk, edge, metric, tangential, width)
    parts = _field_values(field)
    return lambda xi: np.array([f(xi) for f in parts]) @ G(xi)


def perturb_embedding(bulk, edge, field, eps, metric=None, tangential=True, width=None):
    """``(X + eps V, edge)``; the edge chart is unchanged, its image moves with the sheet.

    The jet of V combines the analytic field jets with a stencil jet of the frame
    rows, so the field itself is never finite-differenced.
    """
    metric = metric or minkowski(bulk.ambient_dim)
    G = _frame_rows(bulk, edge, metric, tangential, width)
    parts = _field_values(field)

    @lru_cache(maxsize=64)
    def vjet(key):
        xi = np.array(key)
        h = VECTOR_STEP * max(1.0, float(np.max(np.abs(xi))))
        g0, g1, g2 = _numdiff.jet2(G, xi, h)            # [r, mu], [r, mu, a], [r, mu, a, b]
        jets = [f.jet(xi) for f in parts]
        f0 = np.array([j[0] for j in jets], dtype=float)
        f1 = np.array([j[1] for j in jets], dtype=float)  # [r, a]
        f2 = np.array([j[2] for j in jets], dtype=float)  # [r, a, b]
        v = f0 @ g0
        dv = np.einsum("ra,rm->ma", f1, g0) + np.einsum("r,rma->ma", f0, g1)
        cross = np.einsum("ra,rmb->mab", f1, g1)
        ddv = (np.einsum("rab,rm->mab", f2, g0) + cross + np.swapaxes(cross, 1, 2)
               + np.einsum("r,rmab->mab", f0, g2))
        return v, dv, ddv

    return PerturbedEmbedding(bulk, lambda xi: vjet(tuple(np.asarray(xi, dtype=float))), eps), edge


# --------------------------------------------------------------------------- quotients

def _align(m, ref, g):
    s = np.sign(np.einsum("Im,mn,In->I", m, g, ref))
    s[s == 0] = 1.0
    return m * s[:, None]


def _edge_quantities(bulk, edge, metric, u, ref_m):
    ej = edge_jet_at(edge, bulk, metric, u, raise_on_failure=False)
    m = _align(ej.m, ref_m, ej.bulk.g)
    return ej, m


def _bulk_K(bulk, metric, xi):
    return jet_at(bulk, metric, xi, check_domain=False).mean


@dataclass
class RawQuotients:
    eps: list
    q: dict                  # name -> list of arrays, one per eps


def _raw(bulk, edge, field, metric, u, eps_list, interior=None, tangential=True, width=None):
    base = edge_jet_at(edge, bulk, metric, u)
    g, m0, L0 = base.bulk.g, base.m, base.L
    hinv = base.h_inv
    V = perturb_embedding(bulk, edge, field, 0.0, metric, tangential, width)[0].vector_jet
    out = {k: [] for k in ("h", "k_AB", "k", "K_AB", "hK", "gamma", "hat_L", "hat_trace", "bulk_K")}
    for eps in eps_list:
        vals = {}
        for s in (1.0, -1.0):
            pb = PerturbedEmbedding(bulk, V, s * eps)
            ej, m = _edge_quantities(pb, edge, metric, u, m0)
            Lf = -np.einsum("Im,mn,nAB->IAB", m, ej.bulk.g, ej.composed.Df)
            Lf = 0.5 * (Lf + np.swapaxes(Lf, 1, 2))
            trace = np.einsum("AB,IAB->I", ej.h_inv, Lf)
            vals[s] = dict(h=ej.h, L=Lf, trace=trace, m=m,
                           bulk_K=_bulk_K(pb, metric, interior) if interior is not None else None)
        p, n = vals[1.0], vals[-1.0]
        d = lambda key: (p[key] - n[key]) / (2 * eps)
        dm = d("m")
        gam = np.einsum("Im,mn,Jn->IJ", dm, g, m0)
        gam = 0.5 * (gam - gam.T)
        dL = d("L")
        dtr = d("trace")
        tr0 = np.einsum("AB,IAB->I", hinv, L0)
        out["h"].append(d("h"))
        out["k_AB"].append(dL[0])
        out["k"].append(np.array([dtr[0]]))
        out["K_AB"].append(dL[1:])
        out["hK"].append(dtr[1:])
        out["gamma"].append(gam)
        out["hat_L"].append(dL - np.einsum("IJ,JAB->IAB", gam, L0))
        out["hat_trace"].append(dtr - gam @ tr0)
        out["bulk_K"].append(d("bulk_K") if interior is not None else np.zeros(0))
    return base, RawQuotients(list(eps_list), out)


# --------------------------------------------------------------------------- reports

@dataclass
class VerificationCase:
    identity: str
    family: str
    params: dict = dc_field(default_factory=dict)
    field: dict = dc_field(default_factory=lambda: {"kind": "deterministic", "index": 0})
    u: float = 0.3
    eps: tuple = DEFAULT_EPS
    tol: float = 1e-4
    mu: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        e = list(self.eps)
        if len(e) < 3 or any(b >= a for a, b in zip(e, e[1:])) or min(e) <= 0:
            raise InputError("eps schedule must be strictly decreasing, positive, at least 3 levels")
        self.eps = tuple(float(x) for x in e)

    @property
    def key(self):
        return f"{self.identity}|{self.family}|{json.dumps(self.params, sort_keys=True)}|" \
               f"{json.dumps(self.field, sort_keys=True)}|{self.u}"


@dataclass
class VerificationReport:
    case: dict
    quotients: list
    extrapolated: list
    analytic: list
    abs_error: float
    rel_error: float
    order: object
    passed: bool
    note: str = ""

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def richardson(quotients, ratio):
    """Richardson table over all levels for an error series in eps^2, eps^4, ..."""
    row = [np.asarray(x, dtype=float) for x in quotients]
    power = 2
    while len(row) > 1:
        f = ratio ** power - 1.0
        row = [b + (b - a) / f for a, b in zip(row, row[1:])]
        power += 2
    return row[0]


def observed_order(quotients, ratio, floor):
    q = [np.asarray(x, dtype=float).ravel() for x in quotients]
    d1 = np.max(np.abs(q[-3] - q[-2])) if q[0].size else 0.0
    d2 = np.max(np.abs(q[-2] - q[-1])) if q[0].size else 0.0
    if d1 <= floor or d2 <= floor:
        return None
    return float(np.log(d1 / d2) / np.log(ratio))


def compare(case, quotients, analytic, note=""):
    ratio = case.eps[0] / case.eps[1]
    analytic = np.asarray(analytic, dtype=float)
    scale = max(1.0, float(np.max(np.abs(quotients[-1])))) if np.size(quotients[-1]) else 1.0
    order = observed_order(quotients, ratio, NOISE_FLOOR * scale)
    ext = richardson(quotients, ratio)
    err = float(np.max(np.abs(ext - analytic))) if analytic.size else 0.0
    amax = float(np.max(np.abs(analytic))) if analytic.size else 0.0
    rel = err / amax if amax > 0 else (0.0 if err == 0 else np.inf)
    accurate = err <= 1e-8 if amax < 1e-6 else rel <= case.tol
    if order is not None and not ORDER_LIMITS[0] <= order <= ORDER_LIMITS[1] and not accurate:
        raise ConvergenceError(f"{case.identity} on {case.family}: order {order:.2f}")
    order_ok = order is None or ORDER_WINDOW[0] <= order <= ORDER_WINDOW[1]
    if order is None:
        note = (note + "; " if note else "") + "quotients agree to the noise floor (order undefined)"
    return VerificationReport(case=asdict(case), quotients=[np.asarray(q).tolist() for q in quotients],
                              extrapolated=np.asarray(ext).tolist(), analytic=analytic.tolist(),
                              abs_error=err, rel_error=float(rel), order=order,
                              passed=bool(accurate and order_ok), note=note)


# --------------------------------------------------------------------------- cases

def deterministic_fields():
    """Three fixed fields in xi = (t, s) for codimension-two sheets."""
    f = lambda e: from_sympy(e, ("t", "s"))
    return [
        DeformationField(f("cos(t)"), [f("0"), f("0")], name="psi=cos t"),
        DeformationField(f("0"), [f("1 + t**2/2"), f("s*t + s**2")], name="phi-only"),
        DeformationField(f("t**2 + s"), [f("sin(t + s)"), f("3/10 + s*cos(t)")], name="mixed"),
    ]


def random_field(seed, dim=2, codim=2, amplitude=1.0):
    rng = np.random.default_rng(seed)
    psi = TrigField.random(rng, dim, amplitude=amplitude)
    return DeformationField(psi, [TrigField.random(rng, dim, amplitude=amplitude) for _ in range(codim)],
                            name=f"random[{seed}]")


def field_from_spec(spec):
    kind = spec.get("kind", "deterministic")
    if kind == "deterministic":
        fld = deterministic_fields()[int(spec.get("index", 0))]
    elif kind == "random":
        fld = random_field(int(spec["seed"]))
    elif kind == "expression":
        vars_ = spec.get("variables", ["t", "s"])
        fld = DeformationField(from_sympy(spec["psi"], vars_),
                               [from_sympy(e, vars_) for e in spec["phi"]], name="expression")
    else:
        raise InputError(f"unknown field kind {kind!r}")
    if spec.get("psi_only"):
        fld = DeformationField(fld.psi, [Constant(0.0) for _ in fld.phi], name=fld.name + "|psi")
    return fld


_RAW_CACHE = {}


def _context(case):
    bulk, edge = families.build(case.family, **case.params)
    metric = minkowski(bulk.ambient_dim)
    fld = field_from_spec(case.field)
    return bulk, edge, metric, fld


def _interior_point(bulk, edge, u):
    xi = np.empty(2)
    xi[1 - edge.axis] = u
    lo, hi = bulk.domain.lows[edge.axis], bulk.domain.highs[edge.axis]
    xi[edge.axis] = lo + 0.6 * (hi - lo)
    return xi


def _raw_for(case, bulk, edge, metric, fld):
    key = (case.family, json.dumps(case.params, sort_keys=True), json.dumps(case.field, sort_keys=True),
           case.u, case.eps)
    if key not in _RAW_CACHE:
        interior = _interior_point(bulk, edge, case.u)
        _RAW_CACHE[key] = _raw(bulk, edge, fld, metric, [case.u], case.eps, interior=interior) + (interior,)
        if len(_RAW_CACHE) > 256:
            _RAW_CACHE.pop(next(iter(_RAW_CACHE)))
    return _RAW_CACHE[key]


def measure_response(case):
    """Oracle report for one case."""
    bulk, edge, metric, fld = _context(case)
    base, raw, interior = _raw_for(case, bulk, edge, metric, fld)
    ctx = edge_context(edge, bulk, metric, [case.u])
    data = edge_field_data(fld, ctx)
    q = raw.q
    ident = case.identity
    if ident == "delh":
        return compare(case, q["h"], deformation_response(ctx, data).delta_h)
    if ident == "delkab":
        return compare(case, [x[0] for x in q["hat_L"]], deformation_response(ctx, data).delta_k_AB)
    if ident == "deltrk":
        return compare(case, [x[:1] for x in q["hat_trace"]], [deformation_response(ctx, data).delta_k])
    if ident == "delKAB":
        return compare(case, [x[1:] for x in q["hat_L"]], deformation_response(ctx, data).delta_K_AB)
    if ident == "dtrKAB":
        return compare(case, [x[1:] for x in q["hat_trace"]], deformation_response(ctx, data).delta_hK)
    if ident == "goi":
        return compare(case, [x[0, 1:] for x in q["gamma"]], deformation_connection(ctx, data).gamma_0i)
    if ident == "dbkab-consistency":
        if np.any(data.phi) or np.any(data.eta_grad_phi):
            raise InputError("dbkab-consistency needs phi = 0 and a vanishing normal gradient")
        R = worldsheet_riemann(bulk, metric, ctx.ej.composed.xi)
        return compare(case, q["k_AB"], hypersurface_k_AB(ctx, data, R),
                       note="plain response against the hypersurface formula")
    if ident in LINEARIZATION:
        return _linearization(case, bulk, metric, fld, ctx, data, q, interior)
    raise InputError(f"unknown identity {ident!r}")


def _linearization(case, bulk, metric, fld, ctx, data, q, interior):
    ident = case.identity
    mu, mb = case.mu, case.mass
    ops = boundary_linear_apply(ctx, data)
    if ident == "madre-linearization":
        return compare(case, q["bulk_K"], -bulk_jacobi_apply(bulk, metric, interior, fld.phi),
                       note="dK^i/deps = -(Jacobi operator) at an interior point")
    if ident == "motion2-linearization":
        return compare(case, [x[:1] for x in q["k"]], [-ops.motion2],
                       note="dk/deps = -motion2 on shell")
    if ident == "motion3-linearization":
        return compare(case, q["hK"], -ops.motion3_total,
                       note="d(hK)/deps = -(motion3 + k eta.grad phi) on shell")
    quot = [np.concatenate([mb * a, mb * b]) for a, b in zip(q["k"], q["hK"])]
    return compare(case, quot, -mb * np.concatenate([[ops.motion2], ops.motion3_total]),
                   note="d(mu_b L^I + mu delta^I0)/deps")


# --------------------------------------------------------------------------- suite

SUITE_FAMILIES = [
    ("plane", {}),
    ("tilted-plane", {}),
    ("cylinder", {}),
    ("helicoid", {"omega0": 0.5, "R": 1.0}),
    ("helicoid", {"omega0": float(np.sqrt(0.5)), "R": 1.0}),
    ("helicoid", {"omega0": 0.9, "R": 1.0}),
    ("catenoid", {}),
]
ON_SHELL = {"plane", "helicoid", "hyperbolic"}

DEFAULT_SUITE = {"families": "default", "deterministic": 3, "random": 5, "seed": 0,
                 "eps": list(DEFAULT_EPS), "tol": 1e-4, "u": 0.3, "linearization": True}
PLANE_SUITE = dict(DEFAULT_SUITE, families=[["plane", {}]])


def suite_cases(config=None):
    cfg = dict(DEFAULT_SUITE, **(config or {}))
    fams = SUITE_FAMILIES if cfg["families"] == "default" else [tuple(f) for f in cfg["families"]]
    specs = [{"kind": "deterministic", "index": i} for i in range(cfg["deterministic"])]
    specs += [{"kind": "random", "seed": int(cfg["seed"]) * 1000 + j} for j in range(cfg["random"])]
    cases = []
    for fam, params in fams:
        for spec in specs:
            for ident in IDENTITIES:
                fs = dict(spec, psi_only=True) if ident == "dbkab-consistency" else spec
                cases.append(VerificationCase(ident, fam, dict(params), fs, cfg["u"], tuple(cfg["eps"]),
                                              cfg["tol"]))
            if cfg["linearization"] and fam in ON_SHELL:
                mass = _on_shell_mass(fam, params)
                for ident in LINEARIZATION:
                    cases.append(VerificationCase(ident, fam, dict(params), spec, cfg["u"],
                                                  tuple(cfg["eps"]), cfg["tol"], 1.0, mass))
    return cases


def _on_shell_mass(fam, params):
    """Endpoint mass for unit tension making the family's edge on shell."""
    if fam == "helicoid":
        w, R = params.get("omega0", 0.5), params.get("R", 1.0)
        return (1.0 - R * R * w * w) / (R * w * w)
    if fam == "hyperbolic":
        return params.get("rho", 1.0)
    return 1.0


def _run_case(case):
    try:
        return measure_response(case)
    except (GeometryError, ConvergenceError) as err:
        return VerificationReport(case=asdict(case), quotients=[], extrapolated=[], analytic=[],
                                  abs_error=float("nan"), rel_error=float("nan"), order=None,
                                  passed=False, note=f"{type(err).__name__}: {err}")


def run_suite(config=None, jobs=1):
    """Run every case; returns a list of reports in case order."""
    cases = suite_cases(config)
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_case, cases, chunksize=8))
    return [_run_case(c) for c in cases]


def summarize(reports):
    n = len(reports)
    failed = [r for r in reports if not r.passed]
    return {"cases": n, "passed": n - len(failed), "pass_fraction": (n - len(failed)) / n if n else 1.0,
            "failures": [{"identity": r.case["identity"], "family": r.case["family"],
                          "params": r.case["params"], "field": r.case["field"], "rel_error": r.rel_error,
                          "order": r.order, "note": r.note} for r in failed],
            "digest": hashlib.sha256("\n".join(r.to_json() for r in reports).encode()).hexdigest()}
