"""Command-line entry point: report, verify, modes, spectrum and sweep.

Exit status 0 on success, 1 when a physics precondition fails (null edge,
off-shell background, singular regime), 2 on a configuration error.
"""
import argparse
import json
import os
import sys
import warnings

import jsonschema
import numpy as np

from . import fdcheck, families, io
from .edge import edge_jet_at
from .eom import background_residuals
from .errors import GeometryError, InputError, PhysicsError
from .helicoid import (NullEdgeWarning, background_solve, bulk_spectrum, closed_form_curvatures,
                       endpoint_modes, spectrum_record)
from .spacetime import minkowski
from .worldsheet import jet_at

COMMANDS = ("report", "verify", "modes", "spectrum", "sweep")
EXIT_OK, EXIT_PHYSICS, EXIT_CONFIG = 0, 1, 2
RESIDUAL_TOL = 1e-9

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "family": {"enum": sorted(families.FAMILIES)},
        "params": {"type": "object", "additionalProperties": _num},
        "mu": _pos, "mass": _pos, "mu_b": _pos, "radius": _pos, "omega0": _pos,
        "grid": {"type": "string", "pattern": r"^[0-9]+(x[0-9]+)*$"},
        "suite": {"anyOf": [{"enum": ["default", "plane"]}, {"type": "object"}]},
        "seed": {"type": "integer", "minimum": 0},
        "jobs": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "tol": _pos,
        "u": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
        "n_modes": {"type": "integer", "minimum": 1},
        "channel": {"enum": [1, 2]},
    },
    "required": ["command"],
}
DEFAULTS = {"family": "helicoid", "mu": 1.0, "radius": 1.0, "grid": "20x20", "suite": "default",
            "seed": 0, "jobs": 1, "n_modes": 5}


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


def parser():
    p = argparse.ArgumentParser(prog="dngedge", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--family", choices=sorted(families.FAMILIES))
    p.add_argument("--mu", type=float, help="bulk tension")
    p.add_argument("--mass", type=float, help="endpoint mass (edge tension)")
    p.add_argument("--radius", type=float, help="endpoint radius R")
    p.add_argument("--omega0", type=float, help="angular velocity")
    p.add_argument("--grid", help="grid spec, e.g. 20x20 (report) or 19 (sweep)")
    p.add_argument("--suite", choices=("default", "plane"))
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory; stdout when omitted")
    p.add_argument("--tol", type=float, help="tolerance override")
    return p


def load_config(args):
    """Merge file and flags, validate, and fill defaults."""
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for key in ("family", "mu", "mass", "radius", "omega0", "grid", "suite", "seed", "jobs", "out", "tol"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "config"
        raise ConfigError(f"{where}: {err.message}") from None
    if "mu_b" in cfg:
        if "mass" in cfg and cfg["mass"] != cfg["mu_b"]:
            raise ConfigError("mass and mu_b disagree")
        cfg["mass"] = cfg.pop("mu_b")
    return dict(DEFAULTS, **cfg)


def parse_grid(spec, dims):
    counts = [int(c) for c in spec.split("x")]
    if len(counts) != dims or min(counts) < 1:
        raise ConfigError(f"grid {spec!r} needs {dims} positive counts")
    return counts


def _emit(cfg, name, text):
    if cfg.get("out"):
        io._atomic_write(os.path.join(cfg["out"], name), text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- commands

def _family_params(cfg):
    params = dict(cfg.get("params", {}))
    fam = cfg["family"]
    if fam == "helicoid":
        if "omega0" in cfg:
            params.setdefault("omega0", cfg["omega0"])
        params.setdefault("R", cfg["radius"])
    elif fam == "cylinder" and "radius" in cfg:
        params.setdefault("a", cfg["radius"])
    return params


def _edges(bulk, fam):
    if fam == "helicoid" and not bulk.Rdot:
        return [bulk.edge(+1), bulk.edge(-1)]
    return [bulk.edge()]


def cmd_report(cfg):
    fam = cfg["family"]
    try:
        bulk, _ = families.build(fam, **_family_params(cfg))
    except (KeyError, TypeError) as err:
        raise ConfigError(str(err)) from None
    metric = minkowski(bulk.ambient_dim)
    pts = bulk.domain.grid(parse_grid(cfg["grid"], bulk.dim))
    edges = _edges(bulk, fam)
    tol = cfg.get("tol", RESIDUAL_TOL)
    mu = cfg["mu"]
    mass = cfg["mass"] if "mass" in cfg else mu * fdcheck._on_shell_mass(fam, bulk.params)
    tgrid = np.linspace(edges[0].domain.lows[0], edges[0].domain.highs[0], parse_grid(cfg["grid"], bulk.dim)[0])
    res = background_residuals(bulk, edges, metric, mu, mass, pts, [tgrid] * len(edges))

    D, codim = bulk.dim, bulk.ambient_dim - bulk.dim
    cols = [f"xi{a}" for a in range(D)] + [f"X{m}" for m in range(bulk.ambient_dim)]
    cols += [f"K{i + 1}_{a}{b}" for i in range(codim) for a in range(D) for b in range(a, D)]
    cols += [f"omega_{a}_{i + 1}{j + 1}" for a in range(D) for i in range(codim) for j in range(i + 1, codim)]
    cols += [f"residual_K{i + 1}" for i in range(codim)]
    rows = []
    for p, mean in zip(pts, res.bulk):
        jet = jet_at(bulk, metric, p)
        row = list(p) + list(jet.x)
        row += [jet.K[i, a, b] for i in range(codim) for a in range(D) for b in range(a, D)]
        row += [jet.omega[a, i, j] for a in range(D) for i in range(codim) for j in range(i + 1, codim)]
        row += list(mean)
        rows.append([float(v) for v in row])
    maxima = res.maxima
    ok = maxima["bulk"] <= tol and maxima["edge"] <= tol and maxima["boundary"] <= tol
    meta = {"family": fam, "params": json.dumps(bulk.params, sort_keys=True), "mu": io.format_float(mu),
            "mass": io.format_float(mass), "max_residuals": json.dumps(maxima, sort_keys=True),
            "on_shell": str(ok)}
    summary = {"family": fam, "params": bulk.params, "mu": mu, "mass": mass, "grid": cfg["grid"],
               "points": len(pts), "max_residuals": maxima, "tol": tol, "on_shell": ok,
               "edge_residuals": [{"edge": w[0], "t": w[1], "mu_b_k_plus_mu": float(e), "hK": list(b)}
                                  for w, e, b in zip(res.edge_points, res.edge, res.boundary)]}
    if fam == "helicoid" and not (bulk.alpha or bulk.Rdot):
        ej = edge_jet_at(edges[0], bulk, metric, [0.0])
        u = (bulk.R * bulk.omega0) ** 2
        summary["edge_curvature"] = {"k": float(ej.k), "k_closed_form": -bulk.R * bulk.omega0 ** 2 / (1 - u)}
    csv = io.csv_text(cols, rows, meta)
    if cfg.get("out"):
        io.write_csv(os.path.join(cfg["out"], "report.csv"), cols, rows, meta)
        io.write_json(os.path.join(cfg["out"], "report.json"), summary)
    else:
        sys.stdout.write(csv)
    if not ok:
        raise PhysicsError(f"background off shell: max residuals {maxima} exceed {tol:g}")
    return summary


def cmd_verify(cfg):
    suite = cfg["suite"]
    config = dict(fdcheck.PLANE_SUITE if suite == "plane" else fdcheck.DEFAULT_SUITE) \
        if isinstance(suite, str) else dict(fdcheck.DEFAULT_SUITE, **suite)
    config["seed"] = cfg["seed"]
    if "tol" in cfg:
        config["tol"] = cfg["tol"]
    try:
        reports = fdcheck.run_suite(config, jobs=cfg["jobs"])
    except (TypeError, KeyError) as err:
        raise ConfigError(f"suite: {err}") from None
    summary = fdcheck.summarize(reports)
    lines = "".join(r.to_json() + "\n" for r in reports)
    if cfg.get("out"):
        io._atomic_write(os.path.join(cfg["out"], "verify.jsonl"), lines)
        io.write_json(os.path.join(cfg["out"], "verify_summary.json"), summary)
    else:
        sys.stdout.write(lines)
    sys.stderr.write(f"{summary['passed']}/{summary['cases']} cases passed "
                     f"({100 * summary['pass_fraction']:.1f}%)\n")
    return summary


def _background(cfg):
    if "mass" not in cfg:
        raise ConfigError("--mass is required")
    return background_solve(cfg["mu"], cfg["mass"], cfg["radius"])


def cmd_modes(cfg):
    rec = spectrum_record(_background(cfg), cfg["n_modes"])
    _emit(cfg, "modes.json", io.dumps(rec))
    return rec


def cmd_spectrum(cfg):
    bg = _background(cfg)
    channels = [cfg["channel"]] if "channel" in cfg else [1, 2]
    rec = {"u": bg.u, "mu": bg.mu, "M": bg.mass, "R": bg.R, "omega0": bg.omega0,
           "boundary_condition": "dirichlet",
           "channels": {f"Phi{ch}": bulk_spectrum(bg, ch, cfg["n_modes"]) for ch in channels}}
    _emit(cfg, "spectrum.json", io.dumps(rec))
    return rec


def cmd_sweep(cfg):
    """Endpoint spectrum over u at fixed mu and R; the mass follows from the balance."""
    if "u" in cfg:
        us = np.asarray(cfg["u"], dtype=float)
    else:
        n = parse_grid(cfg["grid"], 1)[0] if "x" not in cfg["grid"] else 19
        us = np.arange(1, n + 1) / (n + 1)
    mu, R = cfg["mu"], cfg["radius"]
    cols = ["u", "omega0", "mass", "k", "Kperp", "discriminant"] + \
        [f"root{j}_{p}" for j in range(4) for p in ("re", "im")] + ["all_complex"]
    rows = []
    for u in us:
        w = np.sqrt(u) / R
        mass = mu * (1.0 - u) / (R * w * w)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NullEdgeWarning)
            bg = background_solve(mu, mass, R)
        spec = endpoint_modes(bg)
        c = closed_form_curvatures(bg)
        row = [float(u), bg.omega0, float(mass), c["k"], c["K_perp_par"], float(spec.discriminant)]
        row += [float(v) for r in spec.roots for v in (r.real, r.imag)]
        rows.append(row + [int(spec.complex_verdict)])
    meta = {"mu": io.format_float(mu), "R": io.format_float(R)}
    _emit(cfg, "sweep.csv", io.csv_text(cols, rows, meta))
    return {"rows": len(rows), "all_complex": all(r[-1] for r in rows)}


DISPATCH = {"report": cmd_report, "verify": cmd_verify, "modes": cmd_modes, "spectrum": cmd_spectrum,
            "sweep": cmd_sweep}


def run(argv=None):
    """Parse, validate and dispatch; returns the exit status."""
    try:
        args = parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("error", NullEdgeWarning)
            DISPATCH[cfg["command"]](cfg)
    except (ConfigError, InputError) as err:
        sys.stderr.write(f"error: {type(err).__name__}: {err}\n")
        return EXIT_CONFIG
    except NullEdgeWarning as err:
        sys.stderr.write(f"error: PhysicsError: null edge: {err}\n")
        return EXIT_PHYSICS
    except GeometryError as err:
        sys.stderr.write(f"error: {type(err).__name__}: {err}\n")
        return EXIT_PHYSICS
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
