"""Atomic, deterministic writers for CSV, JSON and JSON-lines outputs."""
import json
import os
import tempfile

import numpy as np

PROVENANCE = {
    "signature": "mostly-plus (-,+,...,+)",
    "extrinsic_curvature": "K^i_ab = -g(n^i, D_a e_b)",
    "riemann": "R^m_nsr = d_s G^m_nr - d_r G^m_ns + ...; unit sphere R_thph_thph = +sin^2",
    "edge_normal": "eta points out of the bulk sheet",
}


def _atomic_write(path, text):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(obj):
    """Convert numpy containers and scalars to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    return obj


def dumps(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path, obj):
    _atomic_write(path, dumps(obj))


def jsonl_lines(records):
    return "".join(json.dumps(_plain(r), sort_keys=True) + "\n" for r in records)


def write_jsonl(path, records):
    _atomic_write(path, jsonl_lines(records))


def format_float(x):
    return "%.17g" % x


def csv_text(columns, rows, meta=None):
    """CSV with a '#' provenance header; floats at 17 significant digits."""
    head = dict(PROVENANCE, **(meta or {}))
    lines = [f"# {k}: {head[k]}" for k in sorted(head)]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows, meta=None):
    _atomic_write(path, csv_text(columns, rows, meta))


def read_csv(path):
    """Inverse of ``write_csv`` for numeric tables: returns (columns, array)."""
    with open(path, encoding="utf-8") as fh:
        body = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    cols = body[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]])
    return cols, data
