"""Deterministic serialization: CSV outputs, JSON sidecars, parameter digests.

CSV numeric format is 17 significant digits so doubles round-trip losslessly,
and all writes are atomic (temp file + rename) so concurrent figure runs
never expose partial files. Timestamps live only in JSON sidecars; CSV bytes
are a pure function of the input data.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__ as _code_version


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def params_digest(params: dict) -> str:
    """sha256 of the canonical JSON encoding of a parameter dict."""
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"), allow_nan=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    n = len(columns[0])
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_fmt(float(col[i])) for col in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, payload: dict, timestamp: bool = True) -> None:
    doc = dict(payload)
    doc.setdefault("code_version", _code_version)
    if timestamp:
        doc["created_at"] = datetime.now(timezone.utc).isoformat()
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_trajectory(path_base, traj, metadata: dict | None = None) -> None:
    """trajectory CSV (t, re_C, im_C, P) plus JSON sidecar at path_base.{csv,json}."""
    t = traj.times
    write_csv(f"{path_base}.csv", ["t", "re_C", "im_C", "P"],
              [t, traj.c.real, traj.c.imag, traj.p])
    meta = {
        "solver_id": traj.solver_id,
        "params_digest": traj.params_digest,
        "grid": {"t0": traj.t0, "dt": traj.dt, "n": len(traj.p)},
    }
    if metadata:
        meta.update(metadata)
    write_json(f"{path_base}.json", meta)


def write_sweep(path_base, sweep, metadata: dict | None = None) -> None:
    """Long-format sweep CSV (tau_f, kappa, p_max, t_peak, status) + summary JSON."""
    rows = []
    for i, kap in enumerate(sweep.kappa_grid):
        for j, tf in enumerate(sweep.tau_f_grid):
            pm = sweep.p_max[i, j]
            tp = sweep.t_peak[i, j]
            status = sweep.status[i][j].replace(",", ";")
            rows.append((tf, kap, pm, tp, status))
    lines = ["tau_f,kappa,p_max,t_peak,status"]
    for tf, kap, pm, tp, status in rows:
        lines.append(f"{_fmt(tf)},{_fmt(kap)},{_fmt(pm)},{_fmt(tp)},{status}")
    atomic_write_text(f"{path_base}.csv", "\n".join(lines) + "\n")
    tf_star, kap_star, p_star = sweep.argmax
    meta = {
        "argmax": {"tau_f": tf_star, "kappa": kap_star, "p_max": p_star},
        "tau_f_grid": [float(x) for x in sweep.tau_f_grid],
        "kappa_grid": [float(x) for x in sweep.kappa_grid],
    }
    if metadata:
        meta.update(metadata)
    write_json(f"{path_base}.json", meta)


def write_detector_trace(path_base, trace, metadata: dict | None = None) -> None:
    """Detector trace CSV (t, y) + JSON metadata (detector, statistics, n_bar)."""
    write_csv(f"{path_base}.csv", ["t", "y"], [trace.times, trace.y])
    meta = {
        "detector": trace.detector,
        "statistics": trace.statistics,
        "n_bar": trace.n_bar,
    }
    if metadata:
        meta.update(metadata)
    write_json(f"{path_base}.json", meta)
