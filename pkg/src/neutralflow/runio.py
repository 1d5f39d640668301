"""Deterministic file emission: CSV/JSON writers and the run manifest.

Floats go out with 17 significant digits and JSON keys in sorted order, so a
fixed config and tool version reproduce every data file byte for byte.  The
manifest lists each emitted file with its SHA-256 (the manifest itself also
records the wall time, which is the one intentionally non-reproducible field).
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import PsiProfile, twist_shear_rotsym


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_json(path: Path, payload: dict):
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n",
        encoding="utf-8",
    )


def profile_rows(profile: PsiProfile):
    """Rows theta, psi, dpsi, lambda, abs_sigma for one radial profile."""
    theta = profile.theta_grid
    v = profile.values
    h = profile.h
    dpsi = np.empty_like(v)
    dpsi[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    dpsi[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    dpsi[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    rows = []
    for i in range(v.size):
        if theta[i] <= 0.0 or v[i] <= 0.0:
            c = max((16.0 * v[1] - v[2]) / (12.0 * h * h), 0.0)
            lam, sig = 2.0 * math.sqrt(c), 0.0
        else:
            ts = twist_shear_rotsym(float(theta[i]), float(v[i]), float(dpsi[i]))
            lam, sig = ts.lam, abs(ts.sigma)
        rows.append((theta[i], v[i], dpsi[i], lam, sig))
    return rows


def write_profile_csv(path: Path, profile: PsiProfile):
    write_csv(path, ("theta", "psi", "dpsi", "lambda", "abs_sigma"), profile_rows(profile))


def write_monitors_csv(path: Path, records):
    header = ("t", "u_min", "u_max", "sup_sigma", "B_min", "B_max",
              "steady_residual", "boundary_slope", "axis_value")
    rows = [
        (r.t, r.u_min, r.u_max, r.sup_sigma, r.B_min, r.B_max,
         r.steady_residual, r.boundary_slope, r.axis_value)
        for r in records
    ]
    write_csv(path, header, rows)


def sha256_of(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, config_path, config_echo: dict, wall_time: float):
    """Manifest over every file already present in out_dir."""
    files = {
        p.name: sha256_of(p)
        for p in sorted(out_dir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    payload = {
        "command": command,
        "config_path": str(config_path) if config_path else None,
        "config": config_echo,
        "out_dir": str(out_dir),
        "tool_version": __version__,
        "wall_time_s": wall_time,
        "files": files,
    }
    write_json(out_dir / "manifest.json", payload)
    return payload
