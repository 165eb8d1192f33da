"""CSV/JSON persistence for profiles, reduced solutions and reports.

Profile CSV layout::

    # lambda=1.0
    # coupling=1.04
    # eps=0.2
    # L=24.0
    # n=2401
    # center=0.0
    # bc=dirichlet
    x,u,v,du_dx,dv_dx,w1,w2,phi1,phi2,ham_residual
    -24.0,0.0,1.0,...

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back reproduces every value bit for bit.  Only x, u, v and the
metadata are needed to rebuild a profile; the other columns are derived
and written for plotting.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import BecWallError, MalformedFile, SchemaMismatch
from .model import (
    CartesianProfile,
    Mesh,
    ModelParams,
    cartesian_to_slowfast,
    hamiltonian_residual,
)
from .singular import ReducedSolution, critical_manifold_point

__all__ = [
    "PROFILE_COLUMNS",
    "REDUCED_COLUMNS",
    "write_profile",
    "read_profile",
    "write_reduced",
    "read_reduced",
    "write_json",
    "profile_table",
]

PROFILE_COLUMNS = ("x", "u", "v", "du_dx", "dv_dx", "w1", "w2", "phi1", "phi2", "ham_residual")
REDUCED_COLUMNS = ("x", "phi1", "phi2", "w1", "w2")
_PROFILE_META = ("lambda", "coupling", "eps", "L", "n", "center", "bc")


def _fmt(value: float) -> str:
    return repr(float(value))


def profile_table(profile: CartesianProfile) -> dict[str, np.ndarray]:
    """All CSV columns for ``profile``; slow-fast columns are NaN if undefined."""
    n = profile.mesh.n
    cols = {
        "x": profile.x,
        "u": profile.u,
        "v": profile.v,
        "du_dx": profile.du,
        "dv_dx": profile.dv,
    }
    try:
        sf = cartesian_to_slowfast(profile)
        cols.update(w1=sf.w1, w2=sf.w2, phi1=sf.phi1, phi2=sf.phi2)
    except BecWallError:
        nan = np.full(n, np.nan)
        cols.update(w1=nan, w2=nan, phi1=nan, phi2=nan)
    # derived columns of arbitrary profiles may overflow to inf; that is what gets written
    with np.errstate(over="ignore", invalid="ignore"):
        cols["ham_residual"] = np.asarray(hamiltonian_residual(profile.state(), profile.params))
    return cols


def _write_table(path, meta: dict, columns: tuple[str, ...], table: dict) -> None:
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    data = [table[c] for c in columns]
    for row in zip(*data):
        lines.append(",".join(_fmt(a) for a in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_table(path, columns: tuple[str, ...]) -> tuple[dict, dict[str, np.ndarray]]:
    meta: dict[str, str] = {}
    header = None
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is not None:
                    raise MalformedFile("metadata after the header", lineno)
                body = line[1:].strip()
                if "=" not in body:
                    raise MalformedFile(f"metadata line without '=': {body!r}", lineno)
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = tuple(c.strip() for c in line.split(","))
                if header != columns:
                    raise SchemaMismatch(f"expected header {','.join(columns)}, got {line}")
                continue
            fields = line.split(",")
            if len(fields) != len(columns):
                raise MalformedFile(f"expected {len(columns)} fields, got {len(fields)}", lineno)
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise MalformedFile(str(exc), lineno) from None
    if header is None:
        raise SchemaMismatch("file has no header line")
    if not rows:
        raise MalformedFile("no data rows")
    arr = np.array(rows, dtype=float)
    return meta, {c: arr[:, k] for k, c in enumerate(columns)}


def write_profile(path, profile: CartesianProfile) -> None:
    p = profile.params
    meta = {
        "lambda": _fmt(p.lam),
        "coupling": _fmt(p.coupling),
        "eps": _fmt(p.eps),
        "L": _fmt(profile.mesh.L),
        "n": profile.mesh.n,
        "center": _fmt(profile.center),
        "bc": profile.bc,
    }
    _write_table(path, meta, PROFILE_COLUMNS, profile_table(profile))


def _meta_float(meta: dict, key: str) -> float:
    if key not in meta:
        raise MalformedFile(f"missing metadata '{key}'")
    try:
        return float(meta[key])
    except ValueError:
        raise MalformedFile(f"metadata '{key}' is not a number: {meta[key]!r}") from None


def read_profile(path) -> CartesianProfile:
    meta, cols = _read_table(path, PROFILE_COLUMNS)
    missing = [k for k in _PROFILE_META if k not in meta]
    if missing:
        raise MalformedFile(f"missing metadata {missing}")
    n = int(_meta_float(meta, "n"))
    if n != cols["x"].size:
        raise MalformedFile(f"metadata n={n} but {cols['x'].size} rows")
    try:
        params = ModelParams(_meta_float(meta, "lambda"), _meta_float(meta, "coupling"), _meta_float(meta, "eps"))
        mesh = Mesh(cols["x"])
    except ValueError as exc:
        raise MalformedFile(str(exc)) from None
    if not math.isclose(mesh.L, _meta_float(meta, "L"), rel_tol=0, abs_tol=0):
        raise MalformedFile("metadata L disagrees with the x column")
    return CartesianProfile(
        mesh, cols["u"], cols["v"], params, center=_meta_float(meta, "center"), bc=meta["bc"]
    )


def write_reduced(path, reduced: ReducedSolution) -> None:
    w1, w2 = critical_manifold_point(reduced.phi1, reduced.phi2, reduced.lam)
    meta = {"lambda": _fmt(reduced.lam), "L": _fmt(reduced.L), "n": reduced.x.size}
    table = {"x": reduced.x, "phi1": reduced.phi1, "phi2": reduced.phi2, "w1": w1, "w2": w2}
    _write_table(path, meta, REDUCED_COLUMNS, table)


def read_reduced(path) -> ReducedSolution:
    meta, cols = _read_table(path, REDUCED_COLUMNS)
    return ReducedSolution(cols["x"], cols["phi1"], cols["phi2"], _meta_float(meta, "lambda"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if path is None or str(path) == "-":
        print(text, end="")
        return
    Path(path).write_text(text, encoding="utf-8")
