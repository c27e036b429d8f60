"""Config files, diagnostics CSV, binary snapshots and run manifests.

Config syntax is deliberately small: ``[section]`` headers, ``key = value``
lines, ``#`` or ``;`` comments.  Every problem is reported with the key and
line number so a failing run can be fixed without guessing.
"""

from __future__ import annotations

import json
import math
import platform
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CompatibilityError,
    ConfigError,
    DuplicateKeyError,
    MalformedNumberError,
    MissingKeyError,
    OutOfRangeError,
    UnknownKeyError,
)
from .params import PhysicalParams, derive_constants
from .profiles import PROFILE_KINDS, InitialData
from .radial import DIAGNOSTIC_COLUMNS, FIELD_MODES, NormalizedState, PrimalState, RadialGrid, SolverConfig

FORMAT_VERSION = 1
SNAPSHOT_MAGIC = "eplab-snapshot"

_FLOAT, _INT, _BOOL, _STR = "float", "int", "bool", "str"

# section -> key -> (kind, default, allowed choices); default None means required
SCHEMA = {
    "physics": {
        "gamma": (_FLOAT, None, None),
        "n0": (_FLOAT, 1.0, None),
        "units": (_STR, "paper", ("paper", "si-like")),
        "kappa": (_FLOAT, "", None),
    },
    "grid": {
        "num_cells": (_INT, None, None),
        "r_max": (_FLOAT, None, None),
    },
    "run": {
        "t_end": (_FLOAT, None, None),
        "cfl": (_FLOAT, 0.4, None),
        "field_mode": (_STR, "gauss", FIELD_MODES + ("gauss-constraint",)),
        "filter": (_BOOL, True, None),
        "diagnostics_stride": (_INT, 10, None),
        "formulation": (_STR, "primal", ("primal", "normalized")),
        "snapshot_stride": (_INT, 0, None),
    },
    "initial": {
        "profile": (_STR, "gaussian", PROFILE_KINDS),
        "amplitude": (_FLOAT, 0.0, None),
        "width": (_FLOAT, 1.0, None),
        "center": (_FLOAT, 0.0, None),
        "velocity_amplitude": (_FLOAT, 0.0, None),
        "snapshot_path": (_STR, "", None),
        "neutralize": (_BOOL, True, None),
    },
}

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")


@dataclass
class RunSpec:
    """Everything a config file describes."""

    config: SolverConfig
    initial: InitialData
    formulation: str = "primal"
    snapshot_stride: int = 0
    values: dict = field(default_factory=dict)


def _convert(kind, raw, key, line):
    if kind == _FLOAT:
        if not _NUMBER.match(raw):
            raise MalformedNumberError(f"line {line}: {key} = {raw!r} is not a number", key, line)
        val = float(raw)
        if not math.isfinite(val):
            raise MalformedNumberError(f"line {line}: {key} must be finite", key, line)
        return val
    if kind == _INT:
        if not _INTEGER.match(raw):
            raise MalformedNumberError(f"line {line}: {key} = {raw!r} is not an integer", key, line)
        return int(raw)
    if kind == _BOOL:
        low = raw.lower()
        if low in ("on", "true", "yes", "1"):
            return True
        if low in ("off", "false", "no", "0"):
            return False
        raise OutOfRangeError(f"line {line}: {key} must be on or off, got {raw!r}", key, line)
    return raw


def read_sections(text: str):
    """Raw {section: {key: (value, line)}} with duplicate and unknown key checks."""
    sections: dict = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {stripped!r}", None, lineno)
            current = stripped[1:-1].strip()
            if current not in SCHEMA:
                raise UnknownKeyError(f"line {lineno}: unknown section [{current}]", current, lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value", None, lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if current is None:
            raise ConfigError(f"line {lineno}: {key} appears before any [section]", key, lineno)
        if key not in SCHEMA[current]:
            raise UnknownKeyError(f"line {lineno}: unknown key {current}.{key}", key, lineno)
        if key in sections[current]:
            first = sections[current][key][1]
            raise DuplicateKeyError(
                f"duplicate key {current}.{key} on lines {first} and {lineno}", key, lineno
            )
        sections[current][key] = (value, lineno)
    return sections


def _check(cond, key, line, msg):
    if not cond:
        raise OutOfRangeError(f"{key}: {msg}" + (f" (line {line})" if line else ""), key, line)


def parse_config(text: str) -> RunSpec:
    raw = read_sections(text)
    values: dict = {}
    lines: dict = {}
    for sec, keys in SCHEMA.items():
        for key, (kind, default, choices) in keys.items():
            if key in raw.get(sec, {}):
                text_val, line = raw[sec][key]
                val = _convert(kind, text_val, key, line)
                if choices is not None and val not in choices:
                    raise OutOfRangeError(
                        f"line {line}: {key} must be one of {', '.join(choices)}, got {val!r}", key, line
                    )
            elif default is None:
                raise MissingKeyError(f"missing required key {sec}.{key}", key)
            else:
                val, line = default, None
            values[key] = val
            lines[key] = line

    g = values["gamma"]
    _check(g > 1.0, "gamma", lines["gamma"], f"must be > 1, got {g}")
    _check(values["n0"] > 0, "n0", lines["n0"], "must be positive")
    _check(values["num_cells"] >= 64, "num_cells", lines["num_cells"], "must be >= 64")
    _check(values["r_max"] > 0, "r_max", lines["r_max"], "must be positive")
    _check(values["t_end"] > 0, "t_end", lines["t_end"], "must be positive")
    _check(0 < values["cfl"] <= 0.9, "cfl", lines["cfl"], "must lie in (0, 0.9]")
    _check(values["diagnostics_stride"] >= 1, "diagnostics_stride", lines["diagnostics_stride"], "must be >= 1")
    _check(values["snapshot_stride"] >= 0, "snapshot_stride", lines["snapshot_stride"], "must be >= 0")
    _check(values["width"] > 0, "width", lines["width"], "must be positive")
    _check(values["center"] >= 0, "center", lines["center"], "must be >= 0")
    if values["profile"] == "file":
        _check(bool(values["snapshot_path"]), "snapshot_path", lines["snapshot_path"],
               "required when profile = file")

    kappa = values["kappa"]
    if kappa != "":
        _check(kappa > 0, "kappa", lines["kappa"], "must be positive")
    else:
        kappa = 1.0 if values["units"] == "paper" else 4.0 * math.pi
    params = PhysicalParams(gamma=g, n0=values["n0"], kappa=kappa)
    cfg = SolverConfig(
        params=params,
        grid=RadialGrid(values["num_cells"], values["r_max"]),
        t_end=values["t_end"],
        cfl_number=values["cfl"],
        field_mode=values["field_mode"],
        filter_on=values["filter"],
        diagnostics_stride=values["diagnostics_stride"],
    )
    init = InitialData(
        profile=values["profile"],
        amplitude=values["amplitude"],
        width=values["width"],
        center=values["center"],
        velocity_amplitude=values["velocity_amplitude"],
        neutralize=values["neutralize"],
        snapshot_path=values["snapshot_path"] or None,
    )
    return RunSpec(cfg, init, values["formulation"], values["snapshot_stride"], values)


def load_config(path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(spec: RunSpec) -> str:
    """Canonical config text; parse_config(format_config(s)) reproduces s."""
    out = []
    for sec, keys in SCHEMA.items():
        out.append(f"[{sec}]")
        for key in keys:
            val = spec.values.get(key, "")
            if val == "" or val is None:
                continue
            if isinstance(val, bool):
                val = "on" if val else "off"
            elif isinstance(val, float):
                val = repr(val)
            out.append(f"{key} = {val}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# diagnostics CSV


def _fmt(x) -> str:
    return "%.17g" % x


def timeseries_text(rows) -> str:
    lines = [",".join(DIAGNOSTIC_COLUMNS)]
    for row in rows:
        d = asdict(row) if not isinstance(row, dict) else row
        lines.append(",".join(_fmt(d[c]) for c in DIAGNOSTIC_COLUMNS))
    return "\n".join(lines) + "\n"


def write_timeseries(rows, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(timeseries_text(rows), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"writing diagnostics to {path}: {exc}") from exc
    return path


def read_timeseries(path) -> dict:
    """Column name -> float array."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]], dtype=float)
    data = data.reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_csv(path, columns: dict) -> Path:
    """Generic plot-ready CSV from equal-length columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [",".join(names)]
    for i in range(arrays[0].size if arrays else 0):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# snapshots
#
# Layout: one JSON header line (utf-8, newline-terminated), then the columns
# back to back as raw little-endian IEEE-754 doubles.


def _variables(state):
    if isinstance(state, PrimalState):
        return "primal", ("n", "u", "E")
    if isinstance(state, NormalizedState):
        return "normalized", ("m", "v", "g")
    raise TypeError(f"cannot snapshot {type(state).__name__}")


def snapshot_bytes(state, grid: RadialGrid, params: PhysicalParams) -> bytes:
    kind, names = _variables(state)
    header = {
        "format": SNAPSHOT_MAGIC,
        "version": FORMAT_VERSION,
        "encoding": "float64-le",
        "kind": kind,
        "num_cells": grid.num_cells,
        "r_max": grid.r_max,
        "time": state.time.hex(),
        "params_hash": params.digest(),
        "params": asdict(params),
        "variables": list(names),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    for name in names:
        col = np.ascontiguousarray(getattr(state, name), dtype="<f8")
        if col.size != grid.num_cells:
            raise CompatibilityError(f"{name} has {col.size} values, grid has {grid.num_cells}")
        blob += col.tobytes()
    return blob


def snapshot_name(time: float) -> str:
    return f"t_{time:.6f}.snap"


def write_snapshot(state, grid: RadialGrid, params: PhysicalParams, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(snapshot_bytes(state, grid, params))
    except OSError as exc:
        raise OSError(f"writing snapshot {path}: {exc}") from exc
    return path


def parse_snapshot(blob: bytes, params: PhysicalParams | None = None, grid: RadialGrid | None = None):
    """(state, grid, header) from snapshot bytes, checking against params/grid if given."""
    nl = blob.find(b"\n")
    if nl < 0:
        raise CompatibilityError("snapshot has no header line")
    try:
        header = json.loads(blob[:nl].decode("utf-8"))
    except ValueError as exc:
        raise CompatibilityError(f"unreadable snapshot header: {exc}") from exc
    if header.get("format") != SNAPSHOT_MAGIC or header.get("version") != FORMAT_VERSION:
        raise CompatibilityError("not an eplab snapshot of a supported version")
    n = int(header["num_cells"])
    snap_grid = RadialGrid(n, float(header["r_max"]))
    if grid is not None and (grid.num_cells != n or grid.r_max != snap_grid.r_max):
        raise CompatibilityError(
            f"snapshot grid ({n}, {snap_grid.r_max}) differs from ({grid.num_cells}, {grid.r_max})"
        )
    if params is not None and params.digest() != header["params_hash"]:
        raise CompatibilityError("snapshot parameter hash does not match the run parameters")
    payload = blob[nl + 1:]
    names = header["variables"]
    if len(payload) != 8 * n * len(names):
        raise CompatibilityError("snapshot payload length does not match its header")
    cols = np.frombuffer(payload, dtype="<f8").astype(float).reshape(len(names), n)
    time = float.fromhex(header["time"])
    cls = PrimalState if header["kind"] == "primal" else NormalizedState
    state = cls(time, *(c.copy() for c in cols))
    return state, snap_grid, header


def load_snapshot(path, params: PhysicalParams | None = None, grid: RadialGrid | None = None):
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise OSError(f"reading snapshot {path}: {exc}") from exc
    try:
        return parse_snapshot(blob, params, grid)
    except CompatibilityError as exc:
        raise CompatibilityError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# manifest


def manifest_text(spec: RunSpec, extra: dict | None = None) -> str:
    params = spec.config.params
    consts = derive_constants(params)
    info = {
        "config": format_config(spec),
        "params": asdict(params),
        "params_hash": params.digest(),
        "derived": {"c0": consts.c0, "m0": consts.m0},
        "versions": {
            "eplab": _package_version(),
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "platform": platform.platform(),
        },
    }
    if extra:
        info.update(extra)
    return json.dumps(info, indent=2, sort_keys=True) + "\n"


def write_manifest(spec: RunSpec, out_dir, extra: dict | None = None) -> Path:
    path = Path(out_dir) / "manifest"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest_text(spec, extra), encoding="utf-8")
    return path


def _package_version() -> str:
    from . import __version__

    return __version__


def equilibrium_spec_text(gamma: float = 3.0) -> str:
    """Smallest useful config, handy for smoke tests."""
    return f"[physics]\ngamma = {gamma!r}\n[grid]\nnum_cells = 64\nr_max = 20.0\n[run]\nt_end = 1.0\n"


__all__ = [
    "RunSpec",
    "SCHEMA",
    "parse_config",
    "load_config",
    "format_config",
    "read_sections",
    "write_timeseries",
    "read_timeseries",
    "timeseries_text",
    "write_csv",
    "write_snapshot",
    "load_snapshot",
    "parse_snapshot",
    "snapshot_bytes",
    "snapshot_name",
    "write_manifest",
    "manifest_text",
]
