"""Run artifacts: records tables, binary field snapshots, JSON manifests.

Records are comma-delimited text with one header row and floats printed with
17 significant digits, so identical runs produce byte-identical files and the
values round-trip exactly.  Snapshots store the raw complex field behind a
fixed 64-byte header (magic, version, dim, points, box length, s) as
little-endian float64 pairs in C order.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord
from .grid import GridSpec

__all__ = [
    "RECORD_COLUMNS",
    "format_float",
    "write_records",
    "read_records",
    "write_snapshot",
    "read_snapshot",
    "write_manifest",
    "scenario_hash",
    "SNAPSHOT_MAGIC",
]

RECORD_COLUMNS = (
    "s", "charge", "grad_sq", "potential", "energy", "charge_residual",
    "energy_residual", "virial2", "heisenberg_slack", "K_value", "max_amp",
)

SNAPSHOT_MAGIC = b"EXPSNAP1"
_SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sIIIIdd")  # magic, version, dim, points, flags, length, s
_HEADER_SIZE = 64


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_records(path: str | Path, records: list[DiagnosticsRecord]) -> Path:
    path = Path(path)
    lines = [",".join(RECORD_COLUMNS)]
    for rec in records:
        lines.append(",".join(format_float(getattr(rec, c)) for c in RECORD_COLUMNS))
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return path


def read_records(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    raw = np.genfromtxt(path, delimiter=",", names=True)
    raw = np.atleast_1d(raw)
    return {name: np.asarray(raw[name], dtype=float) for name in raw.dtype.names}


def write_snapshot(path: str | Path, grid: GridSpec, s: float, u: np.ndarray) -> Path:
    path = Path(path)
    header = _HEADER.pack(SNAPSHOT_MAGIC, _SNAPSHOT_VERSION, grid.dim, grid.points,
                          0, grid.length, s)
    header = header.ljust(_HEADER_SIZE, b"\0")
    payload = np.ascontiguousarray(u, dtype="<c16").tobytes()
    path.write_bytes(header + payload)
    return path


def read_snapshot(path: str | Path) -> tuple[dict, float, np.ndarray]:
    raw = Path(path).read_bytes()
    magic, version, dim, points, _flags, length, s = _HEADER.unpack(
        raw[: _HEADER.size])
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"not a field snapshot: bad magic {magic!r}")
    if version != _SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    u = np.frombuffer(raw[_HEADER_SIZE:], dtype="<c16").reshape((points,) * dim)
    meta = {"dim": dim, "points": points, "length": length}
    return meta, s, u.copy()


def scenario_hash(config: dict, seed: int | None = None) -> str:
    """Stable digest of a parsed scenario configuration (plus seed override)."""
    canon = json.dumps({"config": config, "seed": seed}, sort_keys=True,
                       default=str).encode()
    return hashlib.sha256(canon).hexdigest()


def write_manifest(path: str | Path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
