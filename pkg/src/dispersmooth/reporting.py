"""Deterministic report emission and binary checkpoints.

Outputs are a pure function of (config, seed, code version): CSV files are
written with 17 significant digits (lossless float round trip) and fixed
newlines, so reruns are byte-identical.  The manifest additionally records
wall time, which is informational and excluded from the determinism contract.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CheckpointFormatError, ConfigurationError
from .evolution import System, SystemState
from .spectral import Grid, SpectralField

_MAGIC = b"ZKGS"
_VERSION = 1
_SYSTEM_IDS = {System.KGS: 1, System.ZAKHAROV: 2}
_IDS_SYSTEM = {v: k for k, v in _SYSTEM_IDS.items()}


def format_value(value) -> str:
    """Render one CSV cell; floats get 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ConfigurationError(
                f"row width {len(row)} does not match header width {len(header)}"
            )
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


@dataclass
class ExperimentResult:
    """What an experiment hands to `write_outputs`."""

    experiment: str
    csv_name: str
    header: list[str]
    rows: list[tuple]
    manifest_extra: dict = field(default_factory=dict)
    checkpoints: list[tuple[str, SystemState]] = field(default_factory=list)


def write_outputs(
    result: ExperimentResult,
    config_echo: dict,
    out_dir: str | Path,
    seed: int,
    quiet: bool = False,
    wall_time: float | None = None,
) -> dict[str, Path]:
    """Write manifest, CSV data, and optional checkpoints under ``out_dir``.

    Returns the written paths.  I/O failures surface as OSError with the
    path in the message.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    csv_path = out / result.csv_name
    write_csv(csv_path, result.header, result.rows)
    paths["csv"] = csv_path

    for name, state in result.checkpoints:
        ckpt_path = out / name
        save_checkpoint(state, ckpt_path)
        paths[name] = ckpt_path

    manifest = {
        "experiment": result.experiment,
        "code_version": __version__,
        "seed": seed,
        "config": config_echo,
        "outputs": {k: str(v.name) for k, v in paths.items()},
        "wall_time_seconds": wall_time,
        **({"results": result.manifest_extra} if result.manifest_extra else {}),
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    paths["manifest"] = manifest_path

    if not quiet:
        print(f"wrote {csv_path}")
    return paths


# ---------------------------------------------------------------------------
# Binary checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(state: SystemState, path: str | Path) -> None:
    """Serialize a state: magic, version, system id, grid descriptor, t, fields.

    Layout: ``ZKGS`` (4 bytes), format version (u32 LE), system id (u8),
    dimension (u8), n_per_dim (u32 LE), box_length (f64 LE), t (f64 LE),
    then each field's coefficients as interleaved (re, im) f64 LE pairs in
    row-major lattice order, fields in the order (u, w+, w-).
    """
    grid = state.grid
    header = _MAGIC + struct.pack(
        "<IBBIdd",
        _VERSION,
        _SYSTEM_IDS[state.system],
        grid.dim,
        grid.n_per_dim,
        grid.box_length,
        state.t,
    )
    blobs = [
        np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes()
        for f in (state.u, state.wplus, state.wminus)
    ]
    Path(path).write_bytes(header + b"".join(blobs))


def load_checkpoint(path: str | Path) -> SystemState:
    """Inverse of `save_checkpoint`; rejects wrong magic/version, truncation."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != _MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic (not a checkpoint)")
    head = struct.calcsize("<IBBIdd")
    if len(raw) < 4 + head:
        raise CheckpointFormatError(f"{path}: truncated header")
    version, system_id, dim, n_per_dim, box_length, t = struct.unpack(
        "<IBBIdd", raw[4 : 4 + head]
    )
    if version != _VERSION:
        raise CheckpointFormatError(
            f"{path}: format version {version} not supported (expected {_VERSION});"
            " no silent migration"
        )
    if system_id not in _IDS_SYSTEM:
        raise CheckpointFormatError(f"{path}: unknown system id {system_id}")
    grid = Grid(dim, n_per_dim, box_length)
    count = grid.mode_count
    body = raw[4 + head :]
    expected = 3 * count * 16
    if len(body) != expected:
        raise CheckpointFormatError(
            f"{path}: payload has {len(body)} bytes, expected {expected}"
        )
    fields = []
    for i in range(3):
        chunk = body[i * count * 16 : (i + 1) * count * 16]
        coeffs = np.frombuffer(chunk, dtype="<c16").reshape(grid.shape).astype(np.complex128)
        fields.append(SpectralField(grid, coeffs))
    return SystemState(_IDS_SYSTEM[system_id], fields[0], fields[1], fields[2], t)
