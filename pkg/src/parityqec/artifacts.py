"""Artifact writing: trajectory/events/Wigner CSVs, summary JSON, state
sidecars, and a manifest with content hashes so every published figure
artifact is reproducible from (config, seed).

All CSV numeric output uses 9 significant digits, '.' decimal separator,
and LF line endings.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .hilbert import DensityMatrix, SubsystemDims, WignerGrid
from .sme import Trajectory

__all__ = [
    "fmt",
    "write_trajectory_csv",
    "write_events_csv",
    "write_wigner_csv",
    "read_wigner_csv",
    "write_json",
    "write_state",
    "read_state",
    "write_manifest",
    "sha256_file",
]


def fmt(x: float) -> str:
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return f"{x:.9g}"


def _write_lines(path: Path, lines: Iterable[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    return path


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    lines = ["t,i_raw,i_filtered,purity,logical_phase"]
    for i in range(traj.times.size):
        lines.append(",".join(fmt(v) for v in (
            traj.times[i], traj.i_raw[i], traj.i_filtered[i],
            traj.purity[i], traj.logical_phase[i])))
    return _write_lines(Path(path), lines)


def write_events_csv(path, traj: Trajectory) -> Path:
    lines = ["t,kind,payload"]
    for ev in traj.events:
        lines.append(f"{fmt(ev.t)},{ev.kind},{ev.payload}")
    return _write_lines(Path(path), lines)


def write_wigner_csv(path, grid: WignerGrid) -> Path:
    lines = ["x,y,w"]
    for i, x in enumerate(grid.x_axis):
        for j, y in enumerate(grid.y_axis):
            lines.append(f"{fmt(x)},{fmt(y)},{fmt(grid.values[i, j])}")
    return _write_lines(Path(path), lines)


def read_wigner_csv(path) -> WignerGrid:
    raw = np.genfromtxt(path, delimiter=",", skip_header=1)
    xs = np.unique(raw[:, 0])
    ys = np.unique(raw[:, 1])
    vals = raw[:, 2].reshape(xs.size, ys.size)
    return WignerGrid(xs, ys, vals)


def write_json(path, payload: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_state(path, state: DensityMatrix) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, matrix=state.matrix, dims=np.array(state.dims.dims))
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def read_state(path) -> DensityMatrix:
    data = np.load(path)
    return DensityMatrix(data["matrix"], SubsystemDims(tuple(int(d) for d in data["dims"])),
                         check=False)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir, files: Iterable[Path], config: Mapping) -> Path:
    out_dir = Path(out_dir)
    entries = []
    for f in sorted(Path(f) for f in files):
        entries.append({
            "name": f.name,
            "sha256": sha256_file(f),
            "bytes": f.stat().st_size,
        })
    return write_json(out_dir / "manifest.json", {"files": entries, "config": dict(config)})
