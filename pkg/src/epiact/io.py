"""CSV tables, key-value result files and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

import numpy as np

from .hazards import SeriesTable
from .integrator import Trajectory
from .model import COMPARTMENTS

TRAJECTORY_COLUMNS = (*COMPARTMENTS, "n_living")


def format_float(x: float) -> str:
    # 17 significant digits round-trip every double
    return format(float(x), ".16e")


def trajectory_table(traj: Trajectory) -> SeriesTable:
    columns = {name: traj.column(name) for name in COMPARTMENTS}
    columns["n_living"] = traj.n_living
    return SeriesTable(traj.times, columns)


def write_csv(table: SeriesTable, path) -> Path:
    path = Path(path)
    names = table.names
    data = np.column_stack([table.times, *(table[name] for name in names)])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", *names])
        for row in data:
            writer.writerow([format_float(x) for x in row])
    return path


def read_csv(path) -> SeriesTable:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "t":
        raise ValueError(f"{path}: first column must be 't'")
    data = np.array([[float(x) for x in row] for row in body], dtype=float).reshape(-1, len(header))
    return SeriesTable(data[:, 0], {name: data[:, j] for j, name in enumerate(header[1:], start=1)})


def write_results(values: Mapping[str, object], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in values.items():
            text = format_float(value) if isinstance(value, (float, np.floating)) else str(value)
            fh.write(f"{key} = {text}\n")
    return path


def read_results(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.replace(microsecond=0).isoformat()


@dataclass(frozen=True)
class RunManifest:
    scenario_hash: str
    version: str
    timestamp: str
    files: tuple[tuple[str, str], ...]  # (relative name, sha256)

    @classmethod
    def build(cls, out_dir, names, scenario_hash: str, version: str) -> "RunManifest":
        out_dir = Path(out_dir)
        files = tuple((name, sha256_file(out_dir / name)) for name in names)
        return cls(scenario_hash, version, _timestamp(), files)

    def checksums(self) -> dict[str, str]:
        return dict(self.files)

    def write(self, path) -> Path:
        path = Path(path)
        lines = [f"scenario_sha256 = {self.scenario_hash}",
                 f"version = {self.version}",
                 f"timestamp = {self.timestamp}"]
        lines += [f"file = {name} sha256:{digest}" for name, digest in self.files]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        fields: dict[str, str] = {}
        files = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            key, _, value = line.partition(" = ")
            if key == "file":
                name, _, digest = value.rpartition(" sha256:")
                files.append((name, digest))
            elif key:
                fields[key] = value
        return cls(fields["scenario_sha256"], fields["version"], fields["timestamp"], tuple(files))

    def verify(self, out_dir) -> list[str]:
        """Names of listed files that are missing or whose checksum changed."""
        out_dir = Path(out_dir)
        bad = []
        for name, digest in self.files:
            target = out_dir / name
            if not target.is_file() or sha256_file(target) != digest:
                bad.append(name)
        return bad
