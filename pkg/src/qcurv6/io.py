"""File formats: CSV/JSON artifacts, atomic writes, run manifests."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: str, rows) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def read_csv(path, expected_header: str | None = None):
    """Returns (header_fields, data array). Raises on schema mismatch."""
    with open(path) as fh:
        header = fh.readline().strip()
    fields = header.split(",")
    if expected_header is not None:
        expected = expected_header.split(",")
        missing = [c for c in expected if c not in fields]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return fields, data


def write_json(path, obj) -> None:
    _atomic_write(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, artifacts, *, command: str, config: dict,
                   checks: list | None = None) -> Path:
    """Top-level run manifest listing every artifact with its checksum."""
    out_dir = Path(out_dir)
    entries = []
    for art in artifacts:
        p = Path(art)
        entries.append({
            "path": str(p.relative_to(out_dir)) if p.is_relative_to(out_dir) else str(p),
            "sha256": sha256_file(p),
            "bytes": p.stat().st_size,
        })
    manifest = {
        "command": command,
        "config": config,
        "artifacts": entries,
        "checks": checks or [],
    }
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path
