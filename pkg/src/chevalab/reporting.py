"""Persistence and report plumbing: JSON-lines journals, CSV tables, and the
per-run report object.  All writes are atomic (write to temp, rename) and
byte-reproducible for identical inputs; wall time lives in a separate field
excluded from the determinism contract.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence

from .counting import SCHEMA_VERSION, CountRecord
from .errors import IoError


@dataclass
class Report:
    experiment_id: str
    anchor: str  # short label tying the run to the claim it exercises
    inputs: dict
    outputs: dict
    verdicts: Dict[str, bool] = dc_field(default_factory=dict)
    wall_ms: int = 0

    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment_id": self.experiment_id,
            "anchor": self.anchor,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "verdicts": self.verdicts,
            "wall_ms": self.wall_ms,
        }


def atomic_write_text(path: str, text: str) -> None:
    try:
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit_jsonl(records: Sequence[CountRecord], path: str) -> None:
    atomic_write_text(path, "".join(r.to_json() + "\n" for r in records))


def load_jsonl(path: str) -> List[CountRecord]:
    try:
        with open(path) as fh:
            return [CountRecord.from_json(line) for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def emit_csv(rows: Sequence[dict], fieldnames: Sequence[str], path: str) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    atomic_write_text(path, buf.getvalue())


def emit(records: Sequence[CountRecord], fmt: str, path: str) -> None:
    """Persist count records as JSONL (machine use) or CSV (tables)."""
    if fmt == "json":
        emit_jsonl(records, path)
    elif fmt == "csv":
        rows = []
        for r in records:
            rows.append({
                "n": r.n, "ell": r.ell, "k": r.k, "m": r.m,
                "target": json.dumps(r.target, sort_keys=True),
                "count": str(r.count),
                "shards": r.shards,
                "shard_id": "" if r.shard_id is None else r.shard_id,
            })
        emit_csv(rows, ["n", "ell", "k", "m", "target", "count", "shards", "shard_id"], path)
    else:
        raise IoError(f"unknown format {fmt!r}")
