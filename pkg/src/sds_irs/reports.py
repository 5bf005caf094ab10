"""Report payloads, run manifests and JSON/CSV rendering.

Exact rationals are written as ``"p/q"`` strings and floats with 12
significant digits.  JSON output is ``{"manifest", "kind", "data"}``; CSV
output starts with ``# key=value`` manifest lines followed by a header row and
the data rows.
"""

from __future__ import annotations

import csv
import io
import json
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import UnsupportedFormat


def ratio_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_ratio(text: str) -> Fraction:
    return Fraction(text)


def jsonable(obj):
    """Convert report values to JSON types with the rendering conventions applied."""
    if isinstance(obj, Fraction):
        return ratio_str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    return obj


def flatten(data: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


def git_describe() -> str:
    try:
        res = subprocess.run(["git", "describe", "--always", "--tags"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return res.stdout.strip() if res.returncode == 0 and res.stdout.strip() else "unknown"


@dataclass
class RunManifest:
    command: str
    seed: int | None
    spec_hash: str | None
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    version: str = __version__
    git: str = field(default_factory=git_describe)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "spec_hash": self.spec_hash,
            "timestamp": self.timestamp,
            "tool_version": self.version,
            "git_describe": self.git,
        }


@dataclass
class Report:
    """A rendered command result: ``data`` goes to JSON, ``rows`` to CSV."""

    kind: str
    data: dict
    rows: list[dict]
    manifest: RunManifest | None = None

    def payload(self) -> dict:
        return {
            "manifest": None if self.manifest is None else self.manifest.to_dict(),
            "kind": self.kind,
            "data": self.data,
        }


def render_report(report: Report, fmt: str) -> bytes:
    if fmt == "json":
        text = json.dumps(jsonable(report.payload()), indent=2) + "\n"
        return text.encode()
    if fmt == "csv":
        buf = io.StringIO()
        if report.manifest is not None:
            for key, value in report.manifest.to_dict().items():
                buf.write(f"# {key}={'' if value is None else value}\n")
        buf.write(f"# kind={report.kind}\n")
        rows = [jsonable(flatten(row)) for row in report.rows]
        columns: list[str] = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in columns})
        return buf.getvalue().encode()
    raise UnsupportedFormat(f"unsupported format {fmt!r}; use json or csv")


def read_csv_report(blob: bytes) -> tuple[dict, list[dict]]:
    """Split a CSV report into its manifest comments and data rows."""
    text = blob.decode()
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))
