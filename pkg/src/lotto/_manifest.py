"""Run manifests embedded in every output file."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

VERSION = "0.1.0"
MANIFEST_PREFIX = "# manifest: "


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "value") and not isinstance(v, (int, float, str, bool)):
        return v.value
    return v


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int | None = None
    version: str = VERSION
    outputs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "parameters": _jsonable(self.parameters),
            "seed": self.seed,
            "version": self.version,
            "outputs": list(self.outputs),
        }

    def line(self) -> str:
        return MANIFEST_PREFIX + json.dumps(self.to_dict(), sort_keys=True)


def format_float(x) -> str:
    """Full-precision scientific notation; bounds span 1e-300..1."""
    x = float(x)
    if x != x:
        return "nan"
    if x in (float("inf"), float("-inf")):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17e}"


def csv_text(manifest: RunManifest, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(manifest.line() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def read_manifest(path: str | Path) -> dict:
    first = Path(path).read_text().splitlines()[0]
    if first.startswith(MANIFEST_PREFIX):
        return json.loads(first[len(MANIFEST_PREFIX):])
    data = json.loads(Path(path).read_text())
    return data["manifest"]
