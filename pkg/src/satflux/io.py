"""CSV and JSON writers with fixed formatting so reruns are byte-identical."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.12g"
OUTPUT_DIR_ENV = "SATFLUX_OUTPUT_DIR"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % (value + 0.0)  # no negative zero
    return str(value)


def resolve_output(path) -> Path:
    """Relative output paths are placed under ``$SATFLUX_OUTPUT_DIR`` when it is set."""
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def csv_text(columns: dict, header: dict | None = None, footer: list | None = None) -> str:
    """Render equal-length columns as CSV with ``#`` header and footer lines."""
    names = list(columns)
    data = [np.asarray(columns[k]) for k in names]
    lines = [f"# {k}={fmt(v)}" for k, v in (header or {}).items()]
    lines.append(",".join(names))
    for row in zip(*data):
        lines.append(",".join(fmt(float(v)) if np.issubdtype(type(v), np.number) else fmt(v) for v in row))
    lines.extend("# " + ",".join(fmt(x) for x in item) for item in (footer or []))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, header=None, footer=None) -> Path | None:
    """Write to ``path`` (``None`` or ``"-"`` prints to stdout)."""
    text = csv_text(columns, header, footer)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return None
    out = resolve_output(path)
    out.write_text(text)
    return out


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(columns, header, footer_rows)``."""
    header, footer, rows, names = {}, [], [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            body = line[2:]
            if names is None and "=" in body and "," not in body.split("=", 1)[0]:
                k, v = body.split("=", 1)
                header[k] = v
            else:
                footer.append(body.split(","))
        elif names is None:
            names = line.split(",")
        else:
            rows.append([float(x) for x in line.split(",")])
    arr = np.array(rows).reshape(-1, len(names or []))
    return {k: arr[:, i] for i, k in enumerate(names or [])}, header, footer


@dataclass
class RunManifest:
    """What was run, with which parameters, and which files it produced."""

    command: str
    parameters: dict
    outputs: list = field(default_factory=list)
    versions: dict = field(default_factory=dict)
    wall_time: float = 0.0
    results: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable)

    def write(self, path) -> Path:
        out = resolve_output(path)
        out.write_text(self.to_json() + "\n")
        return out

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")
