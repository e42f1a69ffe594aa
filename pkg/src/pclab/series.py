"""Generic (abscissa, values...) series with CSV/JSON emission.

CSV: '#'-prefixed metadata preamble (key=value, sorted), then an RFC-4180
header row and data rows with '.' decimals at 17 significant digits.
JSON: UTF-8, sorted keys, the same metadata embedded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class GridSeries:
    name: str
    columns: list[str]
    rows: np.ndarray                       # shape (n, len(columns)), ascending first column
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.shape[1] != len(self.columns):
            raise InvalidArgumentError(
                f"row width {self.rows.shape[1]} != {len(self.columns)} columns")
        if len(self.rows) > 1 and np.any(np.diff(self.rows[:, 0]) <= 0):
            raise InvalidArgumentError("abscissas must be strictly increasing")

    def to_csv(self, path: str | Path) -> None:
        lines = [f"# {k}={self.metadata[k]}" for k in sorted(self.metadata)]
        lines.append(",".join(_quote(c) for c in self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def to_json(self, path: str | Path) -> None:
        doc = {
            "name": self.name,
            "columns": list(self.columns),
            "rows": [[float(v) for v in row] for row in self.rows],
            "metadata": _jsonable(self.metadata),
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n",
                              encoding="utf-8")

    def write(self, path: str | Path, fmt: str) -> Path:
        path = Path(path).with_suffix("." + fmt)
        if fmt == "csv":
            self.to_csv(path)
        elif fmt == "json":
            self.to_json(path)
        else:
            raise InvalidArgumentError(f"unknown output format {fmt!r}")
        return path


def _quote(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj
