"""Deterministic experiment outputs: CSV tables, JSON summaries, figures.

Every CSV starts with one comment line carrying the tool version and
the configuration hash, then a column-name row, then data rows whose
floats are printed with 17 significant digits; identical configuration
and seed therefore reproduce the files byte for byte.  The JSON summary
keeps full double precision through Python's shortest round-trip float
form and sorts its keys for the same reason.  Figures are rendered with
the Agg backend next to the tables they draw from; they are a reading
aid, the CSV stays the machine interface.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

import hermult  # noqa: E402

__all__ = [
    "format_value",
    "header_line",
    "write_csv",
    "write_json",
    "figure",
]


def format_value(value) -> str:
    """Render one CSV cell; floats get 17 significant digits."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return str(value)


def header_line(config_hash: str) -> str:
    return f"# hermult {hermult.__version__} config={config_hash}"


def write_csv(path, columns, rows, config_hash: str) -> Path:
    """Write one table: hash comment, header row, formatted rows."""
    path = Path(path)
    lines = [header_line(config_hash), ",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row width does not match column count")
        lines.append(",".join(format_value(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        # Round-trip through the 17-significant-digit form; this is the
        # identity on doubles and pins the serialization contract.
        return float(f"{float(obj):.17g}")
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def write_json(path, summary: dict) -> Path:
    path = Path(path)
    text = json.dumps(_jsonable(summary), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    return path


class figure:
    """Context manager producing one PNG with fixed, reproducible layout.

    Usage::

        with figure(out / "decay.png", rows=1, cols=2) as axes:
            axes[0].plot(...)
    """

    def __init__(self, path, rows: int = 1, cols: int = 1, width: float = 6.0,
                 height: float = 4.0):
        self.path = Path(path)
        self.rows = rows
        self.cols = cols
        self.size = (width * cols, height * rows)

    def __enter__(self):
        self.fig, axes = plt.subplots(
            self.rows, self.cols, figsize=self.size, squeeze=False
        )
        flat = axes.ravel()
        return flat if flat.size > 1 else flat[0]

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.fig.tight_layout()
            self.fig.savefig(self.path, dpi=110)
        plt.close(self.fig)
        return False
