"""Deterministic CSV/JSON writers shared by the CLI (17 significant digits)."""

from __future__ import annotations

import json
import sys

from . import __version__


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows, meta=None):
    """CSV with '#'-prefixed metadata lines, a header row, and %.17g numbers."""
    lines = [f"# cspi {__version__}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {fmt(value)}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)
    return text


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return _jsonable(value.item())
    return value


def certified(value, tolerance):
    """A numeric result together with the tolerance used to certify it."""
    return {"value": _jsonable(value), "tolerance": tolerance}


def write_json(path, payload):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)
    return text
