"""Versioned text checkpoints: typed key/value entries plus dense arrays.

Layout (one entry per ``<type> <name> ...`` header line, keys sorted):

    # format: checkpoint v1
    kind <model-kind>
    array <name> <rows> [<cols>]   followed by one line per row
    ints <name> <count>            followed by one line of integers
    scalar <name> <value>
    int <name> <value>
    str <name> <value>

Floats are written with shortest round-trip formatting, so save -> load is
lossless and re-saving is byte-identical.
"""

from __future__ import annotations

import numpy as np

from . import errors

FORMAT_LINE = "# format: checkpoint v1"


def _fmt_floats(row):
    return " ".join(repr(float(x)) for x in row)


def save_checkpoint(path, kind, fields):
    lines = [FORMAT_LINE, f"kind {kind}"]
    for name in sorted(fields):
        value = fields[name]
        if isinstance(value, np.ndarray) and value.dtype.kind in "iu":
            flat = value.ravel()
            lines.append(f"ints {name} {flat.shape[0]}")
            lines.append(" ".join(str(int(x)) for x in flat))
        elif isinstance(value, np.ndarray) and value.ndim == 1:
            lines.append(f"array {name} {value.shape[0]}")
            lines.append(_fmt_floats(value))
        elif isinstance(value, np.ndarray) and value.ndim == 2:
            lines.append(f"array {name} {value.shape[0]} {value.shape[1]}")
            for row in value:
                lines.append(_fmt_floats(row))
        elif isinstance(value, bool):
            raise ValueError("boolean checkpoint fields are not supported")
        elif isinstance(value, int):
            lines.append(f"int {name} {value}")
        elif isinstance(value, float):
            lines.append(f"scalar {name} {value!r}")
        elif isinstance(value, str):
            lines.append(f"str {name} {value}")
        else:
            raise ValueError(f"unsupported checkpoint field {name!r}: {type(value)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path):
    """Return (kind, fields). Raises ParseError on malformed content."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_LINE:
        raise errors.ParseError(path, 1, "not a checkpoint file")
    if len(lines) < 2 or not lines[1].startswith("kind "):
        raise errors.ParseError(path, 2, "missing model kind")
    kind = lines[1][len("kind "):]

    fields = {}
    i = 2
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line.strip():
            continue
        parts = line.split(" ")
        tag = parts[0]
        try:
            if tag == "array":
                name = parts[1]
                if len(parts) == 3:
                    rows, cols = int(parts[2]), None
                else:
                    rows, cols = int(parts[2]), int(parts[3])
                if cols is None:
                    fields[name] = np.array(
                        [float(x) for x in lines[i].split(" ")], dtype=np.float64
                    )
                    i += 1
                    if fields[name].shape[0] != rows:
                        raise errors.ParseError(path, i, f"array {name} length mismatch")
                else:
                    block = []
                    for r in range(rows):
                        block.append([float(x) for x in lines[i + r].split(" ")])
                    i += rows
                    arr = np.array(block, dtype=np.float64)
                    if arr.shape != (rows, cols):
                        raise errors.ParseError(path, i, f"array {name} shape mismatch")
                    fields[name] = arr
            elif tag == "ints":
                name = parts[1]
                count = int(parts[2])
                fields[name] = np.array(
                    [int(x) for x in lines[i].split(" ")], dtype=np.int64
                )
                i += 1
                if fields[name].shape[0] != count:
                    raise errors.ParseError(path, i, f"ints {name} length mismatch")
            elif tag == "int":
                fields[parts[1]] = int(parts[2])
            elif tag == "scalar":
                fields[parts[1]] = float(parts[2])
            elif tag == "str":
                fields[parts[1]] = " ".join(parts[2:])
            else:
                raise errors.ParseError(path, i, f"unknown entry tag {tag!r}")
        except (ValueError, IndexError):
            raise errors.ParseError(path, i, f"malformed entry {line!r}") from None
    return kind, fields
