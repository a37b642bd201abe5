"""Deterministic result persistence: atomic CSV and JSON writers.

Numbers are written with 17 significant digits and a '.' decimal separator
so doubles round-trip exactly and identical configurations reproduce
byte-identical payloads; every write goes through a temp-file rename so
interrupted runs never leave truncated files.
"""

import json
import os
import tempfile

import numpy as np

__all__ = ["fmt", "atomic_write_text", "write_csv", "write_json",
           "torsion_field_to_files"]


def fmt(x):
    """Format one value for CSV: full-precision floats, plain ints/strings."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def atomic_write_text(path, text):
    """Write text to ``path`` through a same-directory temp file + rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, payload):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def torsion_field_to_files(fld, stem):
    """Persist a solved field: JSON header plus CSV blocks for u and flux."""
    write_json(stem + ".json", {
        "profile": json.loads(fld.profile.to_json()),
        "resolution": list(fld.meta.get("resolution", fld.u.shape)),
        "residual": fld.residual,
        "meta": {k: v for k, v in fld.meta.items() if k != "resolution"},
    })
    rows = []
    for i, t in enumerate(fld.t):
        for k, a in enumerate(fld.angles):
            rows.append((t, a, fld.u[i, k]))
    write_csv(stem + "_u.csv", ("t", "angle", "u"), rows)
    write_csv(stem + "_trace.csv", ("angle", "H"),
              list(zip(fld.angles, fld.neumann)))
