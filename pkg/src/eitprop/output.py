"""Deterministic CSV/JSON writers with atomic replace."""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _clean(obj):
    """Turn numpy scalars/arrays into plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        # mkstemp creates 0600; give the result ordinary permissions
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(payload: dict) -> bytes:
    body = {"schema_version": SCHEMA_VERSION, **payload}
    return (json.dumps(_clean(body), sort_keys=True, indent=2, allow_nan=False) + "\n").encode()


def write_json(path: Path, payload: dict) -> None:
    atomic_write(path, dumps_json(payload))


def dumps_csv(header: list[str], columns) -> bytes:
    cols = [np.asarray(c, dtype=float) for c in columns]
    if len(cols) != len(header) or len({c.shape for c in cols}) != 1:
        raise ValueError("header and columns must match and columns must share a length")
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(cols) if cols[0].size else np.zeros((0, len(cols))), fmt="%.17g", delimiter=",",
               header=",".join(header), comments="")
    return buf.getvalue().encode()


def write_csv(path: Path, header: list[str], columns) -> None:
    atomic_write(path, dumps_csv(header, columns))
