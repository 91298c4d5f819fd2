"""Matrix files, CSV tables and atomic output."""

import json
import math
import os
import sys
import tempfile

import numpy as np
import yaml

from .errors import NotSymplectic, TransducerError
from .symplectic import symplectic_residual

SCHEMA_VERSION = 1
SYMPLECTIC_LOAD_TOL = 1e-10


class MatrixFileError(TransducerError):
    """A transducer file could not be read or parsed."""


def parse_matrix(text, source="<string>", check=True):
    """Parse a YAML transducer document into ``(T, metadata)``.

    Expected keys: ``schema_version`` (1), ``matrix`` (4 rows of 4 numbers,
    quadrature order q1, p1, q2, p2) and optional ``label`` and ``units``.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MatrixFileError(f"{source}: not valid YAML ({exc})") from exc
    if not isinstance(doc, dict):
        raise MatrixFileError(f"{source}: expected a mapping at top level")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise MatrixFileError(f"{source}: unsupported schema_version {version!r}")
    rows = doc.get("matrix")
    try:
        T = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixFileError(f"{source}: matrix entries must be numbers") from exc
    if T.shape != (4, 4):
        raise MatrixFileError(f"{source}: matrix must be 4x4, got shape {T.shape}")
    if not np.all(np.isfinite(T)):
        raise MatrixFileError(f"{source}: matrix entries must be finite")
    if check:
        res = symplectic_residual(T)
        scale = max(1.0, float(np.max(np.abs(T))) ** 2)
        if res > SYMPLECTIC_LOAD_TOL * scale:
            raise NotSymplectic(f"{source}: max commutator residual {res:.3e}", residual=res)
    meta = {"label": doc.get("label", ""), "units": doc.get("units", "dimensionless")}
    return T, meta


def load_matrix(path, check=True):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_matrix(text, source=str(path), check=check)


def dump_matrix(T, label="", units="dimensionless"):
    """YAML text for a 4x4 matrix, with entries at full double precision."""
    rows = "\n".join("  - [" + ", ".join(repr(float(x)) for x in row) + "]" for row in np.asarray(T))
    return (
        "# two-mode quadrature transform, rows/cols ordered q1, p1, q2, p2\n"
        f"schema_version: {SCHEMA_VERSION}\n"
        f"label: {json.dumps(str(label))}\n"
        f"units: {json.dumps(str(units))}\n"
        f"matrix:\n{rows}\n"
    )


def fmt(x):
    """Number format for CSV cells: 12 significant digits."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return "%.12g" % x


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_output(text, path=None):
    """Write ``text`` to ``path`` atomically, or to stdout when ``path`` is None or '-'."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
