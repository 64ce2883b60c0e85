"""File formats: matrix JSON, metadata sidecars, CSV tables, run manifests.

All doubles are written with 17 significant digits so that reading a file
back recovers the exact values.  JSON is written by a small serializer
instead of :func:`json.dumps` because the latter prints the shortest repr.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInput
from .gallery import Metadata


def fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInput(f"non-finite value {x!r} cannot be serialized")
    s = "%.17g" % x
    if s == "-0":
        s = "0"
    return s


def _encode(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt(obj))
    elif isinstance(obj, (complex, np.complexfloating)):
        _encode([obj.real, obj.imag], out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic compact JSON with 17-digit floats and insertion-ordered keys."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def _reject_constant(name):
    raise InvalidInput(f"non-finite number {name} in JSON")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"malformed JSON: {e}") from None


# ---- matrices ---------------------------------------------------------------

def matrix_to_json(A) -> str:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput("matrix must be square")
    entries = [[float(z.real), float(z.imag)] for z in A.ravel()]
    return dumps({"dim": int(A.shape[0]), "entries": entries}) + "\n"


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidInput(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise InvalidInput(f"{where}: non-finite value")
    return v


def matrix_from_json(text: str) -> np.ndarray:
    doc = loads(text)
    if not isinstance(doc, dict) or set(doc) != {"dim", "entries"}:
        raise InvalidInput('matrix JSON must have exactly the keys "dim" and "entries"')
    n = doc["dim"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InvalidInput("dim must be a positive integer")
    entries = doc["entries"]
    if not isinstance(entries, list) or len(entries) != n * n:
        raise InvalidInput(f"entries must be a list of dim^2 = {n * n} pairs")
    A = np.empty(n * n, dtype=complex)
    for k, e in enumerate(entries):
        if not isinstance(e, list) or len(e) != 2:
            raise InvalidInput(f"entry {k} must be a [re, im] pair")
        A[k] = complex(_number(e[0], f"entry {k}"), _number(e[1], f"entry {k}"))
    return A.reshape(n, n)


def load_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}") from None
    return matrix_from_json(text)


def save_matrix(A, path) -> None:
    Path(path).write_text(matrix_to_json(A))


def matrix_hash(A) -> str:
    """sha256 of the canonical matrix JSON."""
    return hashlib.sha256(matrix_to_json(A).encode()).hexdigest()


# ---- metadata sidecar -------------------------------------------------------

def metadata_to_json(A, meta: Metadata) -> str:
    return dumps({"operator_hash": matrix_hash(A), "metadata": meta.to_dict()}) + "\n"


def save_metadata(A, meta: Metadata, path) -> None:
    Path(path).write_text(metadata_to_json(A, meta))


def load_metadata(path, A=None) -> Metadata:
    """Read a sidecar; with ``A`` given the stored hash must match it."""
    try:
        doc = loads(Path(path).read_text())
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}") from None
    if not isinstance(doc, dict) or "operator_hash" not in doc or "metadata" not in doc:
        raise InvalidInput("metadata sidecar needs operator_hash and metadata")
    if A is not None and doc["operator_hash"] != matrix_hash(A):
        raise InvalidInput("metadata sidecar belongs to a different operator")
    try:
        return Metadata.from_dict(doc["metadata"])
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"bad metadata: {e}") from None


def sidecar_path(path, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(p.name + suffix)


# ---- run manifest -----------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    input_hash: str
    tolerances: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict:
        return {"command": self.command, "input_hash": self.input_hash,
                "tolerances": dict(self.tolerances), "seeds": dict(self.seeds),
                "version": self.version}

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"


# ---- CSV tables -------------------------------------------------------------

BOUNDARY_HEADER = ("theta", "mu", "re_z", "im_z", "multiplicity", "segment_kind")
CURVES_HEADER = ("branch_id", "theta", "lambda", "lambda_prime", "re_point", "im_point",
                 "is_maximal")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def _table(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def boundary_rows(model) -> list[tuple]:
    return [(p.theta, p.mu, p.z.real, p.z.imag, p.multiplicity, p.kind) for p in model.points]


def boundary_csv(model) -> str:
    return _table(BOUNDARY_HEADER, boundary_rows(model))


def curves_csv(branches) -> str:
    from .curves import branches_to_rows

    return _table(CURVES_HEADER, branches_to_rows(branches))


def cloud_csv(points) -> str:
    return _table(("re", "im"), [(float(z.real), float(z.imag)) for z in points])


def _read_table(path, header) -> list[dict]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}") from None
    reader = csv.DictReader(_io.StringIO(text))
    if tuple(reader.fieldnames or ()) != header:
        raise InvalidInput(f"{path}: expected columns {','.join(header)}")
    return list(reader)


def read_boundary_csv(path) -> list[tuple]:
    out = []
    for k, r in enumerate(_read_table(path, BOUNDARY_HEADER)):
        try:
            out.append((float(r["theta"]), float(r["mu"]), float(r["re_z"]), float(r["im_z"]),
                        int(r["multiplicity"]), r["segment_kind"]))
        except (TypeError, ValueError):
            raise InvalidInput(f"{path}: bad row {k + 1}") from None
    return out


def read_curves_csv(path) -> list[tuple]:
    out = []
    for k, r in enumerate(_read_table(path, CURVES_HEADER)):
        try:
            out.append((int(r["branch_id"]), float(r["theta"]), float(r["lambda"]),
                        float(r["lambda_prime"]), float(r["re_point"]), float(r["im_point"]),
                        r["is_maximal"] == "true"))
        except (TypeError, ValueError):
            raise InvalidInput(f"{path}: bad row {k + 1}") from None
    return out
