"""File formats and deterministic report serialization.

All reports are JSON with sorted keys and floats printed to 17
significant digits, so byte-identical inputs (plus seed) produce
byte-identical report files; golden-file tests depend on this.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from .errors import SpecValidationError
from .groups import FiniteGroup
from .reps import UnitaryRep


# ---------------------------------------------------------------------------
# canonical JSON


def _format_float(x: float) -> str:
    if not np.isfinite(x):
        raise SpecValidationError(f"non-finite value {x!r} in report")
    return format(float(x) + 0.0, ".17g")


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_format_float(obj.real)}, {_format_float(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj.keys()):
            if not isinstance(key, str):
                raise SpecValidationError(f"non-string report key {key!r}")
            items.append(f"{json.dumps(key)}: {_encode(obj[key])}")
        return "{" + ", ".join(items) + "}"
    raise SpecValidationError(f"cannot serialize {type(obj).__name__} into a report")


def dumps_canonical(obj) -> str:
    return _encode(obj) + "\n"


def write_atomic(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_of_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# matrices


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(v.real), float(v.imag)] for v in m.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or set(obj) != {"rows", "cols", "entries"}:
        raise SpecValidationError(
            'matrix object must have exactly the fields "rows", "cols", "entries"'
        )
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if len(entries) != rows * cols:
        raise SpecValidationError(
            f"matrix has {len(entries)} entries, expected {rows * cols}"
        )
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return flat.reshape(rows, cols)


# ---------------------------------------------------------------------------
# groups


def group_to_json(group: FiniteGroup) -> dict:
    obj = {"order": group.order, "mult_table": group.mult.tolist()}
    if group.labels is not None:
        obj["labels"] = list(group.labels)
    return obj


def group_from_json(obj) -> FiniteGroup:
    if not isinstance(obj, dict):
        raise SpecValidationError("group object must be a JSON object")
    allowed = {"order", "mult_table", "labels"}
    extra = set(obj) - allowed
    if extra:
        raise SpecValidationError(f"unknown group fields: {sorted(extra)}")
    if "mult_table" not in obj:
        raise SpecValidationError('group object needs a "mult_table"')
    table = obj["mult_table"]
    if "order" in obj and int(obj["order"]) != len(table):
        raise SpecValidationError("declared order does not match the table size")
    return FiniteGroup(table, labels=obj.get("labels"))


# ---------------------------------------------------------------------------
# representations


def rep_to_json(rep: UnitaryRep, inline_group: bool = True) -> dict:
    mats = [
        [[[float(v.real), float(v.imag)] for v in row] for row in m]
        for m in rep.matrices
    ]
    obj = {"dim": rep.dim, "matrices": mats}
    if inline_group:
        obj["group"] = group_to_json(rep.group)
    return obj


def irrep_table_to_json(table) -> dict:
    """Characters and matrices of every irreducible, canonically ordered."""
    return {
        "dims": list(table.dims),
        "characters": [
            [[float(c.real), float(c.imag)] for c in chi]
            for chi in table.characters
        ],
        "matrices": [
            [[[[float(v.real), float(v.imag)] for v in row] for row in m]
             for m in rep.matrices]
            for rep in table.irreps
        ],
    }


def algebra_to_json(algebra, structure=None) -> dict:
    """Basis matrices plus an optional block-structure summary."""
    obj = {
        "ambient_dim": algebra.ambient_dim,
        "dim": algebra.dim,
        "basis": [matrix_to_json(b) for b in algebra.basis],
    }
    if structure is not None:
        obj["block_structure"] = [[int(n), int(m)] for n, m in structure.blocks]
    return obj


def rep_from_json(obj, resolve_path=None) -> UnitaryRep:
    if not isinstance(obj, dict):
        raise SpecValidationError("representation object must be a JSON object")
    allowed = {"group", "dim", "matrices"}
    extra = set(obj) - allowed
    if extra:
        raise SpecValidationError(f"unknown representation fields: {sorted(extra)}")
    group_field = obj.get("group")
    if isinstance(group_field, str):
        if resolve_path is None:
            raise SpecValidationError("cannot resolve a group file path here")
        with open(resolve_path(group_field)) as fh:
            group = group_from_json(json.load(fh))
    else:
        group = group_from_json(group_field)
    dim = int(obj["dim"])
    mats = np.array(
        [[[complex(re, im) for re, im in row] for row in m] for m in obj["matrices"]],
        dtype=np.complex128,
    )
    if mats.shape != (group.order, dim, dim):
        raise SpecValidationError(
            f"matrices have shape {mats.shape}, expected {(group.order, dim, dim)}"
        )
    return UnitaryRep(group, mats)
