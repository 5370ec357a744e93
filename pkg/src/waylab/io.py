"""JSON formats for matrices, measurements, models, verdicts and search reports.

Matrices are ``{"rows": n, "cols": m, "data": [[re, im], ...]}`` in row-major
order. Floats are written with Python's shortest round-trip representation,
so a matrix written here parses back to bit-identical values. Parsers reject
wrong lengths and non-finite numbers, and every error names the offending
field path (for example ``h1.data[3]``).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from waylab.errors import WaylabError
from waylab.explorer import SearchReport
from waylab.measurement import KrausMeasurement, ProjectiveMeasurement
from waylab.operators import DEFAULT_TOL, ToleranceConfig
from waylab.verdict import Verdict
from waylab.way_model import AdditiveHamiltonian, SystemObservable


class SchemaError(WaylabError):
    """Malformed JSON text or a document that does not match the expected schema."""


# --- text level ---------------------------------------------------------------


def _reject_constant(name: str):
    raise SchemaError(f"non-finite number {name} is not allowed")


def loads(text: str, source: str = "<input>") -> Any:
    """Parse JSON text, reporting syntax errors with line and column.

    Raises:
        SchemaError: invalid JSON, or a ``NaN``/``Infinity`` literal.
    """
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except SchemaError as exc:
        raise SchemaError(f"{source}: {exc}") from None


def load_file(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# --- matrices -------------------------------------------------------------------


def _finite(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {type(x).__name__}")
    value = float(x)
    if not math.isfinite(value):
        raise SchemaError(f"{path}: non-finite number")
    return value


def _entry(x, path: str) -> complex:
    """A complex entry given as ``[re, im]`` or as a bare real number."""
    if isinstance(x, list):
        if len(x) != 2:
            raise SchemaError(f"{path}: expected [re, im], got a list of length {len(x)}")
        return complex(_finite(x[0], f"{path}[0]"), _finite(x[1], f"{path}[1]"))
    return complex(_finite(x, path), 0.0)


def _positive_int(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise SchemaError(f"{path}: expected a positive integer, got {x!r}")
    return x


def _require_object(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _field(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"{path}: missing field {key!r}")
    return obj[key]


def matrix_to_json(a) -> dict:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj, path: str = "matrix") -> np.ndarray:
    """Parse the matrix format.

    Raises:
        SchemaError: missing fields, non-positive sizes, a ``data`` length
            other than ``rows * cols``, or non-finite entries.
    """
    obj = _require_object(obj, path)
    rows = _positive_int(_field(obj, "rows", path), f"{path}.rows")
    cols = _positive_int(_field(obj, "cols", path), f"{path}.cols")
    data = _field(obj, "data", path)
    if not isinstance(data, list):
        raise SchemaError(f"{path}.data: expected a list")
    if len(data) != rows * cols:
        raise SchemaError(f"{path}.data: expected {rows * cols} entries for a {rows}x{cols} matrix, got {len(data)}")
    values = [_entry(x, f"{path}.data[{i}]") for i, x in enumerate(data)]
    return np.array(values, dtype=complex).reshape(rows, cols)


def vector_from_json(obj, path: str = "vector") -> np.ndarray:
    """A vector as a one-row or one-column matrix, or a list of numbers / ``[re, im]`` pairs."""
    if isinstance(obj, dict):
        m = matrix_from_json(obj, path)
        if 1 not in m.shape:
            raise SchemaError(f"{path}: expected a single row or column, got shape {m.shape}")
        return m.reshape(-1)
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{path}: expected a nonempty list or a matrix object")
    return np.array([_entry(x, f"{path}[{i}]") for i, x in enumerate(obj)], dtype=complex)


# --- measurements ---------------------------------------------------------------


def measurement_to_json(m: KrausMeasurement) -> dict:
    return {"kind": m.kind, "operators": [matrix_to_json(op) for op in m.operators]}


def measurement_from_json(obj, path: str = "measurement") -> KrausMeasurement:
    obj = _require_object(obj, path)
    ops = _field(obj, "operators", path)
    if not isinstance(ops, list) or not ops:
        raise SchemaError(f"{path}.operators: expected a nonempty list")
    kind = obj.get("kind", "kraus")
    if kind not in ("kraus", "projective"):
        raise SchemaError(f"{path}.kind: expected 'kraus' or 'projective', got {kind!r}")
    mats = [matrix_from_json(op, f"{path}.operators[{i}]") for i, op in enumerate(ops)]
    cls = ProjectiveMeasurement if kind == "projective" else KrausMeasurement
    return cls(mats)


# --- verdicts and reports ---------------------------------------------------------


def to_plain(value):
    """Convert facts to JSON-compatible values; non-finite floats become ``None``."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def verdict_to_json(v: Verdict) -> dict:
    return {
        "pass": v.passed,
        "defects": to_plain(v.defects),
        "checks": [
            {
                "name": c.name,
                "defect": to_plain(c.defect),
                "threshold": c.threshold,
                "passed": c.passed,
                "description": c.description,
            }
            for c in v.checks
        ],
        "facts": to_plain(v.facts),
        "witnesses": [{"name": name, **matrix_to_json(m)} for name, m in v.witnesses],
    }


def report_to_json(r: SearchReport) -> dict:
    return {
        "config": dataclasses.asdict(r.config),
        "classification": r.classification,
        "reverified": r.reverified,
        "defects": {
            "conservation": r.conservation_defect,
            "commutation": r.commutation_defect,
            "initial_conservation": r.initial_conservation_defect,
        },
        "iterations": r.iterations,
        "accepted_steps": r.accepted_steps,
        "measurement": measurement_to_json(r.best_measurement),
    }


# --- models -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelInput:
    """Everything a model document can carry; absent fields are ``None``."""

    system: SystemObservable
    apparatus_dim: int | None = None
    hamiltonian: AdditiveHamiltonian | None = None
    xi: np.ndarray | None = None
    h1: np.ndarray | None = None
    h2: np.ndarray | None = None
    h_sa: np.ndarray | None = None
    h_s: np.ndarray | None = None
    h_a: np.ndarray | None = None


def system_from_json(obj, path: str = "system", tol: ToleranceConfig = DEFAULT_TOL) -> SystemObservable:
    """Either ``{"operator": <matrix>}`` or ``{"eigenvalues": [...], "basis_blocks": [[vec, ...], ...]}``."""
    obj = _require_object(obj, path)
    if "operator" in obj:
        return SystemObservable.from_operator(matrix_from_json(obj["operator"], f"{path}.operator"), tol)
    eigenvalues = _field(obj, "eigenvalues", path)
    blocks = _field(obj, "basis_blocks", path)
    if not isinstance(eigenvalues, list) or not eigenvalues:
        raise SchemaError(f"{path}.eigenvalues: expected a nonempty list")
    if not isinstance(blocks, list) or len(blocks) != len(eigenvalues):
        raise SchemaError(f"{path}.basis_blocks: expected one block per eigenvalue")
    lams = [_finite(x, f"{path}.eigenvalues[{i}]") for i, x in enumerate(eigenvalues)]
    columns = []
    for k, block in enumerate(blocks):
        if not isinstance(block, list) or not block:
            raise SchemaError(f"{path}.basis_blocks[{k}]: expected a nonempty list of vectors")
        vecs = [vector_from_json(vec, f"{path}.basis_blocks[{k}][{j}]") for j, vec in enumerate(block)]
        if len({v.shape[0] for v in vecs}) != 1:
            raise SchemaError(f"{path}.basis_blocks[{k}]: vectors have different lengths")
        columns.append(np.stack(vecs, axis=1))
    return SystemObservable.from_blocks(lams, columns, tol)


def model_from_json(obj, path: str = "model", tol: ToleranceConfig = DEFAULT_TOL) -> ModelInput:
    obj = _require_object(obj, path)
    system = system_from_json(_field(obj, "system", path), f"{path}.system", tol)

    def optional_matrix(key):
        return matrix_from_json(obj[key], f"{path}.{key}") if key in obj else None

    apparatus_dim = obj.get("apparatus_dim")
    if apparatus_dim is not None:
        apparatus_dim = _positive_int(apparatus_dim, f"{path}.apparatus_dim")
    mats = {key: optional_matrix(key) for key in ("h1", "h2", "d1", "d2", "h_sa", "h_s", "h_a")}
    hamiltonian = None
    if "form" in obj:
        form = obj["form"]
        if not isinstance(form, str):
            raise SchemaError(f"{path}.form: expected a string")
        hamiltonian = AdditiveHamiltonian(form, mats["h1"], mats["h2"], mats["d1"], mats["d2"])
    xi = vector_from_json(obj["xi"], f"{path}.xi") if "xi" in obj else None
    return ModelInput(
        system=system,
        apparatus_dim=apparatus_dim,
        hamiltonian=hamiltonian,
        xi=xi,
        h1=mats["h1"],
        h2=mats["h2"],
        h_sa=mats["h_sa"],
        h_s=mats["h_s"],
        h_a=mats["h_a"],
    )
