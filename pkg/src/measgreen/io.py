"""JSON problem files and report serialization.

Complex numbers are written as ``[re, im]``; plain numbers are accepted on
input.  A problem file has the keys ``n``, ``a``, ``b``, ``J``, ``atoms``
(list of ``{"x", "dq", "dw"}``) and optionally ``gaps`` (list of
``{"Q", "W"}``), ``rhs`` (``{"atoms": N x n, "gaps": (N+1) x n}``) and
``boundary`` (list of coefficient rows over the deficiency bases).  Entries are
``[re, im]`` pairs; a bare number is accepted as a real scalar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import Atom, GapDensity, SystemSpec
from .propagate import RightHandSide


class ParseError(InputError):
    """Malformed problem document."""


def _scalar(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2 or not all(isinstance(t, (int, float)) for t in v):
            raise ParseError(f"complex number must be [re, im], got {v!r}")
        return complex(v[0], v[1])
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise ParseError(f"not a number: {v!r}")


def _walk(x):
    # a list of two plain numbers is a complex scalar; other lists recurse
    if isinstance(x, list):
        if len(x) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
            return complex(x[0], x[1])
        return [_walk(y) for y in x]
    return _scalar(x)


def complex_array(data, shape=None) -> np.ndarray:
    """Nested lists of ``[re, im]`` pairs (or bare real numbers) to an array.

    A list of exactly two plain numbers is always read as one complex
    number, so real vectors must also be written entrywise as pairs.
    """
    try:
        arr = np.array(_walk(data), dtype=complex)
    except ValueError as exc:
        raise ParseError(f"ragged array: {exc}") from exc
    if shape is not None and arr.shape != tuple(shape):
        raise ParseError(f"expected shape {tuple(shape)}, got {arr.shape}")
    return arr


def to_jsonable(x):
    """Convert arrays / complex numbers to JSON-ready nested lists."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


@dataclass(frozen=True, eq=False)
class Problem:
    spec: SystemSpec
    rhs: RightHandSide | None = None
    boundary: np.ndarray | None = None


def _matrix(obj, key, n, where):
    if key not in obj:
        return np.zeros((n, n), complex)
    try:
        return complex_array(obj[key], (n, n))
    except ParseError as exc:
        raise ParseError(f"{where}.{key}: {exc}") from exc


def problem_from_dict(doc: dict) -> Problem:
    if not isinstance(doc, dict):
        raise ParseError("problem must be a JSON object")
    for key in ("n", "a", "b", "J"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ParseError("n must be a positive integer")
    J = complex_array(doc["J"], (n, n))
    atoms = []
    for i, at in enumerate(doc.get("atoms", [])):
        if "x" not in at:
            raise ParseError(f"atoms[{i}] lacks x")
        atoms.append(Atom(float(at["x"]), _matrix(at, "dq", n, f"atoms[{i}]"),
                          _matrix(at, "dw", n, f"atoms[{i}]")))
    gaps = None
    if doc.get("gaps") is not None:
        gaps = tuple(GapDensity(_matrix(g, "Q", n, f"gaps[{j}]"), _matrix(g, "W", n, f"gaps[{j}]"))
                     for j, g in enumerate(doc["gaps"]))
    spec = SystemSpec(n, float(doc["a"]), float(doc["b"]), J, tuple(atoms), gaps)
    rhs = None
    if doc.get("rhs") is not None:
        r = doc["rhs"]
        N = len(atoms)
        at_vals = complex_array(r["atoms"], (N, n)) if "atoms" in r else np.zeros((N, n))
        gp_vals = complex_array(r["gaps"], (N + 1, n)) if "gaps" in r else np.zeros((N + 1, n))
        rhs = RightHandSide(gp_vals, at_vals)
    boundary = None
    if doc.get("boundary") is not None:
        rows = [np.atleast_1d(complex_array(row)) for row in doc["boundary"]]
        boundary = np.array(rows, dtype=complex) if rows else np.zeros((0, 0), complex)
    return Problem(spec, rhs, boundary)


def load_problem(path: str) -> Problem:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return problem_from_dict(doc)


def spec_to_dict(spec: SystemSpec) -> dict:
    doc = {
        "n": spec.n, "a": spec.a, "b": spec.b, "J": to_jsonable(spec.J),
        "atoms": [{"x": at.x, "dq": to_jsonable(at.dq), "dw": to_jsonable(at.dw)}
                  for at in spec.atoms],
    }
    if any(np.any(g.Qd) or np.any(g.Wd) for g in spec.gaps):
        doc["gaps"] = [{"Q": to_jsonable(g.Qd), "W": to_jsonable(g.Wd)} for g in spec.gaps]
    return doc


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys)."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)
