"""File formats: JSONL permutation datasets and schema-checked JSON documents.

All JSON is written with sorted keys and a trailing newline so identical
content gives identical bytes.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .perm_core import Permutation


class ParseError(ValueError):
    def __init__(self, path, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = str(path)
        self.line = line


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Permutation):
        return o.to_list()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=False) + "\n"


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("robust_mallows").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(obj: Any, schema: str) -> None:
    jsonschema.validate(json.loads(json.dumps(obj, default=_default)), load_schema(schema))


def write_json(path, obj: Any, schema: str | None = None) -> None:
    if schema is not None:
        validate(obj, schema)
    Path(path).write_text(dumps(obj))


def read_json(path, schema: str | None = None) -> Any:
    p = Path(path)
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ParseError(p, err.lineno, err.msg) from None
    if schema is not None:
        validate(obj, schema)
    return obj


def write_permutations(path, samples: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row in np.asarray(samples):
            fh.write(json.dumps([int(x) for x in row]) + "\n")


def read_permutations(path) -> np.ndarray:
    """Read a JSONL dataset, one permutation per line; blank lines are skipped."""
    rows = []
    n = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as err:
                raise ParseError(path, lineno, err.msg) from None
            if not isinstance(row, list) or not all(isinstance(x, int) for x in row):
                raise ParseError(path, lineno, "expected a JSON list of integers")
            try:
                Permutation(row)
            except ValueError as err:
                raise ParseError(path, lineno, str(err)) from None
            if n is None:
                n = len(row)
            elif len(row) != n:
                raise ParseError(path, lineno, f"length {len(row)} differs from first line ({n})")
            rows.append(row)
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def sidecar_path(path, suffix: str) -> Path:
    """``data.jsonl`` -> ``data.<suffix>.json``."""
    p = Path(path)
    stem = p.name[: -len(".jsonl")] if p.name.endswith(".jsonl") else p.stem
    return p.with_name(f"{stem}.{suffix}.json")
