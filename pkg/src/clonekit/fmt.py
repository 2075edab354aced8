"""Canonical text format for structures and operations.

A structure is a JSON object ``{"domain": n, "relations": {name: {"arity": k,
"tuples": [[...], ...]}}}``; an operation is ``{"domain": n, "arity": k,
"table": [...]}`` with the table in mixed-radix order (first argument most
significant).  Serialization is deterministic: relations keep structure
order, tuples are emitted sorted, and whitespace is fixed, so equal objects
produce identical bytes.

Parsers reject malformed documents with an error message naming the JSON
path of the offending entry.
"""

from __future__ import annotations

import json
from typing import Any

from .core import Domain, Operation, Relation, Structure
from .errors import InputFormatError


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise InputFormatError(f"{path}: {msg}")


def _as_int(value: Any, path: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), path, "expected an integer")
    return value


def structure_from_obj(obj: Any, path: str = "$") -> Structure:
    _expect(isinstance(obj, dict), path, "expected an object")
    _expect("domain" in obj, path, "missing key 'domain'")
    _expect("relations" in obj, path, "missing key 'relations'")
    extra = set(obj) - {"domain", "relations"}
    _expect(not extra, path, f"unexpected keys {sorted(extra)}")
    n = _as_int(obj["domain"], f"{path}.domain")
    _expect(n >= 1, f"{path}.domain", "domain size must be >= 1")
    rels_obj = obj["relations"]
    _expect(isinstance(rels_obj, dict), f"{path}.relations", "expected an object")
    rels = []
    for name, rel_obj in rels_obj.items():
        rpath = f"{path}.relations.{name}"
        _expect(isinstance(rel_obj, dict), rpath, "expected an object")
        _expect("arity" in rel_obj, rpath, "missing key 'arity'")
        _expect("tuples" in rel_obj, rpath, "missing key 'tuples'")
        extra = set(rel_obj) - {"arity", "tuples"}
        _expect(not extra, rpath, f"unexpected keys {sorted(extra)}")
        k = _as_int(rel_obj["arity"], f"{rpath}.arity")
        _expect(k >= 1, f"{rpath}.arity", "arity must be >= 1")
        tuples_obj = rel_obj["tuples"]
        _expect(isinstance(tuples_obj, list), f"{rpath}.tuples", "expected a list")
        tuples = []
        for i, t in enumerate(tuples_obj):
            tpath = f"{rpath}.tuples[{i}]"
            _expect(isinstance(t, list), tpath, "expected a list")
            _expect(len(t) == k, tpath, f"expected {k} entries, got {len(t)}")
            vals = []
            for j, v in enumerate(t):
                v = _as_int(v, f"{tpath}[{j}]")
                _expect(0 <= v < n, f"{tpath}[{j}]", f"value {v} outside domain of size {n}")
                vals.append(v)
            tuples.append(tuple(vals))
        rels.append((name, Relation.from_tuples(Domain(n), k, tuples)))
    try:
        return Structure(Domain(n), tuple(rels))
    except Exception as exc:  # domain bound etc.
        raise InputFormatError(f"{path}: {exc}") from exc


def operation_from_obj(obj: Any, path: str = "$") -> Operation:
    _expect(isinstance(obj, dict), path, "expected an object")
    for key in ("domain", "arity", "table"):
        _expect(key in obj, path, f"missing key '{key}'")
    extra = set(obj) - {"domain", "arity", "table"}
    _expect(not extra, path, f"unexpected keys {sorted(extra)}")
    n = _as_int(obj["domain"], f"{path}.domain")
    k = _as_int(obj["arity"], f"{path}.arity")
    _expect(n >= 1, f"{path}.domain", "domain size must be >= 1")
    _expect(k >= 1, f"{path}.arity", "arity must be >= 1")
    table_obj = obj["table"]
    _expect(isinstance(table_obj, list), f"{path}.table", "expected a list")
    _expect(
        len(table_obj) == n**k,
        f"{path}.table",
        f"expected {n**k} entries for domain {n} arity {k}, got {len(table_obj)}",
    )
    table = []
    for i, v in enumerate(table_obj):
        v = _as_int(v, f"{path}.table[{i}]")
        _expect(0 <= v < n, f"{path}.table[{i}]", f"value {v} outside domain of size {n}")
        table.append(v)
    try:
        return Operation.from_table(Domain(n), k, table)
    except Exception as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def structure_loads(text: str) -> Structure:
    return structure_from_obj(_loads(text))


def operation_loads(text: str) -> Operation:
    return operation_from_obj(_loads(text))


def structure_to_obj(s: Structure) -> dict:
    return {
        "domain": s.domain.size,
        "relations": {
            name: {"arity": r.arity, "tuples": [list(t) for t in r.tuples()]}
            for name, r in s.relations
        },
    }


def operation_to_obj(f: Operation) -> dict:
    return {
        "domain": f.domain.size,
        "arity": f.arity,
        "table": [int(v) for v in f.table],
    }


def structure_dumps(s: Structure) -> str:
    return json.dumps(structure_to_obj(s), indent=2) + "\n"


def operation_dumps(f: Operation) -> str:
    return json.dumps(operation_to_obj(f), indent=2) + "\n"


def load_structure(path: str) -> Structure:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return structure_loads(text)
    except InputFormatError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def load_operation(path: str) -> Operation:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return operation_loads(text)
    except InputFormatError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
