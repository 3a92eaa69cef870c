"""Scenario files in, result tables out.

Scenario files are JSON checked against :data:`SIMULATE_SCHEMA` or
:data:`COMPARE_SCHEMA`.  Result tables are CSV with ``#`` comment lines
carrying run metadata, plus a JSON mirror holding the same rows.  Floats
are written with ``repr`` so the two forms round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from . import __version__

DIVERGES = "diverges: l*eps >= 1"

_CHANNEL = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "model": {"const": "iid"},
                "epsilon": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
            "required": ["model", "epsilon"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "model": {"const": "gilbert-elliott"},
                "pi_B": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "expected_burst": {"type": "number", "minimum": 1},
            },
            "required": ["model", "pi_B", "expected_burst"],
            "additionalProperties": False,
        },
    ]
}

_CODE = {
    "type": "object",
    "properties": {
        "variant": {"enum": ["stream", "group", "block"]},
        "l": {"type": "integer", "minimum": 2},
        "lg": {"type": "integer", "minimum": 2},
        "c": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "k": {"type": "integer", "minimum": 1},
    },
    "required": ["variant"],
    "additionalProperties": False,
}

_RUN = {
    "N": {"type": "integer", "minimum": 1},
    "mode": {"enum": ["open-loop", "closed-loop"]},
    "feedback_delay": {"type": "integer", "minimum": 0},
    "field_bits": {"type": "integer", "minimum": 1, "maximum": 16},
    "ideal_recovery": {"type": "boolean"},
    "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
    "replications": {"type": "integer", "minimum": 1},
    "engine": {"enum": ["auto", "vector", "codec"]},
    "payload_symbols": {"type": "integer", "minimum": 1},
    "tail_packets": {"type": "integer", "minimum": 0},
}

_OUTPUT = {
    "type": "object",
    "properties": {
        "slot_ms": {"type": "number", "exclusiveMinimum": 0},
        "bound": {"type": "boolean"},
    },
    "additionalProperties": False,
}

SIMULATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ldfec simulate scenario",
    "type": "object",
    "properties": {
        "code": _CODE,
        "channel": _CHANNEL,
        **_RUN,
        "sweep": {
            "type": "object",
            "properties": {
                "axis": {"enum": ["rate", "epsilon", "c", "block_size"]},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
            "required": ["axis", "values"],
            "additionalProperties": False,
        },
        "output": _OUTPUT,
    },
    "required": ["code", "channel", "N"],
    "additionalProperties": False,
}

COMPARE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ldfec compare scenario",
    "type": "object",
    "properties": {
        "rate": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "channel": _CHANNEL,
        **_RUN,
        "block_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "group_c": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "output": _OUTPUT,
    },
    "required": ["rate", "channel", "N"],
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    """Schema violation; ``path`` points at the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate_document(doc, schema: dict) -> dict:
    """Raise :class:`ScenarioError` for the most specific violation, else return ``doc``."""
    errors = list(jsonschema.Draft202012Validator(schema).iter_errors(doc))
    if not errors:
        return doc
    err = jsonschema.exceptions.best_match(errors)
    # oneOf failures hide the useful message in their context
    while err.context:
        err = jsonschema.exceptions.best_match(err.context)
    parts = list(err.absolute_path)
    if err.validator == "additionalProperties":
        known = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - known)
        if extra:
            parts.append(extra[0])
            return _raise(parts, "unknown key")
    return _raise(parts, err.message)


def _raise(parts, message):
    raise ScenarioError(_json_path(parts), message)


def load_document(path: str | Path, schema: dict) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON: {exc}") from None
    return validate_document(doc, schema)


def build_id() -> str:
    """``git describe`` of the source tree, or the package version outside a checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


@dataclass
class Table:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        # store cells as the CSV reader will see them so both mirrors agree
        self.rows.append({k: _parse(_fmt(v)) for k, v in row.items()})

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key}: {json.dumps(self.meta[key], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{c: _jsonable(r.get(c)) for c in self.columns} for r in self.rows]
        return json.dumps({"meta": self.meta, "columns": self.columns, "rows": rows}, indent=2, sort_keys=True)

    def write(self, out: str | Path | None) -> None:
        """CSV to ``out`` (stdout when None) and the JSON mirror next to it."""
        if out is None or str(out) == "-":
            print(self.to_csv(), end="")
            return
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.to_csv())
        out.with_suffix(".json").write_text(self.to_json() + "\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    for t in (int, float):
        try:
            return t(s)
        except ValueError:
            pass
    return s


def read_csv(text: str) -> Table:
    """Inverse of :meth:`Table.to_csv`."""
    lines = text.splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [{c: _parse(v) for c, v in zip(columns, rec)} for rec in reader]
    return Table(columns, rows, meta)


def read_json(text: str) -> Table:
    d = json.loads(text)
    rows = [{c: (float(v) if v in ("inf", "-inf", "nan") else v) for c, v in r.items()} for r in d["rows"]]
    return Table(d["columns"], rows, d["meta"])
