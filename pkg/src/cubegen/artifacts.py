"""Schema-validated, byte-deterministic JSON artifact emission."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

__all__ = ["load_schema", "validate_artifact", "dump_json", "write_json_artifact"]


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    ref = resources.files("cubegen.schemas").joinpath(f"{name}.schema.json")
    return json.loads(ref.read_text())


def validate_artifact(name: str, obj: dict) -> None:
    jsonschema.validate(obj, load_schema(name))


def dump_json(obj) -> str:
    """Canonical JSON text: sorted keys, fixed layout, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json_artifact(path, name: str, obj: dict) -> None:
    """Validate against the shipped schema, then write canonical bytes."""
    validate_artifact(name, obj)
    Path(path).write_text(dump_json(obj))
