"""Checked-in JSON schemas for configs and instance files."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("lolab").joinpath(f"data/{name}.schema.json").read_text())


def validate(obj, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` when obj does not match the named schema."""
    jsonschema.validate(obj, load_schema(name))
