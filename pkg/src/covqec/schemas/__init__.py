"""JSON schemas shipped with the package and a thin validation wrapper."""
from __future__ import annotations

import functools
import json
from importlib import resources

import jsonschema

NAMES = ("channel", "code", "report", "sdp", "rows")


class SchemaError(ValueError):
    """Raised when a document does not match its schema."""


@functools.lru_cache(maxsize=None)
def load(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    return json.loads(resources.files(__name__).joinpath(f"{name}.json").read_text())


def validate(doc, name: str) -> None:
    try:
        jsonschema.validate(doc, load(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{name} descriptor invalid at {path}: {exc.message}") from None
