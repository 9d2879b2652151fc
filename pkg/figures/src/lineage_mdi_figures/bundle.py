"""Report-bundle loading and per-figure schema validation.

The bundle is the single JSON document produced by the analysis pipeline.
Every figure kind declares the table paths it needs; a missing path is a
named schema error before any rendering starts, while a present-but-empty
table renders as an annotated empty frame.
"""

from __future__ import annotations

import json
from pathlib import Path


class SchemaError(ValueError):
    """The bundle lacks a table required by the requested figure kind."""


REQUIRED_TABLES: dict[str, tuple[str, ...]] = {
    "degree-distribution": ("degree_distributions",),
    "wcc-sizes": ("wcc",),
    "mdi-histogram": ("mdi",),
    "scatter-lowess": ("trend",),
    "scale-violin": ("scale_groups",),
    "strategy-raincloud": ("relation_groups",),
    "monthly-trend": ("temporal.monthly",),
    "period-ridge": ("temporal.periods",),
    "window-density": ("temporal.window_sensitivity",),
}

FIGURE_KINDS = tuple(REQUIRED_TABLES)


def load_bundle(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        bundle = json.load(fh)
    if not isinstance(bundle, dict):
        raise SchemaError(f"{path}: bundle must be a JSON object")
    return bundle


def _lookup(bundle: dict, dotted: str):
    node = bundle
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise KeyError(dotted)
        node = node[part]
    return node


def validate(bundle: dict, kind: str) -> None:
    """Raise :class:`SchemaError` naming the first missing table."""
    if kind not in REQUIRED_TABLES:
        raise SchemaError(
            f"unknown figure kind {kind!r}; expected one of {', '.join(FIGURE_KINDS)}"
        )
    for dotted in REQUIRED_TABLES[kind]:
        try:
            _lookup(bundle, dotted)
        except KeyError:
            raise SchemaError(
                f"bundle is missing table {dotted!r} required by {kind!r}"
            ) from None


def table(bundle: dict, dotted: str, default=None):
    try:
        value = _lookup(bundle, dotted)
    except KeyError:
        return default
    return default if value is None else value


def sha256_of(path) -> str:
    import hashlib

    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
