"""Lattice acoustic filter toolkit: design, simulation, matching and mBVD extraction."""

import json as _json

from ._core import (
    XlatError,
    conjugate_match,
    fit,
    match_sweep,
    metrics,
    optimize,
    read_touchstone,
    resonator_admittance,
    rollett_k,
    simulate,
    write_touchstone,
)

__all__ = [
    "XlatError",
    "conjugate_match",
    "fit",
    "match_sweep",
    "metrics",
    "optimize",
    "read_touchstone",
    "resonator_admittance",
    "rollett_k",
    "simulate",
    "write_touchstone",
    "as_json",
]


def as_json(doc):
    """Accept a dict, a JSON string, or a path-like to a JSON file."""
    if isinstance(doc, dict):
        return _json.dumps(doc)
    text = str(doc)
    if text.lstrip().startswith("{"):
        return text
    with open(text, encoding="utf-8") as fh:
        return fh.read()
