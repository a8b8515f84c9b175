"""JSON on-disk format for hypergraphs and sparsifiers.

A file is an object ``{"n": int, "edges": [{"v": [int, ...], "w": number},
...]}`` with an optional ``"meta"`` object carrying provenance; ``meta`` is
ignored when comparing hypergraphs.  Weights survive a round trip exactly
(shortest decimal representation that parses back to the same double).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .hypergraph import Hypergraph, validate


def to_dict(hg: Hypergraph) -> dict:
    doc: dict = {
        "n": hg.n,
        "edges": [{"v": list(e.vertices), "w": e.weight} for e in hg.edges],
    }
    if hg.meta:
        doc["meta"] = dict(hg.meta)
    return doc


def dumps(hg: Hypergraph) -> str:
    return json.dumps(to_dict(hg), indent=1)


def loads(text: str) -> Hypergraph:
    return validate(json.loads(text))


def save(hg: Hypergraph, path: str | Path) -> None:
    Path(path).write_text(dumps(hg) + "\n")


def load(path: str | Path) -> Hypergraph:
    return loads(Path(path).read_text())


def save_json(doc: Mapping, path: str | Path) -> None:
    """Write a generic JSON sidecar (run records, reports)."""
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")
