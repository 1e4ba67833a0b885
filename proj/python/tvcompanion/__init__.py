"""Python bindings for the tvcompanion dialog core."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import _core
from ._core import ContractError, DataError, Resources

__all__ = [
    "ContractError",
    "DataError",
    "Resources",
    "generate",
    "load_resources",
    "similarity",
    "simulate",
    "stats",
    "stats_table",
    "wmd",
]

PathLike = Union[str, os.PathLike]


def load_resources(path: PathLike) -> Resources:
    """Load vectors, templates, word lists and corpora from a resources JSON file."""
    return _core.load_resources(os.fspath(path))


def wmd(resources: Resources, a: str, b: str) -> dict:
    """Word Mover's Distance between two texts.

    Returns ``distance``, ``similarity`` (1 / (1 + distance)), the ``relaxed``
    lower bound and the transport ``plan`` as ``[from, to, mass]`` triples.
    """
    return json.loads(_core.wmd_json(resources, a, b))


def similarity(distance: float) -> float:
    return _core.similarity(distance)


def generate(resources: Resources, keyword: str, kind: str = "disclosure") -> dict:
    """Realize the best-matching template of ``kind`` for ``keyword``."""
    return json.loads(_core.generate_json(resources, keyword, kind))


def simulate(
    scenario: PathLike,
    seed: Optional[int] = None,
    out: Optional[PathLike] = None,
    threshold: Optional[float] = None,
) -> dict:
    """Run a scenario file in logical time and return its transcript and stats."""
    return json.loads(
        _core.simulate_json(os.fspath(scenario), seed, os.fspath(out) if out else "", threshold)
    )


def stats(path: PathLike) -> dict:
    """Turn statistics for one JSONL transcript."""
    return json.loads(_core.stats_json(os.fspath(path)))


def stats_table(groups: Union[Mapping[str, PathLike], Iterable[Sequence]]) -> str:
    """Average/Maximum table with one column per (label, transcript path) group."""
    items = groups.items() if isinstance(groups, Mapping) else groups
    return _core.stats_table([(str(label), os.fspath(path)) for label, path in items])
