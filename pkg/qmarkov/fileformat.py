"""`.mm` marginal-set files and `.state` global-state files.

Both are compact, key-sorted JSON documents with a trailing newline. Matrices
travel as base64 of little-endian binary64 (re, im) pairs in row-major,
canonical site order, so a canonical file round-trips byte for byte.
"""

import base64
import binascii
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from qmarkov.config import config
from qmarkov.errors import DomainError, FileFormatError, InvalidStateError, MissingMarginalError, QMarkovError
from qmarkov.marginal_model import ClusterKey, Geometry, MarginalSet
from qmarkov.models import REPORT_FORMAT
from qmarkov.qdm_core import LocalState, canonical

logger = logging.getLogger(__name__)

ENCODING = "c128le-b64"
PathLike = Union[str, Path]


def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":")) + "\n"


def encode_matrix(matrix: np.ndarray) -> str:
    raw = np.ascontiguousarray(matrix, dtype="<c16").tobytes()
    return base64.b64encode(raw).decode("ascii")


def decode_matrix(payload: str, dim: int) -> np.ndarray:
    try:
        raw = base64.b64decode(payload.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError, AttributeError) as e:
        raise FileFormatError(f"payload is not valid base64: {e}") from e
    if len(raw) != dim * dim * 16:
        raise FileFormatError(f"payload holds {len(raw)} bytes, expected {dim * dim * 16} for dim {dim}")
    return np.frombuffer(raw, dtype="<c16").reshape(dim, dim).astype(complex)


def _geometry_document(g: Geometry) -> Dict[str, Any]:
    return {
        "cells": [{"label": list(label), "sites": list(sites)} for label, sites in g.cells],
        "clusters": [[list(label) for label in cluster] for cluster in g.clusters],
        "edges": [list(edge) for edge in g.edges],
        "layout": {"granularity": g.granularity, "kind": g.layout, "size": g.size},
        "nested": [{"cells": [list(label) for label in key.cells], "parent": key.index} for key in g.nested],
        "vertices": [list(vertex) for vertex in g.vertices],
    }


def _geometry_from(document: Dict[str, Any]) -> Geometry:
    layout = document["layout"]
    return Geometry(
        vertices=tuple((int(site), int(dim)) for site, dim in document["vertices"]),
        edges=tuple((int(u), int(v)) for u, v in document["edges"]),
        cells=tuple((tuple(cell["label"]), tuple(cell["sites"])) for cell in document["cells"]),
        clusters=tuple(tuple(tuple(label) for label in cluster) for cluster in document["clusters"]),
        nested=tuple(
            ClusterKey(int(entry["parent"]), tuple(tuple(label) for label in entry["cells"]))
            for entry in document["nested"]
        ),
        layout=str(layout["kind"]),
        size=int(layout["size"]),
        granularity=int(layout["granularity"]),
    )


def serialize_marginal_set(ms: MarginalSet) -> str:
    entries = []
    for index in sorted(ms.entries):
        state = ms.entries[index]
        entries.append({"cluster": index, "dim": state.dim, "encoding": ENCODING, "payload": encode_matrix(state.matrix)})
    return dumps(
        {
            "entries": entries,
            "format": REPORT_FORMAT,
            "geometry": _geometry_document(ms.geometry),
            "kind": "marginal-set",
        }
    )


def _load_json(text: str, kind: str) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"not a JSON document: {e}") from e
    if not isinstance(document, dict) or document.get("kind") != kind:
        raise FileFormatError(f"expected a '{kind}' document")
    if document.get("format") != REPORT_FORMAT:
        raise FileFormatError(f"unsupported format version {document.get('format')!r}")
    return document


def parse_marginal_set(text: str, tolerance: float = config.SANITIZE_TOLERANCE) -> MarginalSet:
    """Parse a `.mm` document.

    Raises:
        FileFormatError: malformed JSON, geometry or payload
        InvalidStateError: a decoded marginal is not a density operator on its cluster
    """
    document = _load_json(text, "marginal-set")
    try:
        g = _geometry_from(document["geometry"])
        raw_entries = [(int(e["cluster"]), int(e["dim"]), e["encoding"], e["payload"]) for e in document["entries"]]
    except (KeyError, TypeError, ValueError, DomainError) as e:
        raise FileFormatError(f"malformed marginal-set manifest: {e}") from e

    entries = {}
    for index, dim, encoding, payload in raw_entries:
        if encoding != ENCODING:
            raise FileFormatError(f"unsupported encoding '{encoding}'")
        if not 0 <= index < len(g.clusters):
            raise FileFormatError(f"entry for unknown cluster {index}")
        sites = g.cluster_sites(ClusterKey(index))
        dims = g.dims_of(sites)
        if dim != math.prod(dims):
            raise FileFormatError(f"cluster {index} has dim {dim}, its sites need {math.prod(dims)}")
        state = LocalState(sites, dims, decode_matrix(payload, dim))
        entries[index] = state.check_valid(tolerance)

    try:
        return MarginalSet(g, entries)
    except (DomainError, MissingMarginalError) as e:
        raise InvalidStateError(f"marginals do not match the geometry: {e}") from e


def serialize_state(state: LocalState) -> str:
    state = canonical(state)
    return dumps(
        {
            "dims": list(state.dims),
            "encoding": ENCODING,
            "format": REPORT_FORMAT,
            "kind": "state",
            "payload": encode_matrix(state.matrix),
            "support": list(state.support),
        }
    )


def parse_state(text: str, tolerance: float = config.SANITIZE_TOLERANCE) -> LocalState:
    document = _load_json(text, "state")
    try:
        support = tuple(int(site) for site in document["support"])
        dims = tuple(int(d) for d in document["dims"])
        encoding, payload = document["encoding"], document["payload"]
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"malformed state manifest: {e}") from e
    if encoding != ENCODING:
        raise FileFormatError(f"unsupported encoding '{encoding}'")
    if list(support) != sorted(support):
        raise FileFormatError("state support must be in ascending order")
    try:
        state = LocalState(support, dims, decode_matrix(payload, math.prod(dims)))
    except DomainError as e:
        raise FileFormatError(str(e)) from e
    return state.check_valid(tolerance)


def write_marginal_set(ms: MarginalSet, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(serialize_marginal_set(ms), encoding="ascii")
    logger.info(f"💾 Wrote {len(ms.entries)} marginals to {path}")
    return path


def read_marginal_set(path: PathLike) -> MarginalSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise FileFormatError(f"cannot read {path}: {e}") from e
    logger.info(f"📂 Loading marginal set from {path}")
    return parse_marginal_set(text)


def write_state(state: LocalState, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(serialize_state(state), encoding="ascii")
    logger.info(f"💾 Wrote global state on {len(state.support)} sites to {path}")
    return path


def read_state(path: PathLike) -> LocalState:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise FileFormatError(f"cannot read {path}: {e}") from e
    return parse_state(text)


__all__ = [
    "QMarkovError",
    "parse_marginal_set",
    "parse_state",
    "read_marginal_set",
    "read_state",
    "serialize_marginal_set",
    "serialize_state",
    "write_marginal_set",
    "write_state",
]
