"""On-disk index container: JSON header plus binary trie sections.

Layout:
  8-byte magic ``BTRIDX1\\n``
  4-byte big-endian header length
  UTF-8 JSON header: kind, d_max, budget (multisnap only), the stored
      point sets, and a section table [{cardinality, nbytes}, ...]
  the serialized tries, concatenated in section-table order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

from .compact import CompactIndex
from .geometry import Point, PointSet
from .multisnap import MultiSnapIndex
from .trie import Trie

MAGIC = b"BTRIDX1\n"


class StorageError(ValueError):
    pass


def save_index(path: str | Path, index: CompactIndex | MultiSnapIndex) -> None:
    if isinstance(index, MultiSnapIndex):
        kind = "multisnap"
        extra = {"budget": index.budget}
    elif isinstance(index, CompactIndex):
        kind = "compact"
        extra = {}
    else:
        raise StorageError(f"unsupported index type {type(index).__name__}")
    blobs = [
        (k, index.tries[k].serialize()) for k in sorted(index.tries)
    ]
    header = {
        "kind": kind,
        "d_max": index.d_max,
        **extra,
        "sets": {
            ps.id: [[p.x, p.y] for p in ps.points]
            for ps in index.registry.values()
        },
        "sections": [
            {"cardinality": k, "nbytes": len(blob)} for k, blob in blobs
        ],
    }
    raw = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack(">I", len(raw)))
        fh.write(raw)
        for _, blob in blobs:
            fh.write(blob)


def load_index(path: str | Path) -> CompactIndex | MultiSnapIndex:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(MAGIC)] != MAGIC:
        raise StorageError(f"{path}: bad magic, not an index file")
    pos = len(MAGIC)
    if len(data) < pos + 4:
        raise StorageError(f"{path}: truncated header length")
    (hlen,) = struct.unpack(">I", data[pos : pos + 4])
    pos += 4
    try:
        header = json.loads(data[pos : pos + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StorageError(f"{path}: bad header: {exc}") from exc
    pos += hlen

    kind = header.get("kind")
    d_max = header.get("d_max")
    if kind not in ("compact", "multisnap") or not isinstance(d_max, int):
        raise StorageError(f"{path}: invalid header fields")
    if kind == "multisnap":
        index: CompactIndex | MultiSnapIndex = MultiSnapIndex(
            d_max=d_max, budget=header.get("budget", 0) or 10**6
        )
    else:
        index = CompactIndex(d_max=d_max)

    for section in header.get("sections", []):
        k = section["cardinality"]
        nbytes = section["nbytes"]
        blob = data[pos : pos + nbytes]
        if len(blob) != nbytes:
            raise StorageError(f"{path}: truncated trie section (k={k})")
        pos += nbytes
        trie = Trie.deserialize(blob)
        if trie.cardinality != k:
            raise StorageError(
                f"{path}: section says cardinality {k}, trie says {trie.cardinality}"
            )
        index.tries[k] = trie
    if pos != len(data):
        raise StorageError(f"{path}: {len(data) - pos} trailing bytes")

    for set_id, coords in header.get("sets", {}).items():
        index.registry[set_id] = PointSet(
            set_id, tuple(Point(float(x), float(y)) for x, y in coords)
        )
    return index
