"""9-ary prefix tree over direction symbols with per-node finisher lists.

A trie holds distribution strings of one fixed cardinality k; a node at
depth d*k finishes describing a level-d distribution and carries the ids
of the point sets that stored it.
"""

from __future__ import annotations

from typing import Iterator, Sequence

from .encoding import Direction, DistributionString


class BlockSizeError(ValueError):
    pass


class TrieFormatError(ValueError):
    pass


class TrieNode:
    __slots__ = ("children", "depth", "finishers")

    def __init__(self, depth: int):
        self.children: dict[int, TrieNode] = {}
        self.depth = depth
        self.finishers: list[str] = []


class Trie:
    def __init__(self, cardinality: int, max_level: int):
        if cardinality < 1:
            raise ValueError("cardinality must be >= 1")
        self.cardinality = cardinality
        self.max_level = max_level
        self.root = TrieNode(0)

    # -- low-level building blocks (shared with the bulk index builders) --

    def extend(self, node: TrieNode, symbols: Sequence[int]) -> TrieNode:
        """Walk from ``node`` creating missing children; return the end node."""
        for sym in symbols:
            child = node.children.get(sym)
            if child is None:
                child = TrieNode(node.depth + 1)
                node.children[int(sym)] = child
            node = child
        return node

    @staticmethod
    def add_finisher(node: TrieNode, owner: str) -> None:
        if owner not in node.finishers:
            node.finishers.append(owner)

    # -- public operations --

    def insert(self, s: DistributionString | Sequence[int], owner: str) -> None:
        """Insert a distribution string, marking ``owner`` at every block boundary."""
        if isinstance(s, DistributionString):
            if s.size != self.cardinality:
                raise BlockSizeError(
                    f"string block size {s.size} != trie cardinality {self.cardinality}"
                )
            symbols: Sequence[int] = s.symbols
        else:
            symbols = s
        if len(symbols) % self.cardinality != 0:
            raise BlockSizeError(
                f"string length {len(symbols)} is not a multiple of {self.cardinality}"
            )
        if len(symbols) // self.cardinality > self.max_level:
            raise BlockSizeError(
                f"string deeper than max level {self.max_level}"
            )
        node = self.root
        k = self.cardinality
        for start in range(0, len(symbols), k):
            node = self.extend(node, symbols[start : start + k])
            self.add_finisher(node, owner)

    def walk(self, symbols: Sequence[int], start: TrieNode | None = None
             ) -> tuple[TrieNode, int]:
        """Follow children greedily; return the deepest node and symbols consumed."""
        node = self.root if start is None else start
        consumed = 0
        for sym in symbols:
            child = node.children.get(sym)
            if child is None:
                break
            node = child
            consumed += 1
        return node, consumed

    @staticmethod
    def children_with_states(node: TrieNode) -> list[tuple[Direction, TrieNode]]:
        """Child edges in the declared symbol order."""
        return [
            (Direction(sym), node.children[sym]) for sym in sorted(node.children)
        ]

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children.values())
        return count

    def iter_nodes(self) -> Iterator[TrieNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children.values())

    # -- persistence --
    #
    # Byte layout (all varints are LEB128):
    #   varint cardinality, varint max_level, then the root node body.
    # Node body:
    #   varint finisher count, then each finisher id as varint byte length
    #   + UTF-8 bytes; then for each child in symbol order a symbol byte
    #   (0-8) followed by the child body; terminated by the 0xFF pop marker.

    POP = 0xFF

    def serialize(self) -> bytes:
        out = bytearray()
        _write_varint(out, self.cardinality)
        _write_varint(out, self.max_level)
        self._write_node(out, self.root)
        return bytes(out)

    def _write_node(self, out: bytearray, node: TrieNode) -> None:
        _write_varint(out, len(node.finishers))
        for fid in node.finishers:
            raw = fid.encode("utf-8")
            _write_varint(out, len(raw))
            out += raw
        for sym in sorted(node.children):
            out.append(sym)
            self._write_node(out, node.children[sym])
        out.append(self.POP)

    @classmethod
    def deserialize(cls, data: bytes) -> "Trie":
        view = memoryview(data)
        pos = 0
        cardinality, pos = _read_varint(view, pos)
        max_level, pos = _read_varint(view, pos)
        trie = cls(cardinality, max_level)
        pos = trie._read_node(view, pos, trie.root)
        if pos != len(data):
            raise TrieFormatError(f"trailing bytes after trie ({len(data) - pos})")
        return trie

    def _read_node(self, view: memoryview, pos: int, node: TrieNode) -> int:
        nfin, pos = _read_varint(view, pos)
        for _ in range(nfin):
            ln, pos = _read_varint(view, pos)
            node.finishers.append(bytes(view[pos : pos + ln]).decode("utf-8"))
            pos += ln
        while True:
            if pos >= len(view):
                raise TrieFormatError("truncated trie stream")
            b = view[pos]
            pos += 1
            if b == self.POP:
                return pos
            if b > 8:
                raise TrieFormatError(f"bad symbol byte {b}")
            child = TrieNode(node.depth + 1)
            node.children[b] = child
            pos = self._read_node(view, pos, child)


def _write_varint(out: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("varint must be non-negative")
    while True:
        b = value & 0x7F
        value >>= 7
        if value:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _read_varint(view: memoryview, pos: int) -> tuple[int, int]:
    shift = 0
    value = 0
    while True:
        if pos >= len(view):
            raise TrieFormatError("truncated varint")
        b = view[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7
