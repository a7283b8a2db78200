"""Static R-tree packed with sort-tile-recursive bulk loading.

Entries are axis-aligned rectangles; intersection tests are closed, so
rectangles sharing only an edge or corner still match.  The tree is built
once from the full entry list, which fits the tiling use case where the
set of tiles never changes after enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise InvalidArgumentError(f"rect has negative extent: {self}")

    def intersects(self, other: "Rect") -> bool:
        return (
            self.x0 <= other.x1
            and other.x0 <= self.x1
            and self.y0 <= other.y1
            and other.y0 <= self.y1
        )

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)


def _bbox(rects: list[Rect]) -> Rect:
    return Rect(
        min(r.x0 for r in rects),
        min(r.y0 for r in rects),
        max(r.x1 for r in rects),
        max(r.y1 for r in rects),
    )


class _Node:
    __slots__ = ("bbox", "children", "entries")

    def __init__(self, bbox: Rect, children=None, entries=None):
        self.bbox = bbox
        self.children = children
        self.entries = entries


def _pack_level(items: list[tuple[Rect, object]], capacity: int) -> list[tuple[Rect, list]]:
    """Group items into up to-capacity chunks by the STR slab ordering."""
    count = len(items)
    n_groups = math.ceil(count / capacity)
    n_slabs = math.ceil(math.sqrt(n_groups))
    slab_size = n_slabs * capacity
    by_x = sorted(items, key=lambda it: it[0].center[0])
    groups = []
    for i in range(0, count, slab_size):
        slab = sorted(by_x[i : i + slab_size], key=lambda it: it[0].center[1])
        for j in range(0, len(slab), capacity):
            chunk = slab[j : j + capacity]
            groups.append((_bbox([c[0] for c in chunk]), [c[1] for c in chunk]))
    return groups


class RTree:
    """Immutable R-tree over an indexed list of rectangles."""

    def __init__(self, rects: list[Rect], capacity: int = 16):
        if capacity < 2:
            raise InvalidArgumentError(f"capacity must be >= 2, got {capacity}")
        self.rects = list(rects)
        self.capacity = capacity
        self._root = self._build(self.rects)

    def _build(self, rects: list[Rect]) -> _Node | None:
        if not rects:
            return None
        leaves = [
            _Node(bbox, entries=idxs)
            for bbox, idxs in _pack_level(list(zip(rects, range(len(rects)))), self.capacity)
        ]
        level = leaves
        while len(level) > 1:
            packed = _pack_level([(n.bbox, n) for n in level], self.capacity)
            level = [_Node(bbox, children=nodes) for bbox, nodes in packed]
        return level[0]

    def query(self, rect: Rect) -> list[int]:
        """Indices of all entry rectangles intersecting `rect`, in entry order."""
        if self._root is None:
            return []
        out: list[int] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if not node.bbox.intersects(rect):
                continue
            if node.entries is not None:
                for idx in node.entries:
                    if self.rects[idx].intersects(rect):
                        out.append(idx)
            else:
                stack.extend(node.children)
        out.sort()
        return out

    def __len__(self) -> int:
        return len(self.rects)
