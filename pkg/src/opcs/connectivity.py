"""Connected-domain (CD) counting for +/-1 patterns.

A connected domain is a maximal 4-connected region of equal-valued pixels.
``count_cd`` uses a disjoint-set forest over the pixel grid; ``count_cd_oracle``
is a plain breadth-first flood fill kept separate for cross-checking.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from opcs.errors import InvalidArgumentError, InvalidDimensionError

GROUP_SIZE = 4

# nodes per union-find batch; bounds peak memory of count_cd_batch
_BATCH_NODES = 1 << 22


class GridUnionFind:
    """Disjoint-set forest over ``size`` nodes with array-wide operations.

    Unions are applied a whole edge list at a time: every root is hooked
    under the smallest root it is joined to, then all paths are compressed
    by pointer jumping.  Rounds repeat until no edge crosses two trees.
    """

    def __init__(self, size: int):
        self.parent = np.arange(size, dtype=np.int64)

    def compress(self) -> None:
        parent = self.parent
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                break
            parent = grand
        self.parent = parent

    def find(self, nodes: np.ndarray) -> np.ndarray:
        self.compress()
        return self.parent[nodes]

    def union_edges(self, u: np.ndarray, v: np.ndarray) -> None:
        while True:
            ru, rv = self.find(u), self.find(v)
            cross = ru != rv
            if not cross.any():
                return
            ru, rv = ru[cross], rv[cross]
            # roots only ever point to smaller roots, so no cycles form
            np.minimum.at(self.parent, np.maximum(ru, rv), np.minimum(ru, rv))
            u, v = u[cross], v[cross]

    def roots(self) -> np.ndarray:
        self.compress()
        return np.flatnonzero(self.parent == np.arange(self.parent.size))


def _grid_edges(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b, h, w = stack.shape
    idx = np.arange(b * h * w, dtype=np.int64).reshape(b, h, w)
    same_h = stack[:, :, :-1] == stack[:, :, 1:]
    same_v = stack[:, :-1, :] == stack[:, 1:, :]
    u = np.concatenate([idx[:, :, :-1][same_h], idx[:, :-1, :][same_v]])
    v = np.concatenate([idx[:, :, 1:][same_h], idx[:, 1:, :][same_v]])
    return u, v


def count_cd_batch(patterns) -> np.ndarray:
    """CD counts for a ``(k, h, w)`` stack of patterns."""
    stack = np.asarray(patterns)
    if stack.ndim != 3:
        raise InvalidDimensionError(f"expected a (k, h, w) stack, got shape {stack.shape}")
    k, h, w = stack.shape
    per = max(1, _BATCH_NODES // max(1, h * w))
    counts = np.empty(k, dtype=np.int64)
    for start in range(0, k, per):
        chunk = stack[start : start + per]
        uf = GridUnionFind(chunk.size)
        uf.union_edges(*_grid_edges(chunk))
        counts[start : start + len(chunk)] = np.bincount(uf.roots() // (h * w), minlength=len(chunk))
    return counts


def count_cd(pattern) -> int:
    x = np.asarray(pattern)
    if x.ndim != 2:
        raise InvalidDimensionError(f"pattern must be 2-D, got shape {x.shape}")
    return int(count_cd_batch(x[None])[0])


def count_cd_oracle(pattern) -> int:
    """Breadth-first flood fill; slow but independent of the union-find path."""
    grid = np.asarray(pattern).tolist()
    h = len(grid)
    w = len(grid[0]) if h else 0
    seen = [[False] * w for _ in range(h)]
    domains = 0
    for r0 in range(h):
        for c0 in range(w):
            if seen[r0][c0]:
                continue
            domains += 1
            value = grid[r0][c0]
            seen[r0][c0] = True
            queue = deque([(r0, c0)])
            while queue:
                r, c = queue.popleft()
                for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if 0 <= rr < h and 0 <= cc < w and not seen[rr][cc] and grid[rr][cc] == value:
                        seen[rr][cc] = True
                        queue.append((rr, cc))
    return domains


@dataclass(frozen=True)
class CdProfile:
    counts: tuple[int, ...]
    tied_pairs: tuple[int, ...]
    group_size: int = GROUP_SIZE

    def group_counts(self, i: int) -> tuple[int, ...]:
        return self.counts[GROUP_SIZE * (i - 1) : GROUP_SIZE * i]

    def is_group_monotone(self, i: int) -> bool:
        g = self.group_counts(i)
        return all(a <= b for a, b in zip(g, g[1:]))

    def non_monotone_groups(self) -> list[int]:
        return [i for i in range(1, len(self.counts) // GROUP_SIZE + 1) if not self.is_group_monotone(i)]


def cd_profile(basis, groups: tuple[int, int] | None = None) -> CdProfile:
    """Per-pattern CD counts plus groups whose 2nd and 3rd counts tie.

    ``groups`` is an inclusive 1-based ``(first, last)`` range restricting
    which groups are scanned for ties; counts always cover the whole basis.
    """
    pats = basis.patterns if hasattr(basis, "patterns") else np.asarray(basis)
    if len(pats) % GROUP_SIZE:
        raise InvalidArgumentError(f"basis length {len(pats)} is not a multiple of {GROUP_SIZE}")
    counts = count_cd_batch(pats)
    g = len(pats) // GROUP_SIZE
    first, last = groups if groups is not None else (1, g)
    if not 1 <= first <= last <= g:
        raise InvalidArgumentError(f"group range {groups} outside 1..{g}")
    tied = tuple(i for i in range(first, last + 1) if counts[4 * i - 3] == counts[4 * i - 2])
    return CdProfile(tuple(int(c) for c in counts), tied)


def write_profile_csv(profile: CdProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sequence_index", "group_index", "position_in_group", "cd_count"])
        for k, count in enumerate(profile.counts, start=1):
            writer.writerow([k, (k - 1) // GROUP_SIZE + 1, (k - 1) % GROUP_SIZE + 1, count])
