"""Origami pattern sequences, baseline orderings and measurement matrices.

Patterns are ``(p, p)`` int8 arrays over {+1, -1}.  A basis stores its n = p*p
patterns as one ``(n, p, p)`` array in display order.  Group and sequence
arithmetic is 1-based throughout: group ``i`` occupies sequence positions
``4(i-1)+1 .. 4i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard

from opcs.errors import BlockConstancyError, InvalidArgumentError, InvalidDimensionError


class Axis(enum.Enum):
    UP_DOWN = "up_down"
    LEFT_RIGHT = "left_right"
    BOTH = "both"


class SwapMode(enum.Enum):
    POST_REORDER = "post"
    INTERLEAVED = "interleaved"


class BaselineKind(enum.Enum):
    RANDOM_PM1 = "random"
    HADAMARD_NATURAL = "hadamard"
    CD_SORTED_HADAMARD = "cd-sorted"


ORIGAMI = "origami"


def is_power_of_two(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


def check_side(side: int) -> int:
    side = int(side)
    if side < 2 or not is_power_of_two(side):
        raise InvalidDimensionError(f"pattern side must be a power of two >= 2, got {side}")
    return side


def as_pattern(values) -> np.ndarray:
    """Validate a square +/-1 matrix and return it as an int8 array."""
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidDimensionError(f"pattern must be a square matrix, got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise InvalidArgumentError("pattern entries must be +1 or -1")
    return arr.astype(np.int8)


# -- Step 1: symmetric reverse folding ---------------------------------------


def fold(pattern, axis: Axis) -> np.ndarray:
    """Keep the upper (left) half and write its negated mirror into the other half.

    ``Axis.BOTH`` folds up-down and then left-right; the two single folds
    commute, so the order does not matter.
    """
    x = np.asarray(pattern)
    if x.ndim != 2 or x.shape[0] % 2 or x.shape[1] % 2:
        raise InvalidDimensionError(f"fold needs an even-sided pattern, got shape {x.shape}")
    axis = Axis(axis)
    if axis is Axis.BOTH:
        return fold(fold(x, Axis.UP_DOWN), Axis.LEFT_RIGHT)
    out = x.copy()
    if axis is Axis.UP_DOWN:
        h = x.shape[0] // 2
        out[h:] = -x[:h][::-1]
    else:
        h = x.shape[1] // 2
        out[:, h:] = -x[:, :h][:, ::-1]
    return out


# -- Step 2: half-scale mirror embedding --------------------------------------


def downscale_half(pattern) -> np.ndarray:
    """Decimate by two, requiring every aligned 2x2 block to be constant."""
    x = np.asarray(pattern)
    if x.ndim != 2 or x.shape[0] % 2 or x.shape[1] % 2:
        raise InvalidDimensionError(f"downscale needs an even-sided pattern, got shape {x.shape}")
    blocks = x.reshape(x.shape[0] // 2, 2, x.shape[1] // 2, 2)
    corner = blocks[:, :1, :, :1]
    if not np.all(blocks == corner):
        bad = np.argwhere(~np.all(blocks == corner, axis=(1, 3)))[0]
        raise BlockConstancyError(
            f"2x2 block at ({2 * bad[0]}, {2 * bad[1]}) is not constant; cannot halve exactly"
        )
    return corner[:, 0, :, 0].copy()


def embed_mirror(quadrant) -> np.ndarray:
    """Place ``quadrant`` top-left and mirror it (no sign change) across both midlines."""
    q = np.asarray(quadrant)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise InvalidDimensionError(f"quadrant must be square, got shape {q.shape}")
    top = np.hstack([q, q[:, ::-1]])
    return np.vstack([top, top[::-1]])


# -- Step 3: within-group order exchange -------------------------------------


def swap_id_set(group_count: int) -> frozenset[int]:
    """Groups (1-based) whose second and third patterns are exchanged.

    The groups are split into four quarters: the third quarter is always
    swapped, the second never, and the first and fourth quarters repeat the
    pattern of the recursion one level down.
    """
    g = int(group_count)
    if g < 1 or g & (g - 1) or (g.bit_length() - 1) % 2:
        raise InvalidArgumentError(f"group count must be a power of 4, got {group_count}")
    if g == 1:
        return frozenset()
    q = g // 4
    inner = swap_id_set(q)
    third = range(2 * q + 1, 3 * q + 1)
    return frozenset(inner) | frozenset(third) | frozenset(3 * q + s for s in inner)


# -- bases ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PatternBasis:
    """An ordered, complete sequence of +/-1 patterns.

    ``kind`` is ``"origami"`` or a ``BaselineKind`` value; ``swap_mode`` is
    only meaningful for origami bases.
    """

    side: int
    patterns: np.ndarray
    kind: str = ORIGAMI
    swap_mode: SwapMode | None = SwapMode.POST_REORDER
    swap_ids: frozenset[int] = field(default_factory=frozenset)
    seed: int | None = None

    def __post_init__(self):
        pats = np.asarray(self.patterns, dtype=np.int8)
        n = self.side * self.side
        if pats.shape != (n, self.side, self.side):
            raise InvalidDimensionError(
                f"basis of side {self.side} needs shape {(n, self.side, self.side)}, got {pats.shape}"
            )
        pats.setflags(write=False)
        object.__setattr__(self, "patterns", pats)

    @property
    def n(self) -> int:
        return self.side * self.side

    @property
    def group_count(self) -> int:
        return self.n // 4

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, index):
        return self.patterns[index]

    def pattern(self, position: int) -> np.ndarray:
        """Pattern at 1-based sequence ``position``."""
        if not 1 <= position <= self.n:
            raise InvalidArgumentError(f"position {position} outside 1..{self.n}")
        return self.patterns[position - 1]

    def group(self, i: int) -> np.ndarray:
        """The four patterns of 1-based group ``i``."""
        if not 1 <= i <= self.group_count:
            raise InvalidArgumentError(f"group {i} outside 1..{self.group_count}")
        return self.patterns[4 * (i - 1) : 4 * i]

    @property
    def identifier(self) -> str:
        ident = f"{self.kind}-p{self.side}"
        if self.kind == ORIGAMI and self.swap_mode is not None:
            ident += f"-{self.swap_mode.value}"
        if self.seed is not None:
            ident += f"-seed{self.seed}"
        return ident


def _origami_sequence(side: int, swap_mode: SwapMode | None) -> tuple[np.ndarray, frozenset[int]]:
    n = side * side
    groups = n // 4
    swaps = swap_id_set(groups)
    seq = np.empty((n, side, side), dtype=np.int8)
    for i in range(1, groups + 1):
        if i == 1:
            seed = np.ones((side, side), dtype=np.int8)
        else:
            # seed of group i is built from sequence position i
            seed = embed_mirror(downscale_half(seq[i - 1]))
        start = 4 * (i - 1)
        seq[start] = seed
        seq[start + 1] = fold(seed, Axis.UP_DOWN)
        seq[start + 2] = fold(seed, Axis.LEFT_RIGHT)
        seq[start + 3] = fold(seed, Axis.BOTH)
        if swap_mode is SwapMode.INTERLEAVED and i in swaps:
            seq[[start + 1, start + 2]] = seq[[start + 2, start + 1]]
    if swap_mode is SwapMode.POST_REORDER:
        for i in swaps:
            a = 4 * (i - 1) + 1
            seq[[a, a + 1]] = seq[[a + 1, a]]
    return seq, swaps


def generate_origami(side: int, swap_mode: SwapMode = SwapMode.POST_REORDER) -> PatternBasis:
    """Build the complete origami pattern sequence for a ``side x side`` scene.

    Each group is a seed followed by its up-down, left-right and double folds.
    The seed of group ``i >= 2`` is the ``i``-th pattern of the sequence,
    halved and mirror-embedded.  Groups listed by :func:`swap_id_set`
    exchange their second and third patterns, either after the whole sequence
    exists (``POST_REORDER``) or as each group completes (``INTERLEAVED``).
    """
    side = check_side(side)
    swap_mode = SwapMode(swap_mode)
    seq, swaps = _origami_sequence(side, swap_mode)
    return PatternBasis(side, seq, ORIGAMI, swap_mode, swaps)


def unswapped_origami(side: int) -> PatternBasis:
    """The sequence after folding and embedding only, before any exchange."""
    side = check_side(side)
    seq, _ = _origami_sequence(side, None)
    return PatternBasis(side, seq, ORIGAMI, None, frozenset())


def hadamard_patterns(side: int) -> np.ndarray:
    """Separable Sylvester-Hadamard patterns ``outer(H[r], H[c])`` in row-major (r, c) order."""
    h = hadamard(side).astype(np.int8)
    return np.einsum("ri,cj->rcij", h, h).reshape(side * side, side, side)


def _random_patterns(side: int, seed: int) -> np.ndarray:
    # one child stream per pattern so a prefix never depends on n
    n = side * side
    children = np.random.SeedSequence(seed).spawn(n)
    out = np.empty((n, side, side), dtype=np.int8)
    for k, child in enumerate(children):
        bits = np.random.default_rng(child).integers(0, 2, size=(side, side), dtype=np.int8)
        out[k] = 2 * bits - 1
    return out


def generate_baseline(side: int, kind: BaselineKind, seed: int = 0) -> PatternBasis:
    """Comparison orderings: seeded random +/-1, natural Hadamard, CD-sorted Hadamard."""
    from opcs.connectivity import count_cd_batch

    side = check_side(side)
    kind = BaselineKind(kind)
    if kind is BaselineKind.RANDOM_PM1:
        return PatternBasis(side, _random_patterns(side, seed), kind.value, None, frozenset(), int(seed))
    pats = hadamard_patterns(side)
    if kind is BaselineKind.CD_SORTED_HADAMARD:
        order = np.argsort(count_cd_batch(pats), kind="stable")
        pats = pats[order]
    return PatternBasis(side, pats, kind.value, None, frozenset())


def make_basis(side: int, order: str, seed: int = 0, swap_mode: SwapMode = SwapMode.POST_REORDER) -> PatternBasis:
    """Dispatch on an ordering name: ``origami`` or any ``BaselineKind`` value."""
    if order == ORIGAMI:
        return generate_origami(side, swap_mode)
    try:
        kind = BaselineKind(order)
    except ValueError:
        raise InvalidArgumentError(f"unknown ordering {order!r}") from None
    return generate_baseline(side, kind, seed)


# -- measurement matrices --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Row-major flattenings of the first ``rows`` patterns of a basis."""

    entries: np.ndarray
    source_order: str
    side: int

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def astype(self, dtype) -> np.ndarray:
        return self.entries.astype(dtype)


def flatten(basis: PatternBasis, m: int) -> MeasurementMatrix:
    if not 1 <= m <= basis.n:
        raise InvalidArgumentError(f"prefix length m={m} outside 1..{basis.n}")
    entries = basis.patterns[:m].reshape(m, basis.n)
    return MeasurementMatrix(entries, f"{basis.identifier}:m={m}", basis.side)


def prefix_length(ratio: float, n: int) -> int:
    """Number of measurements for a sampling ratio, rounded up."""
    if not 0 < ratio <= 1:
        raise InvalidArgumentError(f"sampling ratio must lie in (0, 1], got {ratio}")
    # guard float noise such as 0.025 * 16384 = 409.6000000000001
    return max(1, int(np.ceil(round(ratio * n, 9))))
