"""Binary and text containers for pattern bases and DMD frame sequences.

Basis file layout (little-endian)::

    magic      4s   b"OPCS"
    version    u16
    side       u16
    count      u32  patterns (or frames) that follow
    kind       u8   ordering code, see KIND_CODES
    swap_mode  u8   0 post-reorder, 1 interleaved, 255 not applicable

followed by ``count`` bit-planes, row-major, one bit per pixel (1 = +1 or
mirror on), every row padded to a byte boundary.  DMD files carry the same
header with ``count = 2m`` plus one frame-pair flag byte before the frames.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from opcs.basis import ORIGAMI, BaselineKind, PatternBasis, SwapMode, swap_id_set
from opcs.errors import FormatError, InvalidArgumentError

MAGIC = b"OPCS"
VERSION = 1
HEADER = struct.Struct("<4sHHIBB")

KIND_CODES = {
    ORIGAMI: 0,
    BaselineKind.RANDOM_PM1.value: 1,
    BaselineKind.HADAMARD_NATURAL.value: 2,
    BaselineKind.CD_SORTED_HADAMARD.value: 3,
}
_KIND_NAMES = {v: k for k, v in KIND_CODES.items()}
SWAP_CODES = {SwapMode.POST_REORDER: 0, SwapMode.INTERLEAVED: 1, None: 255}
_SWAP_MODES = {v: k for k, v in SWAP_CODES.items()}

# frames alternate positive / negative halves of each pattern
FRAME_PAIR_INTERLEAVED = 1


def pack_planes(planes: np.ndarray) -> bytes:
    return np.packbits(np.asarray(planes, dtype=bool), axis=-1).tobytes()


def unpack_planes(raw: bytes, count: int, side: int) -> np.ndarray:
    row_bytes = (side + 7) // 8
    need = count * side * row_bytes
    if len(raw) != need:
        raise FormatError(f"expected {need} bytes of bit-planes, found {len(raw)}")
    packed = np.frombuffer(raw, dtype=np.uint8).reshape(count, side, row_bytes)
    return np.unpackbits(packed, axis=-1)[..., :side].astype(bool)


def _header(side: int, count: int, kind: str, swap_mode) -> bytes:
    return HEADER.pack(MAGIC, VERSION, side, count, KIND_CODES[kind], SWAP_CODES[swap_mode])


def _read_header(data: bytes, path) -> tuple[int, int, str, SwapMode | None]:
    if len(data) < HEADER.size:
        raise FormatError(f"{path}: file too short for header")
    magic, version, side, count, kind, swap = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if kind not in _KIND_NAMES or swap not in _SWAP_MODES:
        raise FormatError(f"{path}: unknown ordering code {kind} / swap code {swap}")
    return side, count, _KIND_NAMES[kind], _SWAP_MODES[swap]


def save_basis(basis: PatternBasis, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_header(basis.side, basis.n, basis.kind, basis.swap_mode))
        fh.write(pack_planes(basis.patterns > 0))


def load_basis(path) -> PatternBasis:
    data = Path(path).read_bytes()
    side, count, kind, swap_mode = _read_header(data, path)
    if count != side * side:
        raise FormatError(f"{path}: {count} patterns cannot form a complete basis of side {side}")
    planes = unpack_planes(data[HEADER.size :], count, side)
    pats = np.where(planes, 1, -1).astype(np.int8)
    swaps = swap_id_set(count // 4) if kind == ORIGAMI and swap_mode is not None else frozenset()
    return PatternBasis(side, pats, kind, swap_mode, swaps)


def write_basis_text(basis: PatternBasis, path, m: int | None = None) -> None:
    """One pattern per block of ``+1``/``-1`` rows, blocks separated by a blank line."""
    m = basis.n if m is None else m
    blocks = []
    for pat in basis.patterns[:m]:
        blocks.append("\n".join(" ".join("+1" if v > 0 else "-1" for v in row) for row in pat))
    Path(path).write_text("\n\n".join(blocks) + "\n")


def read_basis_text(path) -> np.ndarray:
    text = Path(path).read_text().strip()
    pats = []
    for block in text.split("\n\n"):
        rows = [[int(tok) for tok in line.split()] for line in block.strip().splitlines()]
        pats.append(rows)
    try:
        arr = np.array(pats, dtype=np.int8)
    except ValueError:
        raise FormatError(f"{path}: ragged pattern blocks") from None
    if arr.ndim != 3 or not np.all((arr == 1) | (arr == -1)):
        raise FormatError(f"{path}: entries must be +1 or -1 in square blocks")
    return arr


# -- DMD frame export --------------------------------------------------------------


def export_dmd(basis: PatternBasis, m: int, path) -> Path:
    """Write ``2m`` frames ordered positive, negative, positive, ... and a manifest.

    Returns the manifest path (``<path>.manifest.txt``).
    """
    if not 1 <= m <= basis.n:
        raise InvalidArgumentError(f"prefix length m={m} outside 1..{basis.n}")
    pos = basis.patterns[:m] > 0
    frames = np.empty((2 * m, basis.side, basis.side), dtype=bool)
    frames[0::2] = pos
    frames[1::2] = ~pos
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_header(basis.side, 2 * m, basis.kind, basis.swap_mode))
        fh.write(bytes([FRAME_PAIR_INTERLEAVED]))
        fh.write(pack_planes(frames))
    manifest = path.with_name(path.name + ".manifest.txt")
    lines = [f"# {basis.identifier} m={m}", "frame pattern polarity"]
    for k in range(2 * m):
        lines.append(f"{k + 1} {k // 2 + 1} {'positive' if k % 2 == 0 else 'negative'}")
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def read_dmd_frames(path) -> np.ndarray:
    """Raw 0/1 frames in display order, shape ``(2m, p, p)``."""
    data = Path(path).read_bytes()
    side, count, _, _ = _read_header(data, path)
    if len(data) < HEADER.size + 1 or data[HEADER.size] != FRAME_PAIR_INTERLEAVED:
        raise FormatError(f"{path}: missing or unknown frame-pair flag")
    return unpack_planes(data[HEADER.size + 1 :], count, side).astype(np.uint8)


def import_dmd(path) -> np.ndarray:
    """Recover the +/-1 patterns from a DMD frame file."""
    frames = read_dmd_frames(path)
    if len(frames) % 2:
        raise FormatError(f"{path}: odd number of frames")
    pos, neg = frames[0::2], frames[1::2]
    if not np.all(pos + neg == 1):
        raise FormatError(f"{path}: frame pairs are not complementary")
    return (2 * pos.astype(np.int8) - 1).astype(np.int8)
