"""Ground-truth scenes: the ellipse head phantom and PGM file I/O."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from opcs.basis import is_power_of_two
from opcs.errors import FormatError, InvalidArgumentError, InvalidDimensionError

VARIANTS = ("modified", "standard")


@dataclass(frozen=True)
class PhantomSpec:
    """Ellipses as ``(cx, cy, a, b, angle_deg, intensity)`` rows plus an output gain."""

    ellipses: tuple[tuple[float, float, float, float, float, float], ...]
    gain: float = 1.0


def parse_phantom_table(text: str) -> PhantomSpec:
    ellipses = []
    gain = 1.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            words = line[1:].split()
            if len(words) == 2 and words[0] == "gain":
                gain = float(words[1])
            continue
        if not line:
            continue
        fields = line.split()
        if len(fields) != 6:
            raise FormatError(f"phantom table line {lineno}: expected 6 numbers, got {len(fields)}")
        try:
            ellipses.append(tuple(float(f) for f in fields))
        except ValueError:
            raise FormatError(f"phantom table line {lineno}: non-numeric field") from None
    if not ellipses:
        raise FormatError("phantom table has no ellipses")
    return PhantomSpec(tuple(ellipses), gain)


def load_phantom_table(path) -> PhantomSpec:
    return parse_phantom_table(Path(path).read_text())


def builtin_phantom(variant: str = "modified") -> PhantomSpec:
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"unknown phantom variant {variant!r}; choose from {VARIANTS}")
    text = resources.files("opcs").joinpath(f"data/shepp_logan_{variant}.txt").read_text()
    return parse_phantom_table(text)


def render_phantom(spec: PhantomSpec, side: int, supersample: int = 1) -> np.ndarray:
    """Rasterise ellipses; ``supersample > 1`` averages a k x k grid of samples per pixel."""
    if supersample > 1:
        fine = render_phantom(spec, side * supersample)
        return fine.reshape(side, supersample, side, supersample).mean(axis=(1, 3))
    # sample centres; row 0 is the top of the image
    centres = (2 * np.arange(side) + 1) / side - 1
    x = centres[None, :]
    y = -centres[:, None]
    img = np.zeros((side, side))
    for cx, cy, a, b, angle, value in spec.ellipses:
        th = np.deg2rad(angle)
        xr = (x - cx) * np.cos(th) + (y - cy) * np.sin(th)
        yr = -(x - cx) * np.sin(th) + (y - cy) * np.cos(th)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return np.clip(spec.gain * img, 0.0, 1.0)


def shepp_logan(side: int, variant: str = "modified", supersample: int = 4) -> np.ndarray:
    """Ten-ellipse head phantom of ``side x side`` pixels with values in [0, 1].

    Pixels hold the area average of the transmission (``supersample`` samples
    per axis), so edge pixels take intermediate values.
    """
    if side < 16:
        raise InvalidDimensionError(f"phantom side must be at least 16, got {side}")
    return render_phantom(builtin_phantom(variant), side, supersample)


# -- PGM ----------------------------------------------------------------------------


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise FormatError("truncated PGM header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def load_pgm(path, require_power_of_two: bool = True) -> np.ndarray:
    """Read a P2 or P5 greyscale file as floats scaled to [0, 1].

    Scenes must be square with a power-of-two side; nothing is resampled.
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic in (b"P3", b"P6"):
        raise FormatError(f"{path}: colour PPM ({magic.decode()}) is not a single-channel PGM")
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: not a PGM file")
    tokens, pos = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"{path}: bad PGM header") from None
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: bad PGM dimensions or maxval")
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raster = data[pos + 1 :]
        need = width * height * dtype.itemsize
        if len(raster) < need:
            raise FormatError(f"{path}: truncated raster")
        pixels = np.frombuffer(raster[:need], dtype=dtype).astype(np.float64)
    else:
        try:
            pixels = np.array(data[pos:].split(), dtype=np.float64)
        except ValueError:
            raise FormatError(f"{path}: non-numeric ASCII raster") from None
        if pixels.size < width * height:
            raise FormatError(f"{path}: truncated raster")
        pixels = pixels[: width * height]
    if np.any(pixels > maxval):
        raise FormatError(f"{path}: pixel value exceeds maxval")
    img = pixels.reshape(height, width) / maxval
    if width != height:
        raise InvalidDimensionError(f"{path}: scene must be square, got {width}x{height}")
    if require_power_of_two and not is_power_of_two(width):
        raise InvalidDimensionError(f"{path}: side {width} is not a power of two")
    return img


def save_pgm(image, path, value_range: tuple[float, float] | None = None) -> None:
    """Write a 16-bit binary PGM, min-max normalised unless ``value_range`` is given."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidDimensionError(f"image must be 2-D, got shape {img.shape}")
    lo, hi = value_range if value_range is not None else (float(img.min()), float(img.max()))
    if hi > lo:
        scaled = np.clip((img - lo) / (hi - lo), 0.0, 1.0)
    else:
        scaled = np.zeros_like(img)
    q = np.rint(scaled * 65535).astype(">u2")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(q.tobytes())
