import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opcs.basis import BaselineKind, SwapMode, generate_baseline
from opcs.errors import FormatError, InvalidArgumentError
from opcs.formats import (
    HEADER,
    KIND_CODES,
    MAGIC,
    export_dmd,
    import_dmd,
    load_basis,
    read_basis_text,
    read_dmd_frames,
    save_basis,
    write_basis_text,
)


@pytest.mark.parametrize("side,mode", [(2, SwapMode.POST_REORDER), (8, SwapMode.POST_REORDER), (16, SwapMode.INTERLEAVED)])
def test_basis_binary_round_trip(tmp_path, origami, side, mode):
    b = origami(side, mode)
    save_basis(b, tmp_path / "b.opcs")
    back = load_basis(tmp_path / "b.opcs")
    assert np.array_equal(back.patterns, b.patterns)
    assert back.kind == b.kind and back.swap_mode is mode and back.swap_ids == b.swap_ids


@pytest.mark.parametrize("kind", list(BaselineKind))
def test_baseline_round_trip(tmp_path, kind):
    b = generate_baseline(8, kind, seed=5)
    save_basis(b, tmp_path / "b.opcs")
    back = load_basis(tmp_path / "b.opcs")
    assert np.array_equal(back.patterns, b.patterns)
    assert back.kind == kind.value and back.swap_mode is None


def test_header_fields(tmp_path, origami):
    save_basis(origami(8), tmp_path / "b.opcs")
    data = (tmp_path / "b.opcs").read_bytes()
    magic, version, side, count, kind, swap = HEADER.unpack_from(data)
    assert (magic, version, side, count, kind, swap) == (MAGIC, 1, 8, 64, KIND_CODES["origami"], 0)
    assert len(data) == HEADER.size + 64 * 8


def test_bad_files(tmp_path, origami):
    bad = tmp_path / "bad.opcs"
    bad.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(FormatError):
        load_basis(bad)
    save_basis(origami(4), tmp_path / "b.opcs")
    data = (tmp_path / "b.opcs").read_bytes()
    (tmp_path / "short.opcs").write_bytes(data[:-1])
    with pytest.raises(FormatError):
        load_basis(tmp_path / "short.opcs")


def test_text_round_trip(tmp_path, origami):
    b = origami(4)
    write_basis_text(b, tmp_path / "b.txt")
    assert np.array_equal(read_basis_text(tmp_path / "b.txt"), b.patterns)
    first = (tmp_path / "b.txt").read_text().split("\n\n")[0]
    assert set(first.split()) <= {"+1", "-1"}


def test_text_rejects_bad_entries(tmp_path):
    (tmp_path / "t.txt").write_text("+1 0\n-1 +1\n")
    with pytest.raises(FormatError):
        read_basis_text(tmp_path / "t.txt")


def test_dmd_smallest(tmp_path, origami):
    export_dmd(origami(2), 1, tmp_path / "f.dmd")
    frames = read_dmd_frames(tmp_path / "f.dmd")
    assert frames.shape == (2, 2, 2)
    assert np.all(frames[0] == 1) and np.all(frames[1] == 0)


def test_dmd_full_and_manifest(tmp_path, origami):
    b = origami(8)
    manifest = export_dmd(b, 64, tmp_path / "f.dmd")
    frames = read_dmd_frames(tmp_path / "f.dmd")
    assert frames.shape == (128, 8, 8)
    assert np.all(frames[0::2] + frames[1::2] == 1)
    lines = manifest.read_text().splitlines()
    assert lines[1] == "frame pattern polarity"
    assert lines[2:4] == ["1 1 positive", "2 1 negative"]
    assert len(lines) == 2 + 128


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 4, 8, 16]), st.data())
def test_dmd_round_trip(tmp_path_factory, origami, side, data):
    b = origami(side)
    m = data.draw(st.integers(1, b.n))
    path = tmp_path_factory.mktemp("dmd") / "f.dmd"
    export_dmd(b, m, path)
    assert np.array_equal(import_dmd(path), b.patterns[:m])


def test_dmd_m_range(tmp_path, origami):
    for m in (0, 17):
        with pytest.raises(InvalidArgumentError):
            export_dmd(origami(4), m, tmp_path / "f.dmd")


def test_dmd_rejects_non_complementary(tmp_path, origami):
    path = tmp_path / "f.dmd"
    export_dmd(origami(8), 2, path)
    data = bytearray(path.read_bytes())
    data[HEADER.size + 1 + 8] ^= 0x80  # flip one pixel of the negative frame
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        import_dmd(path)
