import numpy as np
import pytest

from opcs.errors import FormatError, InvalidDimensionError
from opcs.imagery import (
    builtin_phantom,
    load_phantom_table,
    load_pgm,
    render_phantom,
    save_pgm,
    shepp_logan,
)
from opcs.metrics import pearson


def test_phantom_range_and_corners(phantom128):
    assert phantom128.min() >= 0 and phantom128.max() <= 1
    for r, c in [(0, 0), (0, -1), (-1, 0), (-1, -1)]:
        assert phantom128[r, c] == 0


def test_phantom_centre_positive(phantom128):
    assert phantom128[64, 64] > 0


def _upsampled_64(variant="modified"):
    return np.kron(shepp_logan(64, variant), np.ones((2, 2)))


@pytest.mark.xfail(
    strict=True,
    reason="unattainable: the best 64-pixel approximation of the 128-pixel phantom "
    "(block average, then upsample) only reaches Pearson 0.936; the sub-pixel skull ring dominates",
)
def test_phantom_resolution_consistency(phantom128):
    assert pearson(_upsampled_64(), phantom128) > 0.98


@pytest.mark.parametrize("variant", ["modified", "standard"])
def test_phantom_resolution_consistency_reaches_projection_bound(variant):
    fine = shepp_logan(128, variant)
    best = np.kron(fine.reshape(64, 2, 64, 2).mean(axis=(1, 3)), np.ones((2, 2)))
    bound = pearson(best, fine)
    assert pearson(_upsampled_64(variant), fine) > bound - 0.005
    assert pearson(_upsampled_64(variant), fine) > 0.93


def test_point_sampling_gives_piecewise_constant_levels():
    point = shepp_logan(32, supersample=1)
    area = shepp_logan(32)
    assert len(np.unique(np.round(point, 9))) <= 6
    assert len(np.unique(area)) > 20


def test_phantom_pure():
    assert shepp_logan(32).tobytes() == shepp_logan(32).tobytes()


def test_phantom_variants_differ():
    std = shepp_logan(64, "standard")
    assert std.max() <= 1 and not np.array_equal(std, shepp_logan(64))


def test_phantom_too_small():
    with pytest.raises(InvalidDimensionError):
        shepp_logan(8)


def test_phantom_table_file(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("# a single disc\n0 0 0.5 0.5 0 0.7\n")
    img = render_phantom(load_phantom_table(path), 16)
    assert img.max() == pytest.approx(0.7) and img[0, 0] == 0


def test_phantom_table_bad_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0 0.5 0.5 0\n")
    with pytest.raises(FormatError):
        load_phantom_table(path)


def test_builtin_table_has_ten_ellipses():
    assert len(builtin_phantom().ellipses) == 10


def test_pgm_round_trip(tmp_path):
    img = np.random.default_rng(0).random((16, 16))
    img[0, 0], img[0, 1] = 0.0, 1.0
    save_pgm(img, tmp_path / "a.pgm")
    back = load_pgm(tmp_path / "a.pgm")
    assert np.sqrt(np.mean((back - img) ** 2)) < 2**-15


def test_pgm_is_16_bit(tmp_path):
    save_pgm(np.eye(4), tmp_path / "a.pgm")
    assert (tmp_path / "a.pgm").read_bytes().startswith(b"P5\n4 4\n65535\n")


def test_pgm_fixed_range(tmp_path):
    save_pgm(np.full((4, 4), 0.5), tmp_path / "a.pgm", value_range=(0.0, 1.0))
    assert load_pgm(tmp_path / "a.pgm")[0, 0] == pytest.approx(0.5, abs=1e-5)


def test_ascii_pgm(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_text("P2\n# comment\n2 2\n255\n0 255\n51 102\n")
    assert load_pgm(path).tolist() == [[0.0, 1.0], [0.2, 0.4]]


def test_8_bit_binary_pgm(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 51, 102]))
    assert load_pgm(path).tolist() == [[0.0, 1.0], [0.2, 0.4]]


def test_colour_rejected(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(FormatError):
        load_pgm(path)


def test_non_power_of_two_rejected(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n100 100\n255\n" + bytes(100 * 100))
    with pytest.raises(InvalidDimensionError):
        load_pgm(path)


def test_non_square_rejected(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n4 2\n255\n" + bytes(8))
    with pytest.raises(InvalidDimensionError):
        load_pgm(path)


def test_truncated_rejected(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(FormatError):
        load_pgm(path)
