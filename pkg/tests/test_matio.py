import numpy as np
import pytest

from specmix.matio import (
    MAGIC,
    MatrixFormatError,
    ensure_dir,
    read_feature_csv,
    read_labels_csv,
    read_matrix,
    write_labels_csv,
    write_matrix,
)


def test_matrix_roundtrip_is_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(7, 3))
    a[0, 0] = -0.0
    a[1, 2] = 1e-308
    path = tmp_path / "a.bin"
    write_matrix(path, a)
    b = read_matrix(path)
    assert a.tobytes() == b.tobytes()
    assert b.shape == (7, 3)


def test_matrix_rejects_non_2d(tmp_path):
    with pytest.raises(MatrixFormatError):
        write_matrix(tmp_path / "v.bin", np.arange(4.0))


def test_read_matrix_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
    with pytest.raises(MatrixFormatError) as info:
        read_matrix(path)
    assert "magic" in str(info.value)


def test_read_matrix_truncated(tmp_path):
    rng = np.random.default_rng(1)
    path = tmp_path / "t.bin"
    write_matrix(path, rng.normal(size=(4, 4)))
    blob = path.read_bytes()
    path.write_bytes(blob[:len(MAGIC) + 16 + 5 * 8])
    with pytest.raises(MatrixFormatError):
        read_matrix(path)
    path.write_bytes(blob[:len(MAGIC) + 3])
    with pytest.raises(MatrixFormatError):
        read_matrix(path)


def test_feature_csv_with_and_without_header(tmp_path):
    plain = tmp_path / "plain.csv"
    plain.write_text("1.5,2.0\n3.0,4.5\n")
    headed = tmp_path / "headed.csv"
    headed.write_text("x,y\n1.5,2.0\n3.0,4.5\n")
    want = np.array([[1.5, 2.0], [3.0, 4.5]])
    assert np.array_equal(read_feature_csv(plain).rows, want)
    assert np.array_equal(read_feature_csv(headed).rows, want)


def test_feature_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(MatrixFormatError):
        read_feature_csv(empty)
    only_header = tmp_path / "h.csv"
    only_header.write_text("x,y\n")
    with pytest.raises(MatrixFormatError):
        read_feature_csv(only_header)
    broken = tmp_path / "b.csv"
    broken.write_text("1.0,2.0\n3.0,oops\n")
    with pytest.raises(MatrixFormatError) as info:
        read_feature_csv(broken)
    assert "non-numeric" in str(info.value)


def test_labels_roundtrip(tmp_path):
    path = tmp_path / "labels.csv"
    labels = np.array([0, 2, 1, 1, 0])
    write_labels_csv(path, labels)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "label"
    assert np.array_equal(read_labels_csv(path), labels)


def test_labels_errors(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    with pytest.raises(MatrixFormatError):
        read_labels_csv(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("label\n0\nnope\n")
    with pytest.raises(MatrixFormatError):
        read_labels_csv(bad)


def test_ensure_dir_creates_nested(tmp_path):
    target = tmp_path / "a" / "b" / "c"
    out = ensure_dir(target)
    assert out.is_dir()
    assert ensure_dir(target) == out
