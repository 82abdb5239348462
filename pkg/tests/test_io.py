import numpy as np
import pytest

from divcurl.errors import FormatError
from divcurl.grid import Field, build_ball_domain
from divcurl.io import read_field, write_csv, write_field, write_vtk


def test_qf1_roundtrip_bit_identical(tmp_path, ball16):
    f = Field.from_function(ball16, lambda p: np.stack([p[:, 0], p[:, 1] ** 2, np.sin(p[:, 2])], 1))
    path = tmp_path / "f.qf1"
    write_field(f, path)
    g = read_field(path, ball16)
    assert np.array_equal(f.values, g.values)
    header = path.read_bytes().split(b"\n", 1)[0].split()
    assert header[0] == b"QF1" and int(header[4]) == 3


def test_qf1_without_domain(tmp_path, ball16):
    f = Field.from_function(ball16, lambda p: p[:, 0])
    write_field(f, tmp_path / "a.qf1")
    g = read_field(tmp_path / "a.qf1")
    assert g.grid == f.grid and np.array_equal(g.values, f.values)


@pytest.mark.parametrize(
    "payload",
    [b"XXX 1 1 1 1 0 0 0 1\n" + b"\0" * 8, b"QF1 2 2 2 1 0 0 0 1\n" + b"\0" * 8, b"QF1 1 1 1 2 0 0 0 1\n" + b"\0" * 16, b"no newline"],
)
def test_qf1_malformed(tmp_path, payload):
    p = tmp_path / "bad.qf1"
    p.write_bytes(payload)
    with pytest.raises(FormatError):
        read_field(p)


def test_qf1_grid_mismatch(tmp_path, ball16):
    write_field(Field.from_function(ball16, lambda p: p[:, 0]), tmp_path / "a.qf1")
    with pytest.raises(FormatError):
        read_field(tmp_path / "a.qf1", build_ball_domain(1.0, 12))


def test_csv_and_vtk(tmp_path, ball16):
    f = Field.from_function(ball16, lambda p: p)
    write_csv(f, tmp_path / "f.csv")
    rows = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    assert rows.shape == (ball16.n_masked, 6)
    assert np.allclose(rows[:, :3], rows[:, 3:])
    write_vtk(f, tmp_path / "sub" / "f.vtk")
    text = (tmp_path / "sub" / "f.vtk").read_text().splitlines()
    assert text[0].startswith("# vtk DataFile") and "VECTORS" in text[8]
    assert len(text) == 9 + ball16.grid.size
