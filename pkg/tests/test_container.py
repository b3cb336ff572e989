"""Container format: bit-exact round trips and the error taxonomy."""

import numpy as np
import pytest

from cgraar import RasterRecord, read_container, write_container
from cgraar.errors import BadMagicError, ContainerError, PayloadShapeError, TruncatedPayloadError


def test_complex_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    path = tmp_path / "field.cgr"
    write_container(path, [RasterRecord("rho", data, dx=0.25, dy=1.5, role="field")], {"note": "x"})
    records, meta = read_container(path)
    assert meta == {"note": "x"}
    (rec,) = records
    assert rec.name == "rho" and rec.role == "field"
    assert rec.dx == 0.25 and rec.dy == 1.5
    assert rec.data.dtype == np.complex128
    assert np.array_equal(rec.data, data)  # bit-exact


def test_multi_array_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    counts = np.abs(rng.normal(size=(8, 10))) ** 2
    mask = rng.random((8, 10)) > 0.3
    path = tmp_path / "data.cgr"
    write_container(
        path,
        [
            RasterRecord("counts", counts, role="intensity"),
            RasterRecord("measured", mask, role="mask"),
        ],
    )
    records, _ = read_container(path)
    assert [r.name for r in records] == ["counts", "measured"]
    assert np.array_equal(records[0].data, counts)
    assert records[1].data.dtype == np.bool_
    assert np.array_equal(records[1].data, mask)


def test_extreme_float_values_survive(tmp_path):
    data = np.array([[1e-308, -0.0], [np.pi, 1e308]])
    path = tmp_path / "x.cgr"
    write_container(path, [RasterRecord("v", data)])
    (rec,), _ = read_container(path)
    assert np.array_equal(rec.data, data)
    assert np.signbit(rec.data[0, 1])


def test_duplicate_names_rejected(tmp_path):
    data = np.zeros((2, 2))
    with pytest.raises(ValueError, match="duplicate"):
        write_container(tmp_path / "d.cgr", [RasterRecord("a", data), RasterRecord("a", data)])


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.cgr"
    path.write_bytes(b"NOTCGR__" + b"\x00" * 64)
    with pytest.raises(BadMagicError):
        read_container(path)


def test_truncated_payload_names_byte_counts(tmp_path):
    path = tmp_path / "t.cgr"
    write_container(path, [RasterRecord("v", np.ones((4, 4)))])
    blob = path.read_bytes()
    path.write_bytes(blob[:-40])
    with pytest.raises(TruncatedPayloadError, match=r"expected \d+ bytes, got \d+"):
        read_container(path)


def test_trailing_garbage_is_shape_error(tmp_path):
    path = tmp_path / "g.cgr"
    write_container(path, [RasterRecord("v", np.ones((4, 4)))])
    path.write_bytes(path.read_bytes() + b"\x00" * 16)
    with pytest.raises(PayloadShapeError):
        read_container(path)


def test_malformed_length_line(tmp_path):
    path = tmp_path / "m.cgr"
    path.write_bytes(b"#cgr1\nnot-a-number\n{}")
    with pytest.raises(ContainerError):
        read_container(path)


def test_unknown_role_rejected_on_write(tmp_path):
    with pytest.raises(ValueError, match="role"):
        write_container(tmp_path / "r.cgr", [RasterRecord("v", np.ones((2, 2)), role="mystery")])


@pytest.mark.parametrize("seed", range(5))
def test_random_payload_round_trips(tmp_path, seed):
    rng = np.random.default_rng(200 + seed)
    h, w = int(rng.integers(2, 40)), int(rng.integers(2, 40))
    kind = seed % 3
    if kind == 0:
        data = rng.normal(size=(h, w))
    elif kind == 1:
        data = rng.normal(size=(h, w)) + 1j * rng.normal(size=(h, w))
    else:
        data = rng.random((h, w)) > 0.5
    path = tmp_path / f"r{seed}.cgr"
    write_container(path, [RasterRecord("v", data)])
    (rec,), _ = read_container(path)
    assert np.array_equal(rec.data, data)
