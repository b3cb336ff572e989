"""Flat on-disk container for named 2-D rasters (file extension ``.cgr``).

Layout: a magic line, a 10-digit ASCII byte count, a UTF-8 JSON header
describing every array (name, shape, dtype tag, dx, dy, role) plus free-form
metadata and the endianness marker "LE", then the raw payload: little-endian
8-byte floats, row-major, one array after another. Complex rasters are stored
as interleaved (re, im) pairs; boolean rasters as 0.0/1.0. Round trips are
bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import BadMagicError, ContainerError, PayloadShapeError, TruncatedPayloadError

__all__ = ["RasterRecord", "write_container", "read_container"]

MAGIC = b"#cgr1\n"
ROLES = ("field", "intensity", "mask", "support")
_DTYPE_TAGS = {"f64": np.float64, "c128": np.complex128, "bool8": np.bool_}


@dataclass(frozen=True)
class RasterRecord:
    """One named raster inside a container."""

    name: str
    data: np.ndarray
    dx: float = 1.0
    dy: float = 1.0
    role: str = "field"

    def dtype_tag(self) -> str:
        kind = np.asarray(self.data).dtype
        if kind == np.complex128:
            return "c128"
        if kind == np.float64:
            return "f64"
        if kind == np.bool_:
            return "bool8"
        raise ValueError(f"unsupported raster dtype {kind}; use float64, complex128 or bool")


def _payload_floats(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    if arr.dtype == np.complex128:
        return arr.view(np.float64).reshape(-1)
    if arr.dtype == np.bool_:
        return arr.astype(np.float64).reshape(-1)
    return arr.reshape(-1)


def write_container(path, records: Iterable[RasterRecord], meta: Mapping | None = None) -> None:
    """Write named rasters plus metadata; names must be unique."""
    records = list(records)
    names = [r.name for r in records]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate raster names in container: {names}")
    entries = []
    chunks = []
    for rec in records:
        data = np.asarray(rec.data)
        if data.ndim != 2:
            raise ValueError(f"raster {rec.name!r} must be 2-D, got ndim={data.ndim}")
        if rec.role not in ROLES:
            raise ValueError(f"raster {rec.name!r} has unknown role {rec.role!r}")
        tag = rec.dtype_tag()
        entries.append(
            {
                "name": rec.name,
                "shape": [int(data.shape[0]), int(data.shape[1])],
                "dtype": tag,
                "dx": float(rec.dx),
                "dy": float(rec.dy),
                "role": rec.role,
            }
        )
        chunks.append(_payload_floats(data).astype("<f8", copy=False).tobytes())
    header = {"endian": "LE", "arrays": entries, "meta": dict(meta or {})}
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(b"%010d\n" % len(header_bytes))
        fh.write(header_bytes)
        for chunk in chunks:
            fh.write(chunk)


def read_container(path) -> tuple[list[RasterRecord], dict]:
    """Read a container; returns (records, metadata)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        raise BadMagicError(f"{path}: not a .cgr container (bad magic string)")
    pos = len(MAGIC)
    line = blob[pos : pos + 11]
    if len(line) < 11 or line[10:11] != b"\n" or not line[:10].isdigit():
        raise ContainerError(f"{path}: malformed header length field")
    header_len = int(line[:10])
    pos += 11
    header_bytes = blob[pos : pos + header_len]
    if len(header_bytes) != header_len:
        raise TruncatedPayloadError(
            f"{path}: header truncated, expected {header_len} bytes, got {len(header_bytes)}"
        )
    try:
        header = json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: header is not valid UTF-8 JSON: {exc}") from exc
    if header.get("endian") != "LE":
        raise ContainerError(f"{path}: unsupported endianness marker {header.get('endian')!r}")
    pos += header_len
    payload = blob[pos:]

    records = []
    offset = 0
    for entry in header.get("arrays", []):
        shape = entry.get("shape")
        tag = entry.get("dtype")
        if tag not in _DTYPE_TAGS:
            raise ContainerError(f"{path}: unknown dtype tag {tag!r}")
        if not (isinstance(shape, list) and len(shape) == 2 and min(shape) >= 1):
            raise PayloadShapeError(f"{path}: bad shape {shape!r} for array {entry.get('name')!r}")
        h, w = int(shape[0]), int(shape[1])
        n_floats = h * w * (2 if tag == "c128" else 1)
        n_bytes = n_floats * 8
        if offset + n_bytes > len(payload):
            raise TruncatedPayloadError(
                f"{path}: payload truncated, expected {offset + n_bytes} bytes, got {len(payload)}"
            )
        flat = np.frombuffer(payload, dtype="<f8", count=n_floats, offset=offset)
        offset += n_bytes
        if tag == "c128":
            data = flat.astype(np.float64).view(np.complex128).reshape(h, w)
        elif tag == "bool8":
            data = (flat != 0.0).reshape(h, w)
        else:
            data = flat.astype(np.float64).reshape(h, w)
        records.append(
            RasterRecord(
                name=str(entry.get("name")),
                data=data,
                dx=float(entry.get("dx", 1.0)),
                dy=float(entry.get("dy", 1.0)),
                role=str(entry.get("role", "field")),
            )
        )
    if offset != len(payload):
        raise PayloadShapeError(
            f"{path}: payload length {len(payload)} does not match declared {offset} bytes"
        )
    return records, header.get("meta", {})
