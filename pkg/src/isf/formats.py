"""Binary PNM images, ISF3 volumes, label maps, overlays and metric tables.

PNM samples wider than 8 bits are big-endian. ISF3 volumes are a 20-byte
little-endian header (``b"ISF3"``, then uint32 ``dx, dy, dz, maxval``)
followed by uint16 little-endian samples in x-fastest order.
"""
from __future__ import annotations

import csv
import io
import struct
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .lattice import Lattice
from .metrics import boundary_mask

VOLUME_MAGIC = b"ISF3"
_VOLUME_HEADER = struct.Struct("<4sIIII")

CSV_HEADER = ("image", "method", "k", "alpha", "br", "ue", "dice", "seconds")

CYAN = (0, 255, 255)
MAGENTA = (255, 0, 255)


class FormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


# -- PNM ---------------------------------------------------------------------------


def _header_tokens(data: bytes, count: int, pos: int) -> tuple[list[int], int]:
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos : pos + 1].isspace() or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("expected a decimal header field", pos)
        tokens.append(int(data[start:pos]))
    if pos >= n or not data[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after header", pos)
    return tokens, pos + 1


def read_pnm_raw(data: bytes) -> tuple[np.ndarray, int]:
    """Decode P5/P6 into ``(ny, nx)`` or ``(ny, nx, 3)`` samples and maxval."""
    if data[:2] not in (b"P5", b"P6"):
        raise FormatError(f"bad magic {data[:2]!r}, expected P5 or P6", 0)
    channels = 1 if data[:2] == b"P5" else 3
    (width, height, maxval), pos = _header_tokens(data, 3, 2)
    if width < 1 or height < 1:
        raise FormatError("image dimensions must be positive", pos)
    if not 1 <= maxval <= 65535:
        raise FormatError(f"maxval {maxval} outside 1..65535", pos)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * channels * dtype.itemsize
    if len(data) - pos < need:
        raise FormatError(f"truncated payload: {len(data) - pos} of {need} bytes", len(data))
    if len(data) - pos > need:
        raise FormatError("trailing bytes after payload", pos + need)
    arr = np.frombuffer(data, dtype=dtype, count=width * height * channels, offset=pos)
    shape = (height, width) if channels == 1 else (height, width, 3)
    arr = arr.reshape(shape).astype(np.uint16 if maxval > 255 else np.uint8)
    if arr.max(initial=0) > maxval:
        raise FormatError("sample exceeds maxval", pos)
    return arr, maxval


def write_pnm(samples: np.ndarray, maxval: int = 255) -> bytes:
    arr = np.asarray(samples)
    if arr.ndim == 2:
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError("expected (ny, nx) or (ny, nx, 3) samples")
    if not 1 <= maxval <= 65535:
        raise ValueError("maxval must be in 1..65535")
    if arr.size and (arr.min() < 0 or arr.max() > maxval):
        raise ValueError("samples outside [0, maxval]")
    dtype = ">u2" if maxval > 255 else "u1"
    header = b"%s\n%d %d\n%d\n" % (magic, arr.shape[1], arr.shape[0], maxval)
    return header + arr.astype(dtype).tobytes()


def read_pnm(data: bytes, labels: bool = False):
    """PNM bytes to a Lab lattice, or to an int64 label array with ``labels``."""
    arr, maxval = read_pnm_raw(data)
    if labels:
        if arr.ndim != 2:
            raise FormatError("label maps must be P5", 0)
        return arr.astype(np.int64)
    if arr.ndim == 3:
        return Lattice.from_rgb(arr, maxval)
    return Lattice.from_gray(arr, maxval)


# -- volumes ---------------------------------------------------------------------------


def read_volume_raw(data: bytes) -> tuple[np.ndarray, int]:
    if len(data) < _VOLUME_HEADER.size:
        raise FormatError("truncated volume header", len(data))
    magic, dx, dy, dz, maxval = _VOLUME_HEADER.unpack_from(data)
    if magic != VOLUME_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {VOLUME_MAGIC!r}", 0)
    if min(dx, dy, dz) < 1:
        raise FormatError("volume dimensions must be positive", 4)
    if not 1 <= maxval <= 65535:
        raise FormatError(f"maxval {maxval} outside 1..65535", 16)
    need = dx * dy * dz * 2
    have = len(data) - _VOLUME_HEADER.size
    if have != need:
        raise FormatError(f"payload is {have} bytes, header implies {need}", _VOLUME_HEADER.size)
    arr = np.frombuffer(data, dtype="<u2", offset=_VOLUME_HEADER.size).reshape(dz, dy, dx)
    if arr.max(initial=0) > maxval:
        raise FormatError("sample exceeds maxval", _VOLUME_HEADER.size)
    return arr.astype(np.uint16), maxval


def write_volume(samples: np.ndarray, maxval: int | None = None) -> bytes:
    """Encode an ``(nz, ny, nx)`` array."""
    arr = np.asarray(samples)
    if arr.ndim != 3:
        raise ValueError("expected an (nz, ny, nx) array")
    if maxval is None:
        maxval = max(1, int(arr.max(initial=0)))
    if not 1 <= maxval <= 65535 or (arr.size and (arr.min() < 0 or arr.max() > maxval)):
        raise ValueError("samples outside [0, maxval] or maxval outside 1..65535")
    nz, ny, nx = arr.shape
    return _VOLUME_HEADER.pack(VOLUME_MAGIC, nx, ny, nz, maxval) + arr.astype("<u2").tobytes()


def read_volume(data: bytes, labels: bool = False):
    arr, maxval = read_volume_raw(data)
    if labels:
        return arr.astype(np.int64)
    return Lattice.from_gray(arr, maxval)


# -- generic loading ----------------------------------------------------------------


def read_input(data: bytes) -> tuple[Lattice, np.ndarray, int]:
    """Lattice, raw samples and maxval of a PNM image or ISF3 volume."""
    if data[:4] == VOLUME_MAGIC:
        arr, maxval = read_volume_raw(data)
        return Lattice.from_gray(arr, maxval), arr, maxval
    arr, maxval = read_pnm_raw(data)
    if arr.ndim == 3:
        return Lattice.from_rgb(arr, maxval), arr, maxval
    return Lattice.from_gray(arr, maxval), arr, maxval


def read_labels(data: bytes) -> np.ndarray:
    if data[:4] == VOLUME_MAGIC:
        return read_volume(data, labels=True)
    return read_pnm(data, labels=True)


def load_labels(path: str | Path) -> np.ndarray:
    return read_labels(Path(path).read_bytes())


# -- label maps and overlays ----------------------------------------------------------


def write_labels(labels: np.ndarray) -> bytes:
    """16-bit P5 for 2D maps, ISF3 for 3D maps."""
    arr = np.asarray(labels)
    if arr.size and (arr.min() < 0 or arr.max() > 65535):
        raise ValueError("labels must fit in 0..65535")
    if arr.ndim == 3:
        return write_volume(arr, 65535)
    return write_pnm(arr, 65535)


def _to_rgb8(image: np.ndarray, maxval: int) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    if maxval != 255:
        img = np.rint(img.astype(np.float64) * (255.0 / maxval))
    return img.astype(np.uint8)


def overlay_rgb(
    image: np.ndarray, labels: np.ndarray, gt: np.ndarray | None = None, maxval: int = 255
) -> np.ndarray:
    out = _to_rgb8(image, maxval).copy()
    labels = np.asarray(labels)
    if out.shape[:2] != labels.shape:
        raise ValueError("image and label map differ in size")
    if gt is not None:
        out[boundary_mask(gt)] = MAGENTA
    out[boundary_mask(labels)] = CYAN
    return out


def write_overlay(
    image: np.ndarray, labels: np.ndarray, gt: np.ndarray | None = None, maxval: int = 255
) -> bytes:
    """P6 with superpixel borders in cyan over ground-truth borders in magenta."""
    return write_pnm(overlay_rgb(image, labels, gt, maxval), 255)


# -- metric tables ------------------------------------------------------------------


@dataclass
class MetricRow:
    image: str
    method: str
    k: int
    alpha: float | None = None
    br: float | None = None
    ue: float | None = None
    dice: float | None = None
    seconds: float | None = None


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_metrics_csv(rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(v) for v in astuple(row)])
    return buf.getvalue().encode("utf-8")


def read_metrics_csv(data: bytes) -> list[MetricRow]:
    reader = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        image, method, k, *reals = rec
        rows.append(
            MetricRow(image, method, int(k), *(float(v) if v else None for v in reals))
        )
    return rows
