"""Pixel/voxel domains, Lab color storage and adjacency relations.

Sites are indexed x-fastest: ``index = x + nx * (y + ny * z)``. Coordinates
are tuples ``(x, y)`` or ``(x, y, z)`` and ``dims`` follows the same order.
Internally the color array is stored flat, one Lab triple per site.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# sRGB primaries, D65 white
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = _RGB_TO_XYZ.sum(axis=1)
_EPSILON = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def _srgb_linearize(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _EPSILON, np.cbrt(t), (_KAPPA * t + 16.0) / 116.0)


def rgb_to_lab_array(rgb: np.ndarray, maxval: int = 255) -> np.ndarray:
    """Convert an ``(..., 3)`` array of sRGB samples in ``[0, maxval]`` to CIE Lab."""
    c = np.asarray(rgb, dtype=np.float64) / float(maxval)
    lin = _srgb_linearize(c)
    xyz = lin @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE_D65)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def rgb_to_lab(r: float, g: float, b: float) -> tuple[float, float, float]:
    l, a, bb = rgb_to_lab_array(np.array([r, g, b], dtype=np.float64))
    return float(l), float(a), float(bb)


def to_grayscale_lab(intensity: float, maxval: int = 255) -> tuple[float, float, float]:
    return 100.0 * float(intensity) / float(maxval), 0.0, 0.0


@dataclass(frozen=True)
class Adjacency:
    kind: str
    offsets: tuple[tuple[int, ...], ...]
    steps: tuple[float, ...]

    @classmethod
    def four_2d(cls) -> "Adjacency":
        offs = ((-1, 0), (1, 0), (0, -1), (0, 1))
        return cls("four-2d", offs, (1.0,) * 4)

    @classmethod
    def six_3d(cls) -> "Adjacency":
        offs = ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1))
        return cls("six-3d", offs, (1.0,) * 6)

    @classmethod
    def for_ndim(cls, ndim: int) -> "Adjacency":
        if ndim == 2:
            return cls.four_2d()
        if ndim == 3:
            return cls.six_3d()
        raise ValueError(f"no adjacency for {ndim}-dimensional lattices")

    @property
    def ndim(self) -> int:
        return len(self.offsets[0])

    def offsets3(self) -> np.ndarray:
        """Offsets padded to three axes, as an int64 ``(K, 3)`` array."""
        out = np.zeros((len(self.offsets), 3), dtype=np.int64)
        out[:, : self.ndim] = np.asarray(self.offsets, dtype=np.int64)
        return out


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable site domain carrying one Lab color per site.

    ``colors`` has shape ``(N, 3)`` in site-index order. ``channels`` records
    whether the source was grayscale (1) or RGB (3).
    """

    dims: tuple[int, ...]
    colors: np.ndarray
    channels: int = 3
    _coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3) or min(dims) < 1:
            raise ValueError(f"invalid lattice dims {self.dims}")
        colors = np.ascontiguousarray(self.colors, dtype=np.float64).reshape(-1, 3)
        if colors.shape[0] != int(np.prod(dims)):
            raise ValueError(
                f"{colors.shape[0]} colors for {int(np.prod(dims))} sites"
            )
        if not np.all(np.isfinite(colors)):
            raise ValueError("non-finite Lab colors")
        colors.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "colors", colors)
        idx = np.arange(colors.shape[0], dtype=np.int64)
        coords = np.empty((idx.size, len(dims)), dtype=np.int64)
        rem = idx
        for axis, d in enumerate(dims):
            coords[:, axis] = rem % d
            rem = rem // d
        coords.setflags(write=False)
        object.__setattr__(self, "_coords", coords)

    @classmethod
    def from_rgb(cls, rgb: np.ndarray, maxval: int = 255) -> "Lattice":
        """Build a 2D lattice from an ``(ny, nx, 3)`` RGB array."""
        rgb = np.asarray(rgb)
        if rgb.ndim != 3 or rgb.shape[-1] != 3:
            raise ValueError("expected an (ny, nx, 3) array")
        ny, nx = rgb.shape[:2]
        return cls((nx, ny), rgb_to_lab_array(rgb, maxval).reshape(-1, 3), 3)

    @classmethod
    def from_gray(cls, gray: np.ndarray, maxval: int = 255) -> "Lattice":
        """Build a lattice from an ``(ny, nx)`` image or ``(nz, ny, nx)`` volume."""
        gray = np.asarray(gray, dtype=np.float64)
        if gray.ndim not in (2, 3):
            raise ValueError("expected a 2D image or 3D volume")
        colors = np.zeros((gray.size, 3))
        colors[:, 0] = 100.0 * gray.ravel() / float(maxval)
        return cls(tuple(reversed(gray.shape)), colors, 1)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.colors.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape (slowest axis first), e.g. ``(ny, nx)``."""
        return tuple(reversed(self.dims))

    @property
    def coords(self) -> np.ndarray:
        """``(N, ndim)`` coordinate table in site order."""
        return self._coords

    @property
    def adjacency(self) -> Adjacency:
        return Adjacency.for_ndim(self.ndim)

    def contains(self, coord: Sequence[int]) -> bool:
        return len(coord) == self.ndim and all(
            0 <= int(c) < d for c, d in zip(coord, self.dims)
        )

    def index(self, coord: Sequence[int]) -> int:
        if not self.contains(coord):
            raise ValueError(f"coordinate {tuple(coord)} outside {self.dims}")
        idx, stride = 0, 1
        for c, d in zip(coord, self.dims):
            idx += int(c) * stride
            stride *= d
        return idx

    def coord(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise ValueError(f"site index {index} outside [0, {self.size})")
        return tuple(int(v) for v in self._coords[index])

    def dims3(self) -> np.ndarray:
        out = np.ones(3, dtype=np.int64)
        out[: self.ndim] = self.dims
        return out

    def as_image(self, values: np.ndarray) -> np.ndarray:
        """Reshape a per-site array to array layout (slowest axis first)."""
        return np.asarray(values).reshape(self.shape + np.asarray(values).shape[1:])


def neighbors(
    lattice: Lattice, site: Sequence[int], adj: Adjacency | None = None
) -> list[tuple[tuple[int, ...], float]]:
    """In-bounds neighbors of ``site`` in offset order, with step lengths."""
    adj = adj or lattice.adjacency
    if not lattice.contains(site):
        raise ValueError(f"site {tuple(site)} outside {lattice.dims}")
    if adj.ndim != lattice.ndim:
        raise ValueError(f"{adj.kind} adjacency on a {lattice.ndim}D lattice")
    out = []
    for off, step in zip(adj.offsets, adj.steps):
        q = tuple(int(c) + o for c, o in zip(site, off))
        if lattice.contains(q):
            out.append((q, step))
    return out


def neighbor_pairs(dims: Sequence[int], adj: Adjacency) -> tuple[np.ndarray, np.ndarray]:
    """All ordered adjacent pairs ``(s, t)`` as flat index arrays.

    Each unordered edge appears twice, once per direction.
    """
    shape = tuple(reversed(tuple(dims)))
    idx = np.arange(int(np.prod(shape)), dtype=np.int64).reshape(shape)
    src, dst = [], []
    for off in adj.offsets:
        # offset is (dx, dy[, dz]); array axes run reversed
        sl_s, sl_t = [], []
        for o in reversed(off):
            if o > 0:
                sl_s.append(slice(0, -o))
                sl_t.append(slice(o, None))
            elif o < 0:
                sl_s.append(slice(-o, None))
                sl_t.append(slice(0, o))
            else:
                sl_s.append(slice(None))
                sl_t.append(slice(None))
        src.append(idx[tuple(sl_s)].ravel())
        dst.append(idx[tuple(sl_t)].ravel())
    return np.concatenate(src), np.concatenate(dst)
