"""Initial seed sampling and per-iteration seed recomputation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gradient import GradientMap, MinimaSet, closest_minima
from .lattice import Lattice


class ForestConsistencyError(RuntimeError):
    """A forest or label map violates an invariant the algorithm relies on."""


@dataclass(frozen=True, eq=False)
class SeedSet:
    """Ordered seeds; seed ``j`` (0-based) carries label ``j + 1``."""

    sites: np.ndarray
    ref_colors: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        sites = np.asarray(self.sites, dtype=np.int64).ravel()
        ref = np.asarray(self.ref_colors, dtype=np.float64).reshape(-1, 3)
        if sites.size != ref.shape[0]:
            raise ValueError("one reference color per seed required")
        n = int(np.prod(self.dims))
        if sites.size and (sites.min() < 0 or sites.max() >= n):
            raise ValueError("seed outside the lattice")
        if np.unique(sites).size != sites.size:
            raise ValueError("duplicate seeds")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "ref_colors", ref)
        object.__setattr__(self, "dims", tuple(self.dims))

    @classmethod
    def from_sites(cls, lattice: Lattice, sites: Sequence[int]) -> "SeedSet":
        sites = np.asarray(sites, dtype=np.int64)
        return cls(sites, lattice.colors[sites], lattice.dims)

    @classmethod
    def from_coords(cls, lattice: Lattice, coords: Sequence[Sequence[int]]) -> "SeedSet":
        return cls.from_sites(lattice, [lattice.index(c) for c in coords])

    def __len__(self) -> int:
        return int(self.sites.size)

    @property
    def k(self) -> int:
        return len(self)

    @property
    def labels(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def coords(self) -> list[tuple[int, ...]]:
        out = []
        for s in self.sites:
            rem, c = int(s), []
            for d in self.dims:
                c.append(rem % d)
                rem //= d
            out.append(tuple(c))
        return out

    def same_as(self, other: "SeedSet") -> bool:
        return (
            np.array_equal(self.sites, other.sites)
            and np.array_equal(self.ref_colors, other.ref_colors)
        )


# -- grid sampling ------------------------------------------------------------


def _interval(area: int, m: int, ndim: int) -> int:
    """Largest integer S with S**ndim * m <= area (at least 1)."""
    s = max(1, int(round((area / m) ** (1.0 / ndim))))
    while s > 1 and s**ndim * m > area:
        s -= 1
    while (s + 1) ** ndim * m <= area:
        s += 1
    return s


def _grid_cells(lo: Sequence[int], extent: Sequence[int], m: int, exact: bool) -> np.ndarray:
    """Cell-center coordinates of a regular grid over a box, in scan order.

    Cell counts start from ``extent / S`` per axis and are then shrunk or
    grown so the total does not exceed ``m``. With ``exact``, a slightly
    larger grid is built and ``m`` cells are picked at even scan-order
    spacing.
    """
    extent = [int(e) for e in extent]
    ndim = len(extent)
    area = int(np.prod(extent))
    if not 1 <= m <= area:
        raise ValueError(f"cannot place {m} seeds in {area} sites")
    s = _interval(area, m, ndim)
    n = [min(e, max(1, int(math.floor(e / s + 0.5)))) for e in extent]

    def width(a: int) -> float:
        return extent[a] / n[a]

    while math.prod(n) > m:
        axes = [a for a in range(ndim) if n[a] > 1]
        a = min(axes, key=width)
        n[a] -= 1
    while True:
        axes = [a for a in range(ndim) if n[a] < extent[a]]
        if not axes:
            break
        a = max(axes, key=width)
        if math.prod(n) // n[a] * (n[a] + 1) > m:
            break
        n[a] += 1
    if exact:
        while math.prod(n) < m:
            axes = [a for a in range(ndim) if n[a] < extent[a]]
            n[max(axes, key=width)] += 1

    centers = [
        lo[a] + (2 * np.arange(n[a]) + 1) * extent[a] // (2 * n[a]) for a in range(ndim)
    ]
    # x-fastest scan order
    mesh = np.meshgrid(*reversed(centers), indexing="ij")
    cells = np.stack([g.ravel() for g in reversed(mesh)], axis=1)
    if exact and cells.shape[0] > m:
        pick = ((2 * np.arange(m) + 1) * cells.shape[0]) // (2 * m)
        cells = cells[pick]
    return cells.astype(np.int64)


def _to_sites(dims: Sequence[int], coords: np.ndarray) -> np.ndarray:
    idx = np.zeros(coords.shape[0], dtype=np.int64)
    stride = 1
    for a, d in enumerate(dims):
        idx += coords[:, a] * stride
        stride *= d
    return idx


def grid_sample(lattice: Lattice, k: int) -> SeedSet:
    """One seed per cell center of a regular grid; at most ``k`` seeds."""
    if not 1 <= k <= lattice.size:
        raise ValueError(f"k={k} outside [1, {lattice.size}]")
    cells = _grid_cells([0] * lattice.ndim, lattice.dims, k, exact=False)
    return SeedSet.from_sites(lattice, _to_sites(lattice.dims, cells))


# -- mixed (entropy quad-tree) sampling -----------------------------------------


def nse(histogram: Sequence[float] | np.ndarray) -> float:
    """Normalized Shannon entropy over the intensity levels present."""
    h = np.asarray(histogram, dtype=np.float64).ravel()
    total = h.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    p = h[h > 0] / total
    if p.size == 1:
        return 0.0
    value = float(-(p * np.log2(p)).sum() / math.log2(p.size))
    return min(1.0, max(0.0, value))


def lightness_levels(lattice: Lattice) -> np.ndarray:
    """Lightness quantized to 256 bins, in array layout."""
    q = np.floor(lattice.colors[:, 0] * (255.0 / 100.0) + 0.5)
    return lattice.as_image(np.clip(q, 0, 255).astype(np.int64))


Box = tuple[int, int, int, int]  # x0, y0, width, height


@dataclass(frozen=True)
class QuadTreeStats:
    quadrants: list[Box]
    quadrant_nse: list[float]
    mu: float
    sigma: float
    leaves: list[Box]
    leaf_nse: list[float]


def _box_nse(levels: np.ndarray, box: Box) -> float:
    x0, y0, w, h = box
    block = levels[y0 : y0 + h, x0 : x0 + w]
    return nse(np.bincount(block.ravel(), minlength=256))


def _split(box: Box) -> list[Box]:
    x0, y0, w, h = box
    xs = [(x0, w // 2), (x0 + w // 2, w - w // 2)] if w >= 2 else [(x0, w)]
    ys = [(y0, h // 2), (y0 + h // 2, h - h // 2)] if h >= 2 else [(y0, h)]
    return [(x, y, ww, hh) for (y, hh) in ys for (x, ww) in xs]


def build_quadtree(lattice: Lattice) -> QuadTreeStats:
    if lattice.ndim != 2:
        raise ValueError("mixed sampling is defined for 2D images only")
    nx, ny = lattice.dims
    if nx < 2 or ny < 2:
        raise ValueError("mixed sampling needs at least a 2x2 image")
    levels = lightness_levels(lattice)
    quads = _split((0, 0, nx, ny))
    qnse = [_box_nse(levels, q) for q in quads]
    mu = float(np.mean(qnse))
    sigma = float(np.std(qnse))
    leaves: list[Box] = []
    leaf_nse: list[float] = []
    for q, v in zip(quads, qnse):
        children = _split(q) if abs(v - mu) > sigma else [q]
        if len(children) == 1:
            leaves.append(q)
            leaf_nse.append(v)
        else:
            leaves.extend(children)
            leaf_nse.extend(_box_nse(levels, c) for c in children)
    return QuadTreeStats(quads, qnse, mu, sigma, leaves, leaf_nse)


def allocate_seeds(weights: Sequence[float], capacities: Sequence[int], k: int) -> np.ndarray:
    """Split ``k`` seeds across leaves proportionally to ``weights``.

    Largest-remainder rounding makes the total exactly ``k``. Every leaf gets
    at least one seed when ``k`` allows it, and no leaf gets more seeds than
    it has sites. A zero weight sum falls back to an equal split.
    """
    w = np.asarray(weights, dtype=np.float64)
    cap = np.asarray(capacities, dtype=np.int64)
    nleaf = w.size
    if k > cap.sum():
        raise ValueError("more seeds than sites")
    if w.sum() <= 0:
        w = np.ones(nleaf)
    quota = k * w / w.sum()
    alloc = np.floor(quota).astype(np.int64)
    rest = k - int(alloc.sum())
    if rest > 0:
        frac = quota - alloc
        order = np.lexsort((np.arange(nleaf), -frac))
        alloc[order[:rest]] += 1
    if k >= nleaf:
        for i in np.flatnonzero(alloc == 0):
            donor = int(np.argmax(alloc))
            alloc[donor] -= 1
            alloc[i] += 1
    # spill seeds from leaves that are too small, heaviest receivers first
    over = alloc - cap
    if np.any(over > 0):
        excess = int(over[over > 0].sum())
        alloc = np.minimum(alloc, cap)
        receivers = np.lexsort((np.arange(nleaf), -w))
        while excess:
            for i in receivers:
                if excess and alloc[i] < cap[i]:
                    alloc[i] += 1
                    excess -= 1
    return alloc


def mixed_sample(lattice: Lattice, k: int) -> SeedSet:
    if lattice.ndim != 2:
        raise ValueError("mixed sampling is defined for 2D images only")
    if not 4 <= k <= lattice.size:
        raise ValueError(f"k={k} outside [4, {lattice.size}]")
    tree = build_quadtree(lattice)
    areas = [w * h for (_, _, w, h) in tree.leaves]
    alloc = allocate_seeds(tree.leaf_nse, areas, k)
    parts = []
    for (x0, y0, w, h), m in zip(tree.leaves, alloc):
        if m:
            parts.append(_grid_cells((x0, y0), (w, h), int(m), exact=True))
    sites = np.sort(_to_sites(lattice.dims, np.concatenate(parts)))
    return SeedSet.from_sites(lattice, sites)


# -- regional-minima sampling --------------------------------------------------


def regmin_seeds(lattice: Lattice, k: int, grad: GradientMap, minima: MinimaSet) -> SeedSet:
    """Grid seeds moved to their closest regional minimum, duplicates dropped."""
    grid = grid_sample(lattice, k)
    moved = closest_minima(grid.sites, minima)
    _, first = np.unique(moved, return_index=True)
    return SeedSet.from_sites(lattice, moved[np.sort(first)])


# -- seed recomputation ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeedUpdateStats:
    mean_color: np.ndarray  # (k, 3)
    center: np.ndarray  # (k, ndim)
    mu_c: np.ndarray
    mu_s: np.ndarray
    size: np.ndarray


def seed_update_stats(labels: np.ndarray, lattice: Lattice, prev: SeedSet) -> SeedUpdateStats:
    lab = np.asarray(labels, dtype=np.int64).ravel() - 1
    k = len(prev)
    if lab.size != lattice.size or lab.min() < 0 or lab.max() >= k:
        raise ForestConsistencyError("labels outside 1..k")
    size = np.bincount(lab, minlength=k)
    if np.any(size == 0):
        raise ForestConsistencyError(
            f"labels without sites: {(np.flatnonzero(size == 0) + 1).tolist()}"
        )
    colors = lattice.colors
    coords = lattice.coords.astype(np.float64)
    mean = np.stack([np.bincount(lab, colors[:, c], k) for c in range(3)], 1) / size[:, None]
    center = (
        np.stack([np.bincount(lab, coords[:, a], k) for a in range(lattice.ndim)], 1)
        / size[:, None]
    )
    dc = np.linalg.norm(colors - colors[prev.sites][lab], axis=1)
    ds = np.linalg.norm(coords - coords[prev.sites][lab], axis=1)
    mu_c = np.bincount(lab, dc, k) / size
    mu_s = np.bincount(lab, ds, k) / size
    return SeedUpdateStats(mean, center, mu_c, mu_s, size)


def recompute_seeds(
    forest, lattice: Lattice, prev: SeedSet, policy: str = "center-medoid"
) -> SeedSet:
    """Move each seed to its superpixel's color or center medoid.

    ``forest`` is a ForestState or a per-site label array. A candidate only
    replaces the previous seed when it is farther than ``sqrt(mu_c)`` in
    color or ``sqrt(mu_s)`` in space. Reference colors become the
    superpixel mean colors.
    """
    labels = getattr(forest, "label", forest)
    stats = seed_update_stats(labels, lattice, prev)
    lab = np.asarray(labels, dtype=np.int64).ravel() - 1
    colors = lattice.colors
    coords = lattice.coords
    if policy == "color-medoid":
        key = np.linalg.norm(colors - stats.mean_color[lab], axis=1)
    elif policy == "center-medoid":
        key = np.linalg.norm(coords - stats.center[lab], axis=1)
    else:
        raise ValueError(f"unknown recomputation policy {policy!r}")
    # per label: smallest key, then lexicographically smallest coordinate
    k = len(prev)
    best = np.full(k, np.inf)
    np.minimum.at(best, lab, key)
    tied = np.flatnonzero(key == best[lab])
    lex = np.zeros(tied.size, dtype=np.int64)
    for axis, d in enumerate(lattice.dims):
        lex = lex * d + coords[tied, axis]
    first = np.full(k, np.iinfo(np.int64).max)
    np.minimum.at(first, lab[tied], lex)
    win = lex == first[lab[tied]]
    cand = np.empty(k, dtype=np.int64)
    cand[lab[tied][win]] = tied[win]

    old = prev.sites
    dcol = np.linalg.norm(colors[cand] - colors[old], axis=1)
    dpos = np.linalg.norm((coords[cand] - coords[old]).astype(np.float64), axis=1)
    move = (dcol > np.sqrt(stats.mu_c)) | (dpos > np.sqrt(stats.mu_s))
    sites = np.where(move, cand, old)
    return SeedSet(sites, stats.mean_color, lattice.dims)
