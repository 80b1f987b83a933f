"""Quantized gradient image and regional-minima extraction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import Adjacency, Lattice, neighbor_pairs


@dataclass(frozen=True, eq=False)
class GradientMap:
    values: np.ndarray  # int64 per site
    maxval: int
    dims: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class MinimaSet:
    """Regional minima as plateaus of site indices.

    Components are ordered by their smallest site index; ``representatives``
    holds the lexicographically smallest coordinate of each, as a site index.
    """

    dims: tuple[int, ...]
    components: list[np.ndarray]
    representatives: np.ndarray

    def __len__(self) -> int:
        return len(self.components)


def lex_first(coords: np.ndarray) -> int:
    """Row index of the lexicographically smallest coordinate tuple."""
    coords = np.asarray(coords)
    return int(np.lexsort(coords.T[::-1])[0])


def site_coords(dims: Sequence[int], sites: np.ndarray) -> np.ndarray:
    sites = np.asarray(sites, dtype=np.int64)
    out = np.empty((sites.size, len(dims)), dtype=np.int64)
    rem = sites.ravel()
    for axis, d in enumerate(dims):
        out[:, axis] = rem % d
        rem = rem // d
    return out


def gradient_map(lattice: Lattice, adj: Adjacency | None = None, levels: int = 256) -> GradientMap:
    """Max Lab distance to any neighbor, linearly quantized to ``[0, levels-1]``."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    adj = adj or lattice.adjacency
    raw = np.zeros(lattice.size)
    src, dst = neighbor_pairs(lattice.dims, adj)
    if src.size:
        d = np.linalg.norm(lattice.colors[src] - lattice.colors[dst], axis=1)
        np.maximum.at(raw, src, d)
    top = raw.max() if raw.size else 0.0
    if top <= 0.0:
        values = np.zeros(lattice.size, dtype=np.int64)
    else:
        values = np.rint(raw * ((levels - 1) / top)).astype(np.int64)
    return GradientMap(values, levels - 1, lattice.dims)


def plateaus(values: np.ndarray, dims: Sequence[int], adj: Adjacency) -> np.ndarray:
    """Label every site with the id of its connected equal-value plateau."""
    n = values.size
    src, dst = neighbor_pairs(dims, adj)
    same = values[src] == values[dst]
    graph = coo_matrix(
        (np.ones(int(same.sum()), dtype=np.int8), (src[same], dst[same])), shape=(n, n)
    )
    _, comp = connected_components(graph, directed=False)
    return comp


def regional_minima(grad: GradientMap, adj: Adjacency | None = None) -> MinimaSet:
    dims = grad.dims
    adj = adj or Adjacency.for_ndim(len(dims))
    values = np.asarray(grad.values)
    comp = plateaus(values, dims, adj)
    src, dst = neighbor_pairs(dims, adj)
    is_min = np.ones(comp.max() + 1 if comp.size else 0, dtype=bool)
    is_min[comp[src[values[dst] < values[src]]]] = False

    sites = np.flatnonzero(is_min[comp])
    ids = comp[sites]
    order = np.argsort(ids, kind="stable")
    sites, ids = sites[order], ids[order]
    cuts = np.flatnonzero(np.diff(ids)) + 1
    groups = np.split(sites, cuts) if sites.size else []
    groups.sort(key=lambda g: int(g[0]))
    reps = np.array(
        [g[lex_first(site_coords(dims, g))] for g in groups], dtype=np.int64
    )
    return MinimaSet(tuple(dims), groups, reps)


def closest_minima(sites: Sequence[int], minima: MinimaSet) -> np.ndarray:
    """Representative site of the closest minimum for each input site index."""
    if len(minima) == 0:
        raise ValueError("empty minima set")
    dims = minima.dims
    members = np.concatenate(minima.components)
    starts = np.concatenate(([0], np.cumsum([g.size for g in minima.components])[:-1]))
    mcoords = site_coords(dims, members)
    rep_coords = site_coords(dims, minima.representatives)
    # ties on distance go to the lexicographically smallest representative
    lex_rank = np.empty(len(minima), dtype=np.int64)
    lex_rank[np.lexsort(rep_coords.T[::-1])] = np.arange(len(minima))

    out = np.empty(len(sites), dtype=np.int64)
    for i, p in enumerate(site_coords(dims, np.asarray(sites, dtype=np.int64))):
        d2 = ((mcoords - p) ** 2).sum(axis=1)
        per_comp = np.minimum.reduceat(d2, starts)
        best = np.flatnonzero(per_comp == per_comp.min())
        out[i] = minima.representatives[best[np.argmin(lex_rank[best])]]
    return out


def closest_minimum(site: Sequence[int], minima: MinimaSet) -> tuple[int, ...]:
    if len(minima) == 0:
        raise ValueError("empty minima set")
    dims = minima.dims
    if len(site) != len(dims) or not all(0 <= int(c) < d for c, d in zip(site, dims)):
        raise ValueError(f"site {tuple(site)} outside {dims}")
    idx, stride = 0, 1
    for c, d in zip(site, dims):
        idx += int(c) * stride
        stride *= d
    rep = closest_minima([idx], minima)[0]
    return tuple(int(v) for v in site_coords(dims, [rep])[0])
