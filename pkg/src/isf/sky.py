"""Sky region extraction from superpixels by mean-color merging."""
from __future__ import annotations

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .lattice import Lattice, neighbor_pairs


def superpixel_means(lattice: Lattice, labels: np.ndarray) -> np.ndarray:
    lab = np.asarray(labels).ravel()
    k = int(lab.max())
    size = np.bincount(lab, minlength=k + 1).astype(np.float64)
    size[size == 0] = 1.0
    return np.stack(
        [np.bincount(lab, lattice.colors[:, c], k + 1) for c in range(3)], axis=1
    ) / size[:, None]


def sky_mask(lattice: Lattice, labels: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of the largest merged region touching the top row.

    Adjacent superpixels whose Lab mean colors are within ``threshold`` are
    joined (single linkage over the region adjacency graph).
    """
    if lattice.ndim != 2:
        raise ValueError("sky segmentation needs a 2D image")
    lab = np.asarray(labels).ravel()
    means = superpixel_means(lattice, lab)
    src, dst = neighbor_pairs(lattice.dims, lattice.adjacency)
    cross = lab[src] < lab[dst]
    edges = np.unique(np.stack([lab[src][cross], lab[dst][cross]], axis=1), axis=0)

    regions = DisjointSet(np.unique(lab).tolist())
    if edges.size:
        dist = np.linalg.norm(means[edges[:, 0]] - means[edges[:, 1]], axis=1)
        for a, b in edges[dist <= threshold]:
            regions.merge(int(a), int(b))

    lookup = np.zeros(int(lab.max()) + 1, dtype=np.int64)
    present = np.unique(lab)
    lookup[present] = [regions[int(v)] for v in present]
    region = lookup[lab]

    nx = lattice.dims[0]
    top = np.unique(region[:nx])
    sizes = np.array([np.count_nonzero(region == r) for r in top])
    best = top[np.flatnonzero(sizes == sizes.max()).min()]
    return lattice.as_image(region == best)
