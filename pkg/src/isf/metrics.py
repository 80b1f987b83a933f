"""Segmentation quality measures.

Label maps are plain integer arrays in array layout (``(ny, nx)`` or
``(nz, ny, nx)``). Boundaries use the same 4-/6-adjacency as segmentation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


class DimensionError(ValueError):
    pass


def _check(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def boundary_mask(labels: np.ndarray) -> np.ndarray:
    """Sites with at least one axis-neighbor carrying a different label."""
    labels = np.asarray(labels)
    out = np.zeros(labels.shape, dtype=bool)
    for axis in range(labels.ndim):
        lo = [slice(None)] * labels.ndim
        hi = [slice(None)] * labels.ndim
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        diff = labels[tuple(lo)] != labels[tuple(hi)]
        out[tuple(lo)] |= diff
        out[tuple(hi)] |= diff
    return out


def boundary_recall(labels: np.ndarray, gt: np.ndarray, radius: int = 2) -> float:
    """Fraction of ground-truth boundary sites within Chebyshev ``radius`` of a
    superpixel boundary site."""
    labels, gt = _check(labels, gt)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    gt_b = boundary_mask(gt)
    total = int(gt_b.sum())
    if total == 0:
        return 1.0
    sp_b = boundary_mask(labels)
    if radius:
        sp_b = ndimage.maximum_filter(sp_b, size=2 * radius + 1, mode="constant", cval=False)
    return float(np.count_nonzero(gt_b & sp_b)) / total


def _overlaps(labels: np.ndarray, gt: np.ndarray):
    pairs, counts = np.unique(
        np.stack([labels.ravel(), gt.ravel()]), axis=1, return_counts=True
    )
    return pairs[0], pairs[1], counts


def undersegmentation_error(labels: np.ndarray, gt: np.ndarray) -> float:
    """Leakage ``sum_P min(|P & G*|, |P - G*|) / N`` with ``G*`` the
    ground-truth segment overlapping ``P`` most."""
    labels, gt = _check(labels, gt)
    if labels.size == 0:
        return 0.0
    sp, _, counts = _overlaps(labels, gt)
    ids, inv = np.unique(sp, return_inverse=True)
    size = np.bincount(inv, counts)
    best = np.zeros(ids.size)
    np.maximum.at(best, inv, counts)
    return float(np.minimum(best, size - best).sum() / labels.size)


def dice(mask_a: np.ndarray, mask_b: np.ndarray) -> float:
    a, b = _check(np.asarray(mask_a, dtype=bool), np.asarray(mask_b, dtype=bool))
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * np.count_nonzero(a & b) / total


def majority_object_labels(supervoxels: np.ndarray, objects: np.ndarray) -> np.ndarray:
    """Give each supervoxel the object (non-zero label) holding strictly more
    than half of its sites; background 0 otherwise."""
    sv, obj = _check(supervoxels, objects)
    sp, ob, counts = _overlaps(sv, obj)
    ids, inv = np.unique(sp, return_inverse=True)
    size = np.bincount(inv, counts)
    winner = np.zeros(ids.size, dtype=obj.dtype)
    hit = (ob != 0) & (2 * counts > size[inv])
    winner[inv[hit]] = ob[hit]
    return winner[np.searchsorted(ids, sv)]


def isoperimetric_compactness(labels: np.ndarray) -> float:
    """Mean ``4 pi A / P^2`` over superpixels of a 2D label map.

    Perimeter counts unit pixel edges facing another label or the image
    border.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("compactness is defined for 2D label maps")
    ids, inv = np.unique(labels, return_inverse=True)
    inv = inv.reshape(labels.shape)
    area = np.bincount(inv.ravel(), minlength=ids.size).astype(np.float64)
    perim = np.zeros(ids.size)
    padded = np.pad(inv, 1, constant_values=-1)
    core = padded[1:-1, 1:-1]
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        nb = padded[1 + dy : padded.shape[0] - 1 + dy, 1 + dx : padded.shape[1] - 1 + dx]
        edge = nb != core
        perim += np.bincount(core[edge], minlength=ids.size)
    return float(np.mean(4.0 * np.pi * area / perim**2))


@dataclass(frozen=True)
class MetricResult:
    br: float
    ue: float
    dice: float
    k: int


def evaluate(labels: np.ndarray, gt: np.ndarray, radius: int = 2) -> MetricResult:
    """BR, UE and a region Dice against ground truth.

    Dice here scores the majority relabeling of ``labels`` onto the non-zero
    ``gt`` objects; for gt maps without background (0) it is 1.0 when every
    superpixel is within one segment.
    """
    labels, gt = _check(labels, gt)
    assigned = majority_object_labels(labels, gt)
    objects = np.unique(gt[gt != 0])
    if objects.size == 0:
        d = dice(assigned != 0, gt != 0)
    else:
        d = float(np.mean([dice(assigned == o, gt == o) for o in objects]))
    return MetricResult(
        boundary_recall(labels, gt, radius),
        undersegmentation_error(labels, gt),
        d,
        int(np.unique(labels).size),
    )
