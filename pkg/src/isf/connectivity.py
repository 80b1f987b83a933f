"""Path-cost (connectivity) functions.

Three extension rules share the trivial-path rule (0 at seeds, +inf
elsewhere):

* ``f1-root-color``: ``C(s) + (|I(t) - I(root)| * alpha) ** beta + |s,t|``
* ``f2-mean-color``: same form with the root superpixel's mean color
* ``f3-gradient-max``: ``max(C(s), D(t))``
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .gradient import GradientMap

INF = math.inf


class Variant(str, Enum):
    F1 = "f1-root-color"
    F2 = "f2-mean-color"
    F3 = "f3-gradient-max"

    @property
    def code(self) -> int:
        return {Variant.F1: 0, Variant.F2: 1, Variant.F3: 2}[self]


@dataclass(frozen=True, eq=False)
class PathCostSpec:
    variant: Variant = Variant.F2
    alpha: float = 0.5
    beta: float = 12.0
    gradient: GradientMap | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.beta >= 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if self.variant is Variant.F3 and self.gradient is None:
            raise ValueError("f3 needs a gradient map")


def trivial_cost(site: int | Sequence[int], seeds) -> float:
    """0 for seed sites, +inf otherwise. ``site`` is an index or coordinate."""
    if seeds is None or len(seeds) == 0:
        return INF
    if isinstance(site, (int, np.integer)):
        hit = int(site) in set(seeds.sites.tolist())
    else:
        hit = tuple(int(c) for c in site) in set(seeds.coords)
    return 0.0 if hit else INF


def extend_cost(
    spec: PathCostSpec,
    cost_s: float,
    color_t: Sequence[float],
    ref_color: Sequence[float],
    step: float = 1.0,
    grad_t: int = 0,
) -> float:
    if math.isinf(cost_s) or math.isnan(cost_s):
        raise ValueError("cannot extend a path of infinite cost")
    if spec.variant is Variant.F3:
        return max(float(cost_s), float(grad_t))
    d0, d1, d2 = (float(a) - float(b) for a, b in zip(color_t, ref_color))
    diff = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    return float(cost_s) + (diff * spec.alpha) ** spec.beta + float(step)
