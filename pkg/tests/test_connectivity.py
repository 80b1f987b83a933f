import math

import numpy as np
import pytest

from isf import Lattice, PathCostSpec, SeedSet, Variant, extend_cost, trivial_cost
from isf.gradient import GradientMap


def _seeds():
    lat = Lattice.from_gray(np.zeros((3, 3), np.uint8))
    return SeedSet.from_coords(lat, [(0, 0), (2, 1)])


def test_trivial_cost_by_index_and_coordinate():
    s = _seeds()
    assert trivial_cost(0, s) == 0.0
    assert trivial_cost((2, 1), s) == 0.0
    assert trivial_cost(4, s) == math.inf
    assert trivial_cost((1, 1), s) == math.inf
    assert trivial_cost(0, None) == math.inf


def test_f1_example_adds_color_power_and_step():
    spec = PathCostSpec(Variant.F1, alpha=0.5, beta=12)
    assert extend_cost(spec, 10.0, (52, 0, 0), (50, 0, 0)) == 12.0


@pytest.mark.parametrize("variant", [Variant.F1, Variant.F2])
def test_zero_alpha_is_a_pure_path_length(variant):
    spec = PathCostSpec(variant, alpha=0.0)
    assert extend_cost(spec, 3.5, (90, 10, -4), (0, 0, 0), step=1.0) == 4.5


def test_f3_takes_the_maximum():
    grad = GradientMap(np.zeros(1, np.int64), 255, (1, 1))
    spec = PathCostSpec(Variant.F3, gradient=grad)
    assert extend_cost(spec, 5, None, None, grad_t=3) == 5
    assert extend_cost(spec, 2, None, None, grad_t=7) == 7


def test_f3_path_cost_is_max_gradient_excluding_origin():
    grad = GradientMap(np.zeros(1, np.int64), 255, (1, 1))
    spec = PathCostSpec(Variant.F3, gradient=grad)
    path_grad = [200, 4, 9, 3]
    c = 0.0
    for g in path_grad[1:]:
        c = extend_cost(spec, c, None, None, grad_t=g)
    assert c == max(path_grad[1:])


def test_extending_an_infinite_path_is_an_error():
    with pytest.raises(ValueError):
        extend_cost(PathCostSpec(), math.inf, (0, 0, 0), (0, 0, 0))


def test_path_cost_parameters_are_validated():
    with pytest.raises(ValueError):
        PathCostSpec(alpha=-0.1)
    with pytest.raises(ValueError):
        PathCostSpec(beta=0.5)
    with pytest.raises(ValueError):
        PathCostSpec(Variant.F3)
    assert PathCostSpec("f1-root-color").variant is Variant.F1
