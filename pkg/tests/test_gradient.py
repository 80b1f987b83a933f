import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isf import Lattice, closest_minimum, gradient_map, regional_minima
from isf.gradient import GradientMap, MinimaSet

import oracles


def _line(lightness):
    colors = np.array([[v, 0.0, 0.0] for v in lightness])
    return Lattice((len(lightness), 1), colors, channels=1)


def _grad(values, dims):
    return GradientMap(np.asarray(values, dtype=np.int64).ravel(), 255, tuple(dims))


def test_constant_lattice_has_zero_gradient():
    g = gradient_map(Lattice.from_gray(np.full((5, 4), 90, np.uint8)))
    assert not g.values.any()


def test_step_edge_sites_carry_full_scale():
    g = gradient_map(_line([0, 0, 100, 100]))
    assert g.values.tolist() == [0, 255, 255, 0]
    assert g.maxval == 255


def test_single_site_gradient_is_zero():
    assert gradient_map(_line([40])).values.tolist() == [0]


def test_gradient_levels_bound_the_values():
    rng = np.random.default_rng(1)
    lat = Lattice.from_rgb(rng.integers(0, 256, (9, 7, 3)).astype(np.uint8))
    g = gradient_map(lat, levels=16)
    assert g.values.min() >= 0 and g.values.max() == 15


def test_constant_map_is_one_global_minimum():
    m = regional_minima(_grad(np.zeros(12), (4, 3)))
    assert len(m) == 1
    assert m.components[0].tolist() == list(range(12))


def test_single_pit_is_its_own_component():
    v = np.full((3, 3), 5)
    v[1, 1] = 1
    m = regional_minima(_grad(v, (3, 3)))
    assert [c.tolist() for c in m.components] == [[4]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(2, 8))
def test_regional_minima_match_flood_fill(seed, nx, ny):
    rng = np.random.default_rng(seed)
    values = rng.integers(0, 4, nx * ny)
    m = regional_minima(_grad(values, (nx, ny)))
    got = sorted(c.tolist() for c in m.components)
    assert got == oracles.regional_minima(values.tolist(), (nx, ny))


def test_regional_minima_in_3d():
    rng = np.random.default_rng(4)
    values = rng.integers(0, 3, 4 * 3 * 3)
    m = regional_minima(_grad(values, (4, 3, 3)))
    assert sorted(c.tolist() for c in m.components) == oracles.regional_minima(
        values.tolist(), (4, 3, 3)
    )


def _minima(components, dims):
    comps = [np.array(sorted(c)) for c in components]
    reps = np.array([min(c, key=lambda i: oracles.coords_of_index(i, dims)) for c in comps])
    return MinimaSet(dims, comps, reps)


def test_site_inside_a_minimum_maps_to_its_representative():
    dims = (5, 5)
    m = _minima([[6, 7, 11], [23]], dims)
    assert closest_minimum((2, 2), m) == (1, 1)


def test_equidistant_minima_resolve_lexicographically():
    dims = (5, 5)
    m = _minima([[oracles.index_of((0, 4), dims)], [oracles.index_of((4, 0), dims)]], dims)
    assert closest_minimum((2, 2), m) == (0, 4)


def test_closest_minimum_rejects_bad_queries():
    with pytest.raises(ValueError):
        closest_minimum((0, 0), MinimaSet((3, 3), [], np.array([], dtype=np.int64)))
    with pytest.raises(ValueError):
        closest_minimum((3, 0), _minima([[0]], (3, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_closest_minimum_matches_all_pairs_scan(seed):
    rng = np.random.default_rng(seed)
    dims = (7, 6)
    values = rng.integers(0, 5, 42)
    m = regional_minima(_grad(values, dims))
    comps = [c.tolist() for c in m.components]
    for c in oracles.coords_of(dims):
        assert closest_minimum(c, m) == oracles.closest_minimum(c, comps, dims)
