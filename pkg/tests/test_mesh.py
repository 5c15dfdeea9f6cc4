import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nldg.mesh import MeshError, Mesh1D, elements_for_ratio, locate, perturbed_mesh, uniform_mesh

DELTA = 0.4


def test_uniform_nodes():
    m = uniform_mesh(10, DELTA)
    assert m.num_elements == 10
    assert m.num_dofs == 11
    np.testing.assert_allclose(m.nodes, np.linspace(0, 1, 11), atol=1e-15)
    assert m.h_max == pytest.approx(0.1)
    assert m.quasi_uniformity == pytest.approx(1.0)
    np.testing.assert_array_equal(m.interior, np.arange(1, 10))
    np.testing.assert_array_equal(m.boundary, [0, 10])


@pytest.mark.parametrize("ratio, M", [(4, 10), (8, 20), (16, 40), (128, 320), (1024, 2560)])
def test_elements_for_ratio(ratio, M):
    assert elements_for_ratio(ratio, DELTA) == M


def test_elements_for_ratio_rejects_fractional_count():
    with pytest.raises(MeshError):
        elements_for_ratio(3, 0.7)


def test_perturbed_is_deterministic():
    a = perturbed_mesh(40, DELTA, seed=7)
    b = perturbed_mesh(40, DELTA, seed=7)
    c = perturbed_mesh(40, DELTA, seed=8)
    np.testing.assert_array_equal(a.nodes, b.nodes)
    assert not np.array_equal(a.nodes, c.nodes)
    assert a == b and hash(a) == hash(b)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), M=st.integers(2, 200))
def test_perturbation_bounds(seed, M):
    m = perturbed_mesh(M, DELTA, seed)
    h = 1.0 / M
    base = np.arange(M + 1) / M
    assert m.nodes[0] == 0.0 and m.nodes[-1] == 1.0
    assert np.all(np.abs(m.nodes - base) <= 0.1 * h + 1e-15)
    assert np.all(np.diff(m.nodes) > 0)
    # (1 + 0.2) / (1 - 0.2) = 1.5 is the worst possible ratio
    assert m.quasi_uniformity <= 1.5 + 1e-12


def test_pinned_nodes_are_exact_and_others_unchanged():
    M = 40
    free = perturbed_mesh(M, DELTA, seed=3)
    pinned = perturbed_mesh(M, DELTA, seed=3, pinned=(0.4, 0.6))
    assert pinned.nodes[16] == 0.4
    assert pinned.nodes[24] == 0.6
    others = np.ones(M + 1, dtype=bool)
    others[[16, 24]] = False
    np.testing.assert_array_equal(pinned.nodes[others], free.nodes[others])
    assert pinned.family == "pinned"


def test_zero_amplitude_is_uniform():
    np.testing.assert_array_equal(perturbed_mesh(20, DELTA, 5, amplitude=0.0).nodes, uniform_mesh(20, DELTA).nodes)


def test_pin_must_be_grid_point():
    with pytest.raises(MeshError):
        perturbed_mesh(7, DELTA, 0, pinned=(0.4,))


@pytest.mark.parametrize("x, expected", [(0.0, 0), (0.05, 0), (0.1, 0), (0.1000001, 1), (0.95, 9), (1.0, 9)])
def test_locate_lower_index_on_ties(x, expected):
    assert locate(uniform_mesh(10, DELTA), x) == expected


@pytest.mark.parametrize("x", [-0.01, 1.01])
def test_locate_outside(x):
    with pytest.raises(MeshError):
        locate(uniform_mesh(10, DELTA), x)


@pytest.mark.parametrize("nodes", [[0.0, 0.5, 0.5, 1.0], [0.1, 0.5, 1.0], [0.0, 0.7, 0.3, 1.0], [0.0, 1.0]])
def test_invalid_nodes(nodes):
    with pytest.raises(MeshError):
        Mesh1D(np.array(nodes), DELTA)


def test_bad_element_count():
    with pytest.raises(MeshError):
        uniform_mesh(1, DELTA)
    with pytest.raises(MeshError):
        perturbed_mesh(10, DELTA, 0, amplitude=0.6)
