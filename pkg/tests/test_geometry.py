import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcm.errors import DomainError, UsageError
from dcm.geometry import (
    Obstacle, make_close_pair, make_disk, make_kite, make_multiscale, make_obstacle, make_peanut, make_pear,
    receiver_array, sampling_grid, source_array, SHAPES,
)
from dcm.metrics import gap_width

CURVES = {
    "kite": make_kite,
    "peanut": make_peanut,
    "pear": make_pear,
    "disk": lambda n: make_disk((0.3, -0.2), 1.3, n),
}


@pytest.mark.parametrize("maker, t, expected", [
    (make_kite, 0.0, (2.5, 2.0)),
    (make_kite, np.pi / 2, (1.35, 2.75)),
    (make_peanut, 0.0, (-1.0, -2.0)),
    (make_peanut, np.pi / 2, (-2.0, -1.5)),
    (make_pear, 0.0, (2.3, 0.0)),
    (lambda: make_disk((2.0, 3.0), 0.2), np.pi, (1.8, 3.0)),
])
def test_parametrizations(maker, t, expected):
    np.testing.assert_allclose(maker().position(t), expected, atol=1e-14)


@pytest.mark.parametrize("name", CURVES)
def test_closure_and_derivatives(name):
    c = CURVES[name](64)
    np.testing.assert_allclose(c.position(0.0), c.position(2 * np.pi), atol=1e-13)
    t = np.linspace(0.1, 6.0, 17)
    h = 1e-5
    fd1 = (c.position(t + h) - c.position(t - h)) / (2 * h)
    fd2 = (c.d1(t + h) - c.d1(t - h)) / (2 * h)
    np.testing.assert_allclose(c.d1(t), fd1, atol=1e-8)
    np.testing.assert_allclose(c.d2(t), fd2, atol=1e-8)


@pytest.mark.parametrize("name", CURVES)
def test_normal_points_outward(name):
    c = CURVES[name](128)
    t = c.nodes
    outside = c.position(t) + 1e-3 * c.normal(t)
    inside = c.position(t) - 1e-3 * c.normal(t)
    obs = Obstacle((c,))
    assert not obs.contains(outside).any()
    assert obs.contains(inside).all()
    np.testing.assert_allclose(np.hypot(*c.normal(t).T), 1.0, atol=1e-14)


def test_disk_invariants():
    d = make_disk((1.0, 2.0), 0.5, 256)
    assert d.arc_length() == pytest.approx(np.pi, rel=1e-13)
    np.testing.assert_allclose(d.curvature(d.nodes), 2.0, rtol=1e-12)
    np.testing.assert_allclose(d.centroid(), (1.0, 2.0), atol=1e-13)


def test_peanut_symmetry():
    p = make_peanut()
    t = np.linspace(0, np.pi, 9)
    a, b = p.position(t), p.position(-t)
    np.testing.assert_allclose(a[:, 0], b[:, 0], atol=1e-14)
    np.testing.assert_allclose(a[:, 1] + 2, -(b[:, 1] + 2), atol=1e-14)


@pytest.mark.parametrize("n", [8, 15, 17])
def test_node_count_validation(n):
    with pytest.raises(DomainError):
        make_kite(n)


def test_close_pair_gap():
    pair = make_close_pair()
    assert len(pair) == 2
    assert gap_width(pair) == pytest.approx(0.5, abs=0.1)


def test_multiscale_components():
    ms = make_multiscale()
    np.testing.assert_allclose(ms.components[1].centroid(), (2.0, 3.0), atol=1e-12)
    assert ms.contains([[2.0, 3.0], [0.0, 0.0]]).all()


def test_overlapping_and_nested_rejected():
    with pytest.raises(DomainError):
        Obstacle((make_disk((0, 0), 1.0), make_disk((0.5, 0), 1.0)))
    with pytest.raises(DomainError):
        Obstacle((make_disk((0, 0), 2.0), make_disk((0.1, 0), 0.5)))


def test_obstacle_registry():
    for name in SHAPES:
        assert not make_obstacle(name, 64).is_empty
    with pytest.raises(UsageError):
        make_obstacle("triangle")
    assert Obstacle().is_empty
    assert np.isinf(Obstacle().distance_to_boundary([[0.0, 0.0]])).all()


def test_receivers():
    rx = receiver_array(4, 5.0)
    np.testing.assert_allclose(rx.points, [[5, 0], [0, 5], [-5, 0], [0, -5]], atol=1e-14)
    rx = receiver_array()
    assert rx.J == 256
    np.testing.assert_allclose(np.hypot(*rx.points.T), 5.0, rtol=1e-15)
    assert rx.weight == pytest.approx(2 * np.pi * 5 / 256)


def test_sources():
    eq = source_array(16, 100.0, 0.0, 123)
    np.testing.assert_array_equal(eq.angles, 2 * np.pi * np.arange(16) / 16)
    src = source_array()
    np.testing.assert_allclose(np.hypot(*src.points.T), 100.0, rtol=1e-15)
    np.testing.assert_array_equal(src.angles, source_array().angles)
    assert not np.array_equal(src.angles, source_array(seed=1).angles)
    with pytest.raises(DomainError):
        source_array(xi=-0.1)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 300), st.floats(0, 3), st.integers(0, 2**32))
def test_source_jitter_bounds(L, xi, seed):
    src = source_array(L, 50.0, xi, seed)
    offset = src.angles * L / (2 * np.pi) - np.arange(L)
    assert np.all(offset >= -1e-9) and np.all(offset <= xi + 1e-9)


def test_grid():
    g = sampling_grid((-5, 5, -5, 5), 2, 2)
    np.testing.assert_array_equal(g.points, [[-5, 5], [5, 5], [-5, -5], [5, -5]])
    g = sampling_grid()
    assert g.shape == (200, 200)
    assert g.spacing == (10 / 199, 10 / 199)
    with pytest.raises(DomainError):
        sampling_grid((1, 0, 0, 1), 4, 4)
