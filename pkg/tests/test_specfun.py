import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcm.errors import DomainError, SingularityError
from dcm.specfun import (
    WaveContext, bessel_j0, bessel_j1, bessel_y0, bessel_y1, green, green_imag, green_normal_derivative,
    hankel1_0, hankel1_1,
)

mp.mp.dps = 30
ARGS = [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 7.5, 20.0, 50.0, 300.0]


@pytest.mark.parametrize("t", ARGS)
@pytest.mark.parametrize("fn, ref", [
    (bessel_j0, lambda t: mp.besselj(0, t)),
    (bessel_j1, lambda t: mp.besselj(1, t)),
    (bessel_y0, lambda t: mp.bessely(0, t)),
    (bessel_y1, lambda t: mp.bessely(1, t)),
])
def test_bessel_against_arbitrary_precision(fn, ref, t):
    exact = float(ref(mp.mpf(t)))
    # absolute error relative to the envelope sqrt(2/(pi t)) near zeros
    scale = max(abs(exact), min(1.0, np.sqrt(2 / (np.pi * t))))
    assert abs(fn(t) - exact) <= 1e-13 * scale


def test_frozen_values():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j0(1.0) == pytest.approx(0.7651976866, abs=1e-10)
    assert bessel_y0(1.0) == pytest.approx(0.0882569642, abs=1e-10)
    h = hankel1_0(1.0)
    assert h.real == pytest.approx(0.7651976866, abs=1e-10)
    assert h.imag == pytest.approx(0.0882569642, abs=1e-10)


@pytest.mark.parametrize("t", [0.3, 2.0, 11.0, 40.0])
def test_wronskian(t):
    assert bessel_j1(t) * bessel_y0(t) - bessel_j0(t) * bessel_y1(t) == pytest.approx(2 / (np.pi * t), rel=1e-13)


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0, 50.0])
def test_hankel_envelope(t):
    assert abs(hankel1_0(t)) <= np.sqrt(2 / (np.pi * t))


def test_hankel_derivative():
    h = 1e-5
    fd = (hankel1_0(3 + h) - hankel1_0(3 - h)) / (2 * h)
    assert abs(hankel1_1(3.0) + fd) < 1e-8


@pytest.mark.parametrize("fn", [bessel_y0, bessel_y1, hankel1_0, hankel1_1])
@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_singular_domain(fn, bad):
    with pytest.raises(DomainError):
        fn(bad)


@pytest.mark.parametrize("bad", [-1e-300, np.nan])
def test_j_domain(bad):
    with pytest.raises(DomainError):
        bessel_j0(bad)


def test_vectorized_shapes():
    t = np.linspace(0.1, 10, 12).reshape(3, 4)
    assert bessel_j0(t).shape == (3, 4)
    assert isinstance(bessel_j0(1.0), float)


def test_green_reference_value():
    ctx = WaveContext(2 * np.pi)
    x = np.zeros(2)
    z = np.array([1 / (2 * np.pi), 0.0])
    # j0(1)/4 = 0.19129942165, y0(1)/4 = 0.02206424105
    assert green(ctx, x, z) == pytest.approx(-0.02206424105 + 0.19129942165j, abs=1e-10)
    assert green_imag(ctx, x, z) == pytest.approx(0.7651976866 / 4, abs=1e-10)
    assert green_imag(ctx, x, x) == 0.25


def test_green_errors():
    ctx = WaveContext(1.0)
    with pytest.raises(SingularityError):
        green(ctx, [1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        WaveContext(0.0)
    with pytest.raises(DomainError):
        green(ctx, [np.nan, 0.0], [1.0, 0.0])


pts = st.tuples(st.floats(-20, 20), st.floats(-20, 20))


@settings(max_examples=60, deadline=None)
@given(pts, pts, st.floats(0.1, 40))
def test_green_symmetry_and_imag(x, z, k):
    x, z = np.array(x), np.array(z)
    if np.hypot(*(x - z)) < 1e-6:
        return
    ctx = WaveContext(k)
    g = green(ctx, x, z)
    assert g == green(ctx, z, x)
    assert abs(g.imag - green_imag(ctx, x, z)) <= 1e-15


def test_green_broadcast_matrix():
    ctx = WaveContext(3.0)
    a = np.random.default_rng(0).normal(size=(5, 2))
    b = a + 10
    G = green(ctx, a[:, None, :], b[None, :, :])
    assert G.shape == (5, 5)
    assert G[2, 3] == green(ctx, a[2], b[3])


def test_green_helmholtz_five_point():
    """Discrete Laplacian of green + k^2 green vanishes away from the source at O(h^2)."""
    ctx = WaveContext(2 * np.pi)
    x0 = np.array([0.7, -0.4])
    errs = []
    for h in (1e-2, 5e-3):
        e = np.array([[h, 0], [-h, 0], [0, h], [0, -h]])
        lap = (green(ctx, x0 + e, np.zeros(2)).sum() - 4 * green(ctx, x0, np.zeros(2))) / h**2
        errs.append(abs(lap + ctx.k**2 * green(ctx, x0, np.zeros(2))))
    assert errs[1] < errs[0] / 3.5


def test_normal_derivative():
    ctx = WaveContext(2 * np.pi)
    x = np.array([1.0, 0.0])
    y = np.zeros(2)
    n = np.array([0.0, 1.0])
    assert green_normal_derivative(ctx, x, y, n) == 0
    n = np.array([0.6, 0.8])
    h = 1e-6
    fd = (green(ctx, x, y + h * n) - green(ctx, x, y - h * n)) / (2 * h)
    val = green_normal_derivative(ctx, x, y, n)
    assert abs(val - fd) < 1e-7
    assert green_normal_derivative(ctx, x, y, -n) == -val
    with pytest.raises(DomainError):
        green_normal_derivative(ctx, x, y, np.array([1.0, 1.0]))
