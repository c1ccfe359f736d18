import mpmath as mp
import numpy as np
import pytest

from dcm.errors import AccuracyError, DomainError
from dcm.forward import (
    active_scatter_matrix, assemble, bessel_jn_all, bessel_yn_all, disk_series_oracle, eval_boundary_trace,
    eval_scattered, eval_total, kress_apply, kress_weights, scattered_matrix, solve_point_source,
    trig_interpolate,
)
from dcm.geometry import Obstacle, make_disk, make_kite, make_pear, receiver_array
from dcm.specfun import WaveContext, green

Z = np.array([100.0, 0.0])


@pytest.fixture(scope="module")
def kite_sys():
    return assemble(Obstacle((make_kite(512),)), WaveContext(4 * np.pi))


@pytest.fixture(scope="module")
def disk_sys():
    return assemble(Obstacle((make_disk((0.0, 0.0), 1.0, 512),)), WaveContext(2 * np.pi))


def test_kress_weights_direct_sum():
    n = 8
    t = 0.37
    m = np.arange(1, n)
    expected = [-(2 * np.pi / n) * np.sum(np.cos(m * (t - tj)) / m) - np.pi / n**2 * np.cos(n * (t - tj))
                for tj in np.pi * np.arange(2 * n) / n]
    np.testing.assert_allclose(kress_weights(t - np.pi * np.arange(2 * n) / n, n), expected, atol=1e-14)


def test_kress_apply_matches_weights():
    rng = np.random.default_rng(4)
    n = 24
    t = rng.uniform(0, 2 * np.pi, 5)
    g = rng.normal(size=(5, 2 * n)) + 1j * rng.normal(size=(5, 2 * n))
    nodes = np.pi * np.arange(2 * n) / n
    direct = np.array([kress_weights(ti - nodes, n) @ gi for ti, gi in zip(t, g)])
    np.testing.assert_allclose(kress_apply(g, t), direct, atol=1e-13)


@pytest.mark.parametrize("k", [2 * np.pi, 4 * np.pi])
def test_disk_oracle_agreement(k):
    ctx = WaveContext(k)
    sys = assemble(Obstacle((make_disk((0.0, 0.0), 1.0, 512),)), ctx)
    rx = receiver_array(64, 5.0).points
    us = scattered_matrix(sys, Z[None, :], rx)[:, 0]
    ref = disk_series_oracle((0.0, 0.0), 1.0, ctx, Z, rx)
    assert np.max(np.abs(us - ref)) / np.max(np.abs(ref)) < 1e-8


def test_disk_oracle_total_field(disk_sys):
    ctx = WaveContext(disk_sys.k)
    sol = solve_point_source(disk_sys, Z)
    pts = 3.0 * np.column_stack([np.cos(np.linspace(0, 6, 20)), np.sin(np.linspace(0, 6, 20))])
    ref = disk_series_oracle((0, 0), 1.0, ctx, Z, pts) + green(ctx, pts, Z)
    tot = eval_total(sol, pts)
    assert np.max(np.abs(tot - ref)) / np.max(np.abs(ref)) < 1e-8
    np.testing.assert_allclose(tot - eval_scattered(sol, pts), green(ctx, pts, Z), rtol=1e-15, atol=1e-18)


def test_condition_and_determinism(disk_sys):
    assert np.isfinite(disk_sys.condition_estimate())
    again = assemble(disk_sys.obstacle, WaveContext(disk_sys.k))
    np.testing.assert_array_equal(disk_sys.matrix, again.matrix)


def test_self_convergence_kite():
    ctx = WaveContext(2 * np.pi)
    kite = Obstacle((make_kite(256),))
    coarse = solve_point_source(assemble(kite, ctx), Z).density
    fine = solve_point_source(assemble(kite, ctx, n_nodes=512), Z).density
    assert np.max(np.abs(fine[::2] - coarse)) / np.max(np.abs(fine)) < 1e-9


def test_boundary_condition(kite_sys):
    sol = solve_point_source(kite_sys, Z)
    kite = kite_sys.obstacle.components[0]
    t = np.random.default_rng(2).uniform(0, 2 * np.pi, 512)
    ui = green(WaveContext(kite_sys.k), kite.position(t), Z)
    assert np.max(np.abs(eval_boundary_trace(sol, 0, t) + ui)) / np.max(np.abs(ui)) < 1e-8


def test_boundary_condition_two_components():
    ctx = WaveContext(2 * np.pi)
    obs = Obstacle((make_pear(256), make_disk((2.0, 3.0), 0.2, 128)))
    sol = solve_point_source(assemble(obs, ctx), Z)
    t = np.linspace(0.01, 6.2, 97)
    for i, c in enumerate(obs):
        ui = green(ctx, c.position(t), Z)
        assert np.max(np.abs(eval_boundary_trace(sol, i, t) + ui)) / np.max(np.abs(ui)) < 1e-8


def test_reciprocity_two_solves(kite_sys):
    a, b = np.array([-3.0, 1.0]), np.array([4.0, -2.5])
    ab = eval_scattered(solve_point_source(kite_sys, b), a)
    ba = eval_scattered(solve_point_source(kite_sys, a), b)
    assert abs(ab - ba) / max(abs(ab), abs(ba)) < 1e-8


def test_active_matrix(kite_sys):
    rx = receiver_array(32, 5.0)
    M = active_scatter_matrix(kite_sys.obstacle, WaveContext(kite_sys.k), rx, system=kite_sys)
    assert np.max(np.abs(M - M.T)) / np.max(np.abs(M)) < 1e-8
    np.testing.assert_array_equal(active_scatter_matrix(Obstacle(), WaveContext(1.0), rx), 0)


def test_linearity(kite_sys):
    sol = solve_point_source(kite_sys, Z)
    pts = np.array([[4.0, 4.0], [-4.0, 0.5]])
    np.testing.assert_allclose(eval_scattered(sol.scaled(2 - 3j), pts), (2 - 3j) * eval_scattered(sol, pts),
                               rtol=1e-14)


def test_radiation_condition(kite_sys):
    sol = solve_point_source(kite_sys, Z)
    k = kite_sys.k
    d = np.array([np.cos(0.7), np.sin(0.7)])
    h = 1e-4
    vals = []
    for r in (1e2, 1e3, 1e4):
        u = eval_scattered(sol, np.array([(r - h) * d, r * d, (r + h) * d]))
        vals.append(abs(np.sqrt(r) * ((u[2] - u[0]) / (2 * h) - 1j * k * u[1])))
    assert vals[0] > vals[1] > vals[2]


def test_near_boundary_evaluation_refused(kite_sys):
    kite = kite_sys.obstacle.components[0]
    p = kite.position(1.0) + 1e-3 * kite.normal(1.0)
    with pytest.raises(AccuracyError):
        eval_scattered(solve_point_source(kite_sys, Z), p)
    with pytest.raises(DomainError):
        solve_point_source(kite_sys, np.array([2.0, 2.0]))


def test_assemble_errors():
    ctx = WaveContext(1.0)
    with pytest.raises(DomainError):
        assemble(Obstacle((make_kite(512),)), ctx, eta=0.0)
    with pytest.raises(DomainError):
        assemble(Obstacle((make_kite(16),)), ctx)


def test_trig_interpolation_exact():
    t = 2 * np.pi * np.arange(32) / 32
    f = lambda s: np.cos(3 * s) + 0.5j * np.sin(7 * s)
    s = np.array([0.1, 2.2, 5.9])
    np.testing.assert_allclose(trig_interpolate(f(t), s), f(s), atol=1e-14)


@pytest.mark.parametrize("x", [0.3, 2 * np.pi, 25.0])
def test_recurrences_against_mpmath(x):
    J = bessel_jn_all(40, np.array(x))
    Y = bessel_yn_all(12, np.array(x))
    for n in (0, 3, 12, 40):
        ref = float(mp.besselj(n, x))
        assert abs(J[n] - ref) <= 1e-12 * max(abs(ref), 1e-300) + 1e-15
    for n in (0, 5, 12):
        ref = float(mp.bessely(n, x))
        assert abs(Y[n] - ref) <= 1e-11 * abs(ref)


def test_series_oracle_properties():
    ctx = WaveContext(2 * np.pi)
    a, b = np.array([3.0, 1.0]), np.array([-2.0, 4.0])
    ab = disk_series_oracle((0, 0), 1.0, ctx, a, b)
    ba = disk_series_oracle((0, 0), 1.0, ctx, b, a)
    assert abs(ab - ba) < 1e-13 * abs(ab)
    assert abs(disk_series_oracle((0, 0), 1.0, ctx, a, b, n_max=60) - disk_series_oracle(
        (0, 0), 1.0, ctx, a, b, n_max=80)) < 1e-13 * abs(ab)
    # boundary trace: u^s + phi = 0 on the disk
    th = np.linspace(0, 2 * np.pi, 13)
    bnd = (1 + 1e-15) * np.column_stack([np.cos(th), np.sin(th)])
    us = disk_series_oracle((0, 0), 1.0, ctx, a, bnd)
    assert np.max(np.abs(us + green(ctx, bnd, a))) < 1e-12
    with pytest.raises(DomainError):
        disk_series_oracle((0, 0), 1.0, ctx, a, b, n_max=5)
