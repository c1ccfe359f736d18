"""Self-check suite: series oracle, boundary condition, reciprocity, Helmholtz-Kirchhoff, skew symmetry."""

from dataclasses import dataclass

import numpy as np

from .forward import assemble, disk_series_oracle, eval_boundary_trace, scattered_matrix, solve_point_source
from .geometry import Obstacle, make_disk, make_kite, receiver_array, source_array
from .imaging import cross_correlation, hk_residual
from .passive import apply_noise, calibration, synth_record
from .specfun import WaveContext, green


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name:<28s} {self.value:.3e}  (tol {self.tol:.0e})"


def disk_oracle_check(k: float = 2 * np.pi, n_nodes: int = 512) -> Check:
    ctx = WaveContext(k)
    disk = Obstacle((make_disk((0.0, 0.0), 1.0, n_nodes),))
    z = np.array([100.0, 0.0])
    rx = receiver_array(64, 5.0).points
    us = scattered_matrix(assemble(disk, ctx), z[None, :], rx)[:, 0]
    ref = disk_series_oracle((0.0, 0.0), 1.0, ctx, z, rx)
    return Check("disk series oracle", float(np.max(np.abs(us - ref)) / np.max(np.abs(ref))), 1e-8)


def boundary_check(k: float = 4 * np.pi, n_nodes: int = 512, probes: int = 1024, seed: int = 7) -> Check:
    ctx = WaveContext(k)
    kite = Obstacle((make_kite(n_nodes),))
    z = np.array([100.0, 0.0])
    sol = solve_point_source(assemble(kite, ctx), z)
    t = np.sort(np.random.Generator(np.random.Philox(seed)).uniform(0, 2 * np.pi, probes))
    ui = green(ctx, kite.components[0].position(t), z)
    us = eval_boundary_trace(sol, 0, t)
    return Check("sound-soft boundary trace", float(np.max(np.abs(us + ui)) / np.max(np.abs(ui))), 1e-8)


def reciprocity_check(k: float = 4 * np.pi, pairs: int = 10, seed: int = 3) -> Check:
    ctx = WaveContext(k)
    sys = assemble(Obstacle((make_kite(),)), ctx)
    rng = np.random.Generator(np.random.Philox(seed))
    r = rng.uniform(4.0, 8.0, pairs)
    th = rng.uniform(0, 2 * np.pi, pairs)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    M = scattered_matrix(sys, pts, pts)
    return Check("reciprocity", float(np.max(np.abs(M - M.T)) / np.max(np.abs(M))), 1e-8)


def hk_check(R: float = 100.0, k: float = 2 * np.pi, L: int = 4096, pairs: int = 20) -> Check:
    ctx = WaveContext(k)
    src = source_array(L, R, 0.0, 0)
    rx = receiver_array(pairs + 1, 5.0).points
    worst = max(hk_residual(rx[i], rx[(i + 7) % len(rx)], src, ctx).residual for i in range(pairs))
    return Check(f"Helmholtz-Kirchhoff R={R:g}", worst, 5e-2)


def skew_check(k: float = 2 * np.pi, delta: float = 0.4, J: int = 64, L: int = 64) -> Check:
    ctx = WaveContext(k)
    rx = receiver_array(J, 5.0)
    rec = synth_record(Obstacle((make_kite(256),)), ctx, source_array(L, 100.0, 0.4, 1), rx)
    rec = apply_noise(rec, delta, 11)
    C = cross_correlation(rec, calibration(rx, ctx))
    return Check("C skew-Hermitian (noisy)", C.skew_hermitian_defect(), 1e-12)


def run_all() -> list[Check]:
    return [disk_oracle_check(), boundary_check(), reciprocity_check(), hk_check(), skew_check()]
