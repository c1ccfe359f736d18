"""Passive measurements: total fields from randomly placed sources, noise, calibration."""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, UsageError
from .forward import BiesSystem, assemble, scattered_matrix
from .geometry import Obstacle, ReceiverArray, SourceArray
from .specfun import WaveContext, green, green_imag


@dataclass(frozen=True)
class PassiveRecord:
    """Total field u(x_j, z_l) as a complex J x L matrix.

    ``scattered`` keeps the u^s part of a clean synthesis; it is never
    available to a passive imaging method and exists for the RTM baseline and
    diagnostics only.
    """

    data: np.ndarray = field(repr=False)
    receivers: ReceiverArray
    sources: SourceArray
    k: float
    delta: float = 0.0
    noise_seed: int | None = None
    scattered: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.data.shape != (self.receivers.J, self.sources.L):
            raise UsageError(
                f"record shape {self.data.shape} does not match J={self.receivers.J}, L={self.sources.L}")

    @property
    def shape(self):
        return self.data.shape


def synth_record(obstacle: Obstacle, ctx: WaveContext, sources: SourceArray, receivers: ReceiverArray,
                 system: BiesSystem | None = None, **assemble_kw) -> PassiveRecord:
    """Clean total field green(x_j, z_l) + u^s(x_j, z_l), one factorisation for all sources."""
    incident = green(ctx, receivers.points[:, None, :], sources.points[None, :, :])
    if obstacle.is_empty:
        us = np.zeros_like(incident)
    else:
        sys = system if system is not None else assemble(obstacle, ctx, **assemble_kw)
        us = scattered_matrix(sys, sources.points, receivers.points)
    return PassiveRecord(incident + us, receivers, sources, ctx.k, scattered=us)


def noise_draws(shape, seed: int) -> np.ndarray:
    """Real standard normal draws, one per entry, from a Philox stream."""
    return np.random.Generator(np.random.Philox(seed)).standard_normal(shape)


def apply_noise(rec: PassiveRecord, delta: float, seed: int = 0) -> PassiveRecord:
    """Multiplicative noise u (1 + delta * Delta_jl) with Delta_jl ~ N(0, 1) i.i.d."""
    if not np.isfinite(delta) or delta < 0:
        raise DomainError(f"noise level must be >= 0, got {delta!r}")
    if delta == 0:
        return replace(rec, delta=0.0, noise_seed=seed)
    noisy = rec.data * (1.0 + delta * noise_draws(rec.shape, seed))
    return replace(rec, data=noisy, delta=float(delta), noise_seed=seed)


@dataclass(frozen=True)
class CalibrationMatrix:
    """Im phi(x_j, x_m) = J_0(k|x_j - x_m|)/4 over receiver pairs."""

    values: np.ndarray = field(repr=False)
    receivers: ReceiverArray
    k: float


def calibration(receivers: ReceiverArray, ctx: WaveContext) -> CalibrationMatrix:
    p = receivers.points
    vals = green_imag(ctx, p[:, None, :], p[None, :, :])
    vals = 0.5 * (vals + vals.T)
    np.fill_diagonal(vals, 0.25)
    return CalibrationMatrix(vals, receivers, ctx.k)
