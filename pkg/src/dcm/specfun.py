"""Cylinder functions and Helmholtz Green kernels in two dimensions.

Points are numpy arrays whose last axis has length 2; every kernel broadcasts
over leading axes, so ``green(ctx, x[:, None], y[None, :])`` builds a full
interaction matrix.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError, SingularityError

__all__ = [
    "WaveContext",
    "as_points",
    "bessel_j0",
    "bessel_j1",
    "bessel_y0",
    "bessel_y1",
    "hankel1_0",
    "hankel1_1",
    "distance",
    "green",
    "green_imag",
    "green_normal_derivative",
]


@dataclass(frozen=True)
class WaveContext:
    """Wavenumber of the time-harmonic problem (radians per unit length)."""

    k: float

    def __post_init__(self):
        k = float(self.k)
        if not np.isfinite(k) or k <= 0:
            raise DomainError(f"wavenumber must be positive and finite, got {self.k!r}")
        object.__setattr__(self, "k", k)

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.k


def as_points(p) -> np.ndarray:
    """Coerce to a float array of shape (..., 2) with finite entries."""
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1:] != (2,):
        raise DomainError(f"points need a trailing axis of length 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("point coordinates must be finite")
    return arr


def _check_arg(t, strictly_positive: bool) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    bad = arr <= 0 if strictly_positive else arr < 0
    if np.any(bad):
        bound = "> 0" if strictly_positive else ">= 0"
        raise DomainError(f"Bessel argument must be {bound}")
    return arr


def _ret(value: np.ndarray, t):
    return value[()] if np.ndim(t) == 0 else value


def bessel_j0(t):
    return _ret(sp.j0(_check_arg(t, False)), t)


def bessel_j1(t):
    return _ret(sp.j1(_check_arg(t, False)), t)


def bessel_y0(t):
    return _ret(sp.y0(_check_arg(t, True)), t)


def bessel_y1(t):
    return _ret(sp.y1(_check_arg(t, True)), t)


def hankel1_0(t):
    """H_0^(1)(t) = J_0(t) + i Y_0(t) for t > 0."""
    arr = _check_arg(t, True)
    return _ret(sp.j0(arr) + 1j * sp.y0(arr), t)


def hankel1_1(t):
    """H_1^(1)(t) = J_1(t) + i Y_1(t) for t > 0."""
    arr = _check_arg(t, True)
    return _ret(sp.j1(arr) + 1j * sp.y1(arr), t)


def distance(x, z) -> np.ndarray:
    d = as_points(x) - as_points(z)
    return np.hypot(d[..., 0], d[..., 1])


def green(ctx: WaveContext, x, z):
    """Outgoing fundamental solution (i/4) H_0^(1)(k|x - z|).

    Raises SingularityError if any pair of points coincides.
    """
    r = distance(x, z)
    if np.any(r == 0):
        raise SingularityError("green: source and observation point coincide")
    kr = ctx.k * r
    val = 0.25j * (sp.j0(kr) + 1j * sp.y0(kr))
    return _ret(val, r)


def green_imag(ctx: WaveContext, x, z):
    """Im of the fundamental solution, (1/4) J_0(k|x - z|); finite at x = z."""
    r = distance(x, z)
    return _ret(0.25 * sp.j0(ctx.k * r), r)


def green_normal_derivative(ctx: WaveContext, x, y, n_y):
    """Derivative of green(x, y) with respect to y along the unit vector n_y.

    Equals (ik/4) H_1^(1)(k|x-y|) ((x-y).n_y)/|x-y|.
    """
    x = as_points(x)
    y = as_points(y)
    n_y = as_points(n_y)
    if np.any(np.abs(np.hypot(n_y[..., 0], n_y[..., 1]) - 1.0) > 1e-12):
        raise DomainError("normal vector must have unit length")
    d = x - y
    r = np.hypot(d[..., 0], d[..., 1])
    if np.any(r == 0):
        raise SingularityError("green_normal_derivative: coincident points")
    kr = ctx.k * r
    h1 = sp.j1(kr) + 1j * sp.y1(kr)
    dot = d[..., 0] * n_y[..., 0] + d[..., 1] * n_y[..., 1]
    return _ret(0.25j * ctx.k * h1 * dot / r, r)
