"""Cross-correlation data, back-propagation and the DCM / RTM indicators."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError, UsageError
from .forward import BiesSystem, assemble, scattered_matrix
from .geometry import Obstacle, ReceiverArray, SamplingGrid, SourceArray
from .passive import CalibrationMatrix, PassiveRecord
from .specfun import WaveContext, as_points, green, green_imag

PASSIVE_C = "passive-C"
REFERENCE_NS = "reference-Ns"

# rows of the sampling grid processed per block; bounds peak memory only
_CHUNK = 2048


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray = field(repr=False)
    kind: str
    receivers: ReceiverArray
    k: float

    def __post_init__(self):
        J = self.receivers.J
        if self.values.shape != (J, J):
            raise UsageError(f"correlation matrix must be {J}x{J}, got {self.values.shape}")

    def skew_hermitian_defect(self) -> float:
        """max |C + C^H| / max |C|."""
        v = self.values
        scale = np.max(np.abs(v))
        return float(np.max(np.abs(v + v.conj().T)) / scale) if scale else 0.0

    def with_values(self, values) -> "CorrelationMatrix":
        return CorrelationMatrix(np.asarray(values, dtype=complex), self.kind, self.receivers, self.k)


@dataclass(frozen=True)
class ImageGrid:
    grid: SamplingGrid
    values: np.ndarray = field(repr=False)
    kind: str

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise UsageError("image values do not match the grid shape")

    @property
    def points(self) -> np.ndarray:
        return self.grid.points


def _same_receivers(a: ReceiverArray, b: ReceiverArray) -> bool:
    return a.J == b.J and a.r_B == b.r_B


def cross_correlation(rec: PassiveRecord, cal: CalibrationMatrix, ctx: WaveContext | None = None) -> CorrelationMatrix:
    """C_jm = (2ik|Sigma|/L) sum_l conj(u(x_j, z_l)) u(x_m, z_l) - 2i Im phi(x_j, x_m).

    The correlation sum is made exactly Hermitian before scaling, so the
    returned matrix is skew-Hermitian to the last bit.
    """
    k = rec.k if ctx is None else ctx.k
    if not _same_receivers(rec.receivers, cal.receivers):
        raise UsageError("record and calibration use different receiver arrays")
    if k != rec.k or k != cal.k:
        raise UsageError("record, calibration and context disagree on the wavenumber")
    U = rec.data
    A = U.conj() @ U.T
    A = 0.5 * (A + A.conj().T)
    C = (2j * k * rec.sources.weight) * A - 2j * cal.values
    return CorrelationMatrix(C, PASSIVE_C, rec.receivers, k)


def reference_correlation(active: np.ndarray, receivers: ReceiverArray, k: float) -> CorrelationMatrix:
    """N^s_jm = u^s(x_j, x_m) - conj(u^s(x_j, x_m)) from the active scattered matrix."""
    active = np.asarray(active)
    if active.ndim != 2 or active.shape[0] != active.shape[1]:
        raise UsageError("active scattered matrix must be square")
    return CorrelationMatrix(2j * np.imag(active), REFERENCE_NS, receivers, float(k))


def correlation_error(C: CorrelationMatrix, Ns: CorrelationMatrix) -> float:
    """Relative max-norm distance ||C - N^s||_max / ||N^s||_max."""
    a, b = np.asarray(getattr(C, "values", C)), np.asarray(getattr(Ns, "values", Ns))
    if a.shape != b.shape:
        raise UsageError("correlation matrices differ in shape")
    denom = np.max(np.abs(b)) if b.size else 0.0
    if denom == 0:
        raise DomainError("reference correlation is identically zero")
    return float(np.max(np.abs(a - b)) / denom)


def _receiver_kernel(ctx, points, receivers: ReceiverArray) -> np.ndarray:
    try:
        return green(ctx, points[:, None, :], receivers.points[None, :, :])
    except SingularityError:
        raise SingularityError("a sampling point coincides with a receiver") from None


def backpropagate(C: CorrelationMatrix, receivers: ReceiverArray, ctx: WaveContext, points,
                  columns=None) -> np.ndarray:
    """v_b(x, x_m) = -(2 pi r_B / J) sum_j conj(C_jm) phi(x, x_j).

    Returns shape (P, len(columns)) for P points; all columns by default.
    """
    pts = as_points(points).reshape(-1, 2)
    G = _receiver_kernel(ctx, pts, receivers)
    Cc = np.conj(C.values)
    if columns is not None:
        Cc = Cc[:, columns]
    return -receivers.weight * (G @ Cc)


def indicator_from_backpropagation(C: CorrelationMatrix, receivers: ReceiverArray, ctx: WaveContext,
                                   points) -> np.ndarray:
    """I(tau) = k^2 Im{(2 pi r_B / J) sum_m phi(tau, x_m) v_b(tau, x_m)} (two-phase form)."""
    pts = as_points(points).reshape(-1, 2)
    vb = backpropagate(C, receivers, ctx, pts)
    G = _receiver_kernel(ctx, pts, receivers)
    return ctx.k**2 * np.imag(receivers.weight * np.sum(G * vb, axis=1))


def _check_grid(grid: SamplingGrid, receivers: ReceiverArray, strict: bool):
    pts = grid.points
    if strict and np.any(np.hypot(pts[:, 0], pts[:, 1]) >= receivers.r_B):
        raise UsageError("sampling grid must lie strictly inside the receiver circle")


def dcm_values(C: CorrelationMatrix, receivers: ReceiverArray, ctx: WaveContext, points) -> np.ndarray:
    """DCM indicator at arbitrary points (no grid checks)."""
    pts = as_points(points).reshape(-1, 2)
    Cc = np.conj(C.values)
    S = 0.5 * (Cc + Cc.T)
    out = np.empty(len(pts))
    scale = -ctx.k**2 * receivers.weight**2
    for s in range(0, len(pts), _CHUNK):
        g = _receiver_kernel(ctx, pts[s:s + _CHUNK], receivers)
        out[s:s + _CHUNK] = scale * np.imag(np.sum((g @ S) * g, axis=1))
    return out


def dcm_indicator(C: CorrelationMatrix, receivers: ReceiverArray, ctx: WaveContext, grid: SamplingGrid,
                  strict: bool = False) -> ImageGrid:
    """DCM image I(tau) = -k^2 (2 pi r_B/J)^2 Im{ g(tau)^T conj(C) g(tau) }, g_j = phi(tau, x_j).

    The quadratic form only sees the symmetric part of conj(C), which is
    formed explicitly; the image is therefore bitwise invariant under C -> C^T.
    With ``strict`` the grid must lie inside the receiver circle; otherwise
    only points coinciding with a receiver are rejected.
    """
    if not _same_receivers(C.receivers, receivers):
        raise UsageError("correlation matrix was built for a different receiver array")
    _check_grid(grid, receivers, strict)
    out = dcm_values(C, receivers, ctx, grid.points)
    kind = "dcm" if C.kind == PASSIVE_C else "dcm-from-Ns"
    return ImageGrid(grid, out.reshape(grid.shape), kind)


def rtm_indicator(scattered: np.ndarray, sources: SourceArray, receivers: ReceiverArray, ctx: WaveContext,
                  grid: SamplingGrid) -> ImageGrid:
    """Reverse time migration with the scattered data and *assumed* source positions.

    I_RTM(tau) = -k^2 Im{ (2 pi r_B/J)(|Sigma|/L) sum_l sum_j phi(tau, z_l) phi(tau, x_j) conj(u^s(x_j, z_l)) }.
    """
    U = np.asarray(scattered)
    if U.shape != (receivers.J, sources.L):
        raise UsageError(f"scattered data must be {receivers.J}x{sources.L}, got {U.shape}")
    Uc = np.conj(U)
    pts = grid.points
    out = np.empty(len(pts))
    scale = -ctx.k**2 * receivers.weight * sources.weight
    for s in range(0, len(pts), _CHUNK):
        p = pts[s:s + _CHUNK]
        gx = _receiver_kernel(ctx, p, receivers)
        gz = green(ctx, p[:, None, :], sources.points[None, :, :])
        out[s:s + _CHUNK] = scale * np.imag(np.sum((gx @ Uc) * gz, axis=1))
    return ImageGrid(grid, out.reshape(grid.shape), "rtm")


@dataclass(frozen=True)
class HKResidual:
    """Helmholtz-Kirchhoff residual; relative unless the reference vanishes."""

    residual: float
    relative: bool
    lhs: complex
    rhs: complex


def hk_residual(x, y, sources: SourceArray, ctx: WaveContext, mode: str = "incident",
                obstacle: Obstacle | None = None, system: BiesSystem | None = None,
                abs_floor: float = 1e-14) -> HKResidual:
    """Compare f(x,y) - conj f(x,y) with 2ik sum_l w conj(f(x,z_l)) f(y,z_l).

    ``f`` is the incident field phi (mode "incident") or the total field u
    (mode "total", which needs ``obstacle`` or a prebuilt ``system``).
    """
    x = as_points(x)
    y = as_points(y)
    zs = sources.points
    fx = green(ctx, x[None, :], zs)
    fy = green(ctx, y[None, :], zs)
    ref = 2j * green_imag(ctx, x, y)
    if mode == "total":
        if system is None:
            if obstacle is None:
                raise UsageError("total mode needs an obstacle")
            system = assemble(obstacle, ctx)
        us = scattered_matrix(system, np.vstack([zs, y[None, :]]), np.vstack([x, y]))
        fx = fx + us[0, :-1]
        fy = fy + us[1, :-1]
        ref = ref + 2j * np.imag(us[0, -1])
    elif mode != "incident":
        raise UsageError(f"unknown mode {mode!r}")
    lhs = 2j * ctx.k * sources.weight * np.sum(np.conj(fx) * fy)
    err = abs(lhs - ref)
    if abs(ref) <= abs_floor:
        return HKResidual(float(err), False, complex(lhs), complex(ref))
    return HKResidual(float(err / abs(ref)), True, complex(lhs), complex(ref))
