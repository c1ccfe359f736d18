"""Exterior sound-soft scattering by point sources.

The scattered field is sought as a combined double/single layer potential

    u^s(x) = int_{dD} (d phi(x, y)/d nu(y) - i eta phi(x, y)) psi(y) ds(y),

which leads to the second kind equation psi + K psi - i eta S psi = -2 u^i on
dD (K, S with the usual factor 2). Each component is discretised with the
2n-point trapezoid rule on its parameter interval; logarithmic singularities
of the self-interaction kernels are split off and integrated with Kress
weights, so the error decays super-algebraically in n for analytic curves.
Passing ``layer="double"`` drops the single layer (eta = 0).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy import special as sp

from .errors import AccuracyError, DomainError, NumericalFailure
from .geometry import BoundaryCurve, Obstacle, ReceiverArray
from .specfun import WaveContext, as_points, green

EULER_GAMMA = 0.57721566490153286061
NEAR_FIELD_SPACINGS = 5.0


def kress_weights(t, n: int) -> np.ndarray:
    """Weights R_j(t) for int_0^{2pi} ln(4 sin^2((t - s)/2)) f(s) ds ~ sum_j R_j(t) f(t_j).

    ``t`` holds the (possibly off-node) differences t - t_j. Direct summation,
    O(n) per entry; ``kress_apply`` is the fast path for many targets.
    """
    t = np.asarray(t, dtype=float)
    acc = np.zeros(t.shape)
    for m in range(1, n):
        acc += np.cos(m * t) / m
    return -2 * np.pi / n * acc - np.pi / n**2 * np.cos(n * t)


def kress_apply(g: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sum_j R_j(t_p) g[p, j] for targets t_p and node samples g of shape (P, 2n).

    One FFT per target row instead of an O(n^2) weight table.
    """
    N = g.shape[1]
    n = N // 2
    F = np.fft.fft(g, axis=1)
    m = np.arange(1, n)
    e = np.exp(1j * np.multiply.outer(t, m))
    cos_sum = 0.5 * np.sum((e * F[:, m] + np.conj(e) * F[:, N - m]) / m, axis=1)
    return -2 * np.pi / n * cos_sum - np.pi / n**2 * np.cos(n * t) * F[:, n]


def _kress_row(n: int) -> np.ndarray:
    """Circulant first row R_j(t_0 - t_j) via a real FFT."""
    N = 2 * n
    coef = np.zeros(N)
    m = np.arange(1, n)
    coef[m] = 1.0 / m
    coef[N - m] = 1.0 / m
    # sum_m cos(m * 2 pi j / N) / m over m = 1..n-1, then the Nyquist term
    row = np.real(np.fft.fft(coef)) / 2.0
    j = np.arange(N)
    return -2 * np.pi / n * row - np.pi / n**2 * np.cos(np.pi * j)


def _hankels(kr):
    j0, y0, j1, y1 = sp.j0(kr), sp.y0(kr), sp.j1(kr), sp.y1(kr)
    return j0, j0 + 1j * y0, j1, j1 + 1j * y1


def _split_kernels(k, eta, x_t, src: BoundaryCurve, s, dt):
    """Log-split kernel parts K1, K2 with K = K1 ln(4 sin^2(dt/2)) + K2.

    ``x_t``: target points on ``src`` at parameters t; ``s``: source
    parameters; ``dt`` = t - s. Entries with dt = 0 (mod 2 pi) use the
    analytic diagonal limits.
    """
    y = src.position(s)
    dy = src.d1(s)
    jac = np.hypot(dy[..., 0], dy[..., 1])
    d = x_t - y
    r = np.hypot(d[..., 0], d[..., 1])
    diag = np.abs(np.angle(np.exp(1j * dt))) < 1e-13
    r_safe = np.where(diag, 1.0, r)
    kr = k * r_safe
    J0, H0, J1, H1 = _hankels(kr)
    # |x'(s)| nu(s).(x(t) - x(s))
    nd = dy[..., 1] * d[..., 0] - dy[..., 0] * d[..., 1]
    L = 0.5j * k * H1 * nd / r_safe
    L1 = -k / (2 * np.pi) * J1 * nd / r_safe
    M = 0.5j * H0 * jac
    M1 = -jac * J0 / (2 * np.pi)
    with np.errstate(divide="ignore"):
        log = np.where(diag, 0.0, np.log(4 * np.sin(dt / 2) ** 2))
    L2 = L - L1 * log
    M2 = M - M1 * log
    if np.any(diag):
        dd = src.d2(s)
        cross = dy[..., 0] * dd[..., 1] - dy[..., 1] * dd[..., 0]
        L1 = np.where(diag, 0.0, L1)
        L2 = np.where(diag, -cross / (2 * np.pi * jac**2), L2)
        M1 = np.where(diag, -jac / (2 * np.pi), M1)
        m2_diag = (0.5j - EULER_GAMMA / np.pi - np.log(k * jac / 2) / np.pi) * jac
        M2 = np.where(diag, m2_diag, M2)
    return L1 - 1j * eta * M1, L2 - 1j * eta * M2


_NEAR_DT = 2e-3
_NEAR_STENCIL = _NEAR_DT * np.arange(-3, 4)


def _lagrange_weights(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Lagrange basis values at points x; shape (len(x), len(nodes))."""
    w = np.ones((len(x), len(nodes)))
    for i, xi in enumerate(nodes):
        for j, xj in enumerate(nodes):
            if i != j:
                w[:, i] *= (x - xj) / (xi - xj)
    return w


def _smooth_part_near(k, eta, src: BoundaryCurve, s: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """K2(s + dt, s) for 0 < |dt| < _NEAR_DT.

    Direct evaluation loses about eps/|dt| relative accuracy in the double
    layer numerator, so K2 is interpolated (degree 6) from samples at
    |dt| >= _NEAR_DT and the analytic diagonal limit.
    """
    samples = np.empty((len(s), len(_NEAR_STENCIL)), dtype=complex)
    for i, d in enumerate(_NEAR_STENCIL):
        x = src.position(s + d)
        _, samples[:, i] = _split_kernels(k, eta, x, src, s, np.full(len(s), d))
    return np.sum(_lagrange_weights(_NEAR_STENCIL, dt) * samples, axis=1)


def _full_kernel(k, eta, x, src: BoundaryCurve):
    """Smooth-case kernel (L - i eta M)(x, y_j) for targets away from ``src``.

    Returns shape (m, N_src).
    """
    s = src.nodes
    y = src.position(s)
    dy = src.d1(s)
    jac = np.hypot(dy[:, 0], dy[:, 1])
    d = x[:, None, :] - y[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    _, H0, _, H1 = _hankels(k * r)
    nd = dy[None, :, 1] * d[..., 0] - dy[None, :, 0] * d[..., 1]
    return 0.5j * k * H1 * nd / r - 1j * eta * 0.5j * H0 * jac[None, :]


@dataclass(frozen=True)
class BiesSystem:
    """Factorised Nystrom system for one obstacle and wavenumber."""

    obstacle: Obstacle
    k: float
    eta: float
    matrix: np.ndarray = field(repr=False)
    lu: tuple = field(repr=False)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([c.n_nodes for c in self.obstacle])])

    @property
    def node_points(self) -> np.ndarray:
        return self.obstacle.boundary_points()

    def node_spacing(self) -> float:
        if self.obstacle.is_empty:
            return 0.0
        return max(float(np.max(c.jacobian(c.nodes))) * 2 * np.pi / c.n_nodes for c in self.obstacle)

    def condition_estimate(self) -> float:
        """LAPACK 1-norm reciprocal condition estimate, inverted."""
        if self.obstacle.is_empty:
            return 1.0
        lu, _ = self.lu
        anorm = np.linalg.norm(self.matrix, 1)
        rcond, info = la.lapack.zgecon(lu, anorm, norm="1")
        return np.inf if rcond == 0 else 1.0 / rcond

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return la.lu_solve(self.lu, rhs)


def assemble(obstacle: Obstacle, ctx: WaveContext, eta: float | None = None, n_nodes: int | None = None,
             layer: str = "combined") -> BiesSystem:
    """Build and LU-factorise the Nystrom matrix.

    ``eta`` defaults to k. ``n_nodes`` (= 2n) overrides the node count of every
    component. ``layer="double"`` selects the bare double layer ansatz.
    """
    if n_nodes is not None:
        obstacle = obstacle.with_nodes(n_nodes)
    if layer == "double":
        eta = 0.0
    elif layer == "combined":
        eta = ctx.k if eta is None else float(eta)
        if eta == 0:
            raise DomainError("coupling parameter eta must be nonzero for the combined ansatz")
    else:
        raise DomainError(f"unknown layer {layer!r}")
    for c in obstacle:
        if c.n_nodes < 32:
            raise DomainError("the solver needs at least 32 nodes per component")
    k = ctx.k
    comps = obstacle.components
    sizes = [c.n_nodes for c in comps]
    off = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    N = int(off[-1])
    A = np.zeros((N, N), dtype=complex)
    for a, ca in enumerate(comps):
        ta = ca.nodes
        xa = ca.position(ta)
        n = ca.n_nodes // 2
        for b, cb in enumerate(comps):
            blk = slice(off[b], off[b + 1])
            rows = slice(off[a], off[a + 1])
            if a == b:
                dt = ta[:, None] - ta[None, :]
                K1, K2 = _split_kernels(k, eta, xa[:, None, :], ca, ta[None, :], dt)
                R = la.circulant(_kress_row(n))
                A[rows, blk] = R * K1 + (np.pi / n) * K2
            else:
                A[rows, blk] = (np.pi / (cb.n_nodes // 2)) * _full_kernel(k, eta, xa, cb)
    A += np.eye(N)
    if N == 0:
        return BiesSystem(obstacle, k, eta, A, (A, np.zeros(0, dtype=np.int32)))
    lu, piv = la.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or pivots.min() <= 1e-13 * pivots.max():
        raise NumericalFailure("boundary integral system is singular (resonance or degenerate geometry)")
    return BiesSystem(obstacle, k, eta, A, (lu, piv))


@dataclass(frozen=True)
class ScatterSolution:
    """Boundary density for one incident point source (or a batch of them).

    ``density`` has shape (N,) or (N, m) for m sources ``z`` of shape (m, 2).
    """

    system: BiesSystem
    density: np.ndarray = field(repr=False)
    z: np.ndarray

    @property
    def obstacle(self) -> Obstacle:
        return self.system.obstacle

    @property
    def k(self) -> float:
        return self.system.k

    @property
    def eta(self) -> float:
        return self.system.eta

    def scaled(self, alpha: complex) -> "ScatterSolution":
        return ScatterSolution(self.system, alpha * self.density, self.z)


def _check_exterior(obstacle: Obstacle, pts: np.ndarray, what: str):
    if not obstacle.is_empty and np.any(obstacle.contains(pts)):
        raise DomainError(f"{what} must lie outside the obstacle")


def incident_on_boundary(sys: BiesSystem, z: np.ndarray) -> np.ndarray:
    """u^i = phi(x_i, z) at all nodes; shape (N, m)."""
    ctx = WaveContext(sys.k)
    return green(ctx, sys.node_points[:, None, :], z[None, :, :])


def solve_point_sources(sys: BiesSystem, z) -> ScatterSolution:
    """Densities for sources z of shape (m, 2), one LU back-substitution each."""
    z = as_points(z).reshape(-1, 2)
    _check_exterior(sys.obstacle, z, "incident point sources")
    if sys.obstacle.is_empty:
        return ScatterSolution(sys, np.zeros((0, len(z)), dtype=complex), z)
    rhs = -2.0 * incident_on_boundary(sys, z)
    return ScatterSolution(sys, sys.solve(rhs), z)


def solve_point_source(sys: BiesSystem, z) -> ScatterSolution:
    z = as_points(z)
    if z.shape != (2,):
        raise DomainError("solve_point_source takes a single source point")
    sol = solve_point_sources(sys, z[None, :])
    return ScatterSolution(sys, sol.density[:, 0], z)


def evaluation_matrix(sys: BiesSystem, points, check: bool = True) -> np.ndarray:
    """Matrix E with u^s(points) = E @ density."""
    pts = as_points(points).reshape(-1, 2)
    obstacle = sys.obstacle
    if obstacle.is_empty:
        return np.zeros((len(pts), 0), dtype=complex)
    if check:
        _check_exterior(obstacle, pts, "evaluation points")
        h = sys.node_spacing()
        if np.any(obstacle.distance_to_boundary(pts) < NEAR_FIELD_SPACINGS * h):
            raise AccuracyError(
                f"evaluation points closer than {NEAR_FIELD_SPACINGS:g} node spacings ({h:.3g}) to the boundary")
    blocks = []
    for c in obstacle:
        # half of the kernel of the boundary equation, trapezoid weight pi/n
        blocks.append(0.5 * (np.pi / (c.n_nodes // 2)) * _full_kernel(sys.k, sys.eta, pts, c))
    return np.concatenate(blocks, axis=1)


def eval_scattered(sol: ScatterSolution, points) -> np.ndarray:
    pts = as_points(points)
    E = evaluation_matrix(sol.system, pts)
    out = E @ sol.density
    return out.reshape(pts.shape[:-1] + sol.density.shape[1:])


def eval_total(sol: ScatterSolution, points) -> np.ndarray:
    """Scattered plus incident field; only for single-source solutions."""
    pts = as_points(points)
    if sol.density.ndim != 1:
        raise DomainError("eval_total expects a single-source solution")
    return eval_scattered(sol, pts) + green(WaveContext(sol.k), pts, sol.z)


def trig_interpolate(values: np.ndarray, t) -> np.ndarray:
    """Evaluate the degree-n trigonometric interpolant of 2n equispaced samples."""
    N = len(values)
    n = N // 2
    c = np.fft.fft(values) / N
    t = np.asarray(t, dtype=float)
    m = np.fft.fftfreq(N, 1.0 / N).astype(int)
    keep = m != -n
    out = np.exp(1j * np.multiply.outer(t, m[keep])) @ c[keep]
    return out + c[n] * np.cos(n * t)


def eval_boundary_trace(sol: ScatterSolution, component: int, t) -> np.ndarray:
    """Exterior limit of u^s at x(t) on one component, for arbitrary parameters t.

    Uses the jump relation u^s = psi/2 + (K psi - i eta S psi)/2 with the density
    trigonometrically interpolated and Kress weights for off-node targets.
    """
    if sol.density.ndim != 1:
        raise DomainError("eval_boundary_trace expects a single-source solution")
    sys = sol.system
    comps = sys.obstacle.components
    off = sys.offsets
    ca = comps[component]
    t = np.atleast_1d(np.asarray(t, dtype=float))
    xt = ca.position(t)
    psi_a = sol.density[off[component]:off[component + 1]]
    n = ca.n_nodes // 2
    s = ca.nodes
    dt = t[:, None] - s[None, :]
    K1, K2 = _split_kernels(sys.k, sys.eta, xt[:, None, :], ca, s[None, :], dt)
    wrapped = np.angle(np.exp(1j * dt))
    near = (np.abs(wrapped) < _NEAR_DT) & (np.abs(wrapped) >= 1e-13)
    if np.any(near):
        rows, cols = np.nonzero(near)
        K2[rows, cols] = _smooth_part_near(sys.k, sys.eta, ca, s[cols], wrapped[rows, cols])
    total = kress_apply(K1 * psi_a[None, :], t) + (np.pi / n) * (K2 @ psi_a)
    for b, cb in enumerate(comps):
        if b != component:
            K = _full_kernel(sys.k, sys.eta, xt, cb)
            total += (np.pi / (cb.n_nodes // 2)) * K @ sol.density[off[b]:off[b + 1]]
    return 0.5 * trig_interpolate(psi_a, t) + 0.5 * total


def scattered_matrix(sys: BiesSystem, sources, receivers) -> np.ndarray:
    """u^s(x_j, z_l) for receivers (J, 2) and sources (L, 2): shape (J, L)."""
    receivers = as_points(receivers).reshape(-1, 2)
    sources = as_points(sources).reshape(-1, 2)
    if sys.obstacle.is_empty:
        return np.zeros((len(receivers), len(sources)), dtype=complex)
    sol = solve_point_sources(sys, sources)
    return evaluation_matrix(sys, receivers) @ sol.density


def active_scatter_matrix(obstacle: Obstacle, ctx: WaveContext, receivers: ReceiverArray,
                          system: BiesSystem | None = None, **assemble_kw) -> np.ndarray:
    """Entry (j, m) = u^s(x_j, x_m) with the receivers doubling as sources."""
    if obstacle.is_empty:
        return np.zeros((receivers.J, receivers.J), dtype=complex)
    sys = system if system is not None else assemble(obstacle, ctx, **assemble_kw)
    return scattered_matrix(sys, receivers.points, receivers.points)


# --- separation-of-variables oracle for a sound-soft disk -------------------

def bessel_jn_all(n_max: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_{n_max}(x) by Miller's downward recurrence; shape (n_max + 1, *x.shape)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bessel_jn_all needs x > 0")
    start = int(max(n_max, np.max(x)) + 30 + np.sqrt(40 * max(n_max, np.max(x))))
    start += start % 2
    out = np.zeros((n_max + 1,) + x.shape)
    j_next = np.zeros(x.shape)
    j_cur = np.full(x.shape, 1e-300)
    norm = np.zeros(x.shape)
    for m in range(start, 0, -1):
        j_prev = 2 * m / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if m - 1 <= n_max:
            out[m - 1] = j_cur
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2 * j_cur
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            j_cur, j_next, norm = j_cur * scale, j_next * scale, norm * scale
            out[max(m - 1, 0):] *= scale
    norm += j_cur
    return out / norm


def bessel_yn_all(n_max: int, x: np.ndarray) -> np.ndarray:
    """Y_0..Y_{n_max}(x) by upward recurrence from Y_0, Y_1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((n_max + 1,) + x.shape)
    out[0] = sp.y0(x)
    if n_max >= 1:
        out[1] = sp.y1(x)
    for m in range(1, n_max):
        out[m + 1] = 2 * m / x * out[m] - out[m - 1]
    return out


def hankel1_all(n_max: int, x) -> np.ndarray:
    return bessel_jn_all(n_max, x) + 1j * bessel_yn_all(n_max, x)


def disk_series_oracle(center, radius: float, ctx: WaveContext, z, points, n_max: int = 80,
                       rtol: float = 1e-14) -> np.ndarray:
    """Scattered field of a point source at ``z`` by a sound-soft disk.

    u^s(x, z) = -(i/4) sum_n J_n(ka)/H_n(ka) H_n(k r_x) H_n(k r_z) e^{i n (th_x - th_z)},
    polar coordinates about ``center``. The series is truncated at the first
    order whose term magnitude drops below ``rtol`` times the partial sum.
    """
    if n_max < 10:
        raise DomainError("n_max must be at least 10")
    c = as_points(center)
    z = as_points(z) - c
    pts = as_points(points)
    shape = pts.shape[:-1]
    p = pts.reshape(-1, 2) - c
    k, a = ctx.k, float(radius)
    rx = np.hypot(p[:, 0], p[:, 1])
    rz = float(np.hypot(*z))
    if np.any(rx < a) or rz <= a:
        raise DomainError("source and evaluation points must lie outside the disk")
    dth = np.arctan2(p[:, 1], p[:, 0]) - np.arctan2(z[1], z[0])
    ratio = bessel_jn_all(n_max, np.array(k * a)) / hankel1_all(n_max, np.array(k * a))
    Hx = hankel1_all(n_max, k * rx)
    Hz = hankel1_all(n_max, np.array(k * rz))
    coef = ratio * Hz  # shape (n_max + 1,)
    total = coef[0] * Hx[0]
    converged = np.zeros(len(p), dtype=bool)
    for n in range(1, n_max + 1):
        term = coef[n] * Hx[n]
        total = total + 2 * term * np.cos(n * dth)
        converged |= np.abs(2 * term) < rtol * np.abs(total)
        if np.all(converged):
            break
    else:
        raise AccuracyError(f"disk series did not converge within n_max={n_max}")
    return (-0.25j * total).reshape(shape)
