"""Obstacle boundaries, receiver/source arrays and sampling grids."""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, UsageError
from .specfun import as_points

TWO_PI = 2 * np.pi
MIN_NODES = 16
DEFAULT_NODES = 512


def _arr(*vals):
    return np.stack(np.broadcast_arrays(*vals), axis=-1)


@dataclass(frozen=True)
class BoundaryCurve:
    """Smooth closed curve x(t), t in [0, 2pi), traversed counterclockwise.

    ``position``, ``d1`` and ``d2`` return x(t), x'(t), x''(t) as arrays of
    shape (..., 2). The Nystrom nodes are t_i = pi i / n for i < 2n.
    """

    name: str
    position: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    n_nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if self.n_nodes < MIN_NODES or self.n_nodes % 2:
            raise DomainError(f"node count must be even and >= {MIN_NODES}, got {self.n_nodes}")

    def with_nodes(self, n_nodes: int) -> "BoundaryCurve":
        return BoundaryCurve(self.name, self.position, self.d1, self.d2, n_nodes)

    @property
    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_nodes) / self.n_nodes

    @property
    def points(self) -> np.ndarray:
        return self.position(self.nodes)

    def jacobian(self, t) -> np.ndarray:
        d = self.d1(np.asarray(t, dtype=float))
        return np.hypot(d[..., 0], d[..., 1])

    def tangent(self, t) -> np.ndarray:
        """Unit tangent in the direction of increasing t."""
        d = self.d1(np.asarray(t, dtype=float))
        return d / np.hypot(d[..., 0], d[..., 1])[..., None]

    def normal(self, t) -> np.ndarray:
        """Outward unit normal (tangent rotated clockwise)."""
        tau = self.tangent(t)
        return np.stack([tau[..., 1], -tau[..., 0]], axis=-1)

    def curvature(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a, b = self.d1(t), self.d2(t)
        cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
        return cross / np.hypot(a[..., 0], a[..., 1]) ** 3

    def arc_length(self) -> float:
        return float(np.sum(self.jacobian(self.nodes)) * TWO_PI / self.n_nodes)

    def centroid(self) -> np.ndarray:
        """Area centroid via the trapezoid rule (spectrally accurate)."""
        t = self.nodes
        p, d = self.position(t), self.d1(t)
        w = TWO_PI / self.n_nodes
        area = 0.5 * np.sum(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0]) * w
        cx = 0.5 * np.sum(p[:, 0] ** 2 * d[:, 1]) * w / area
        cy = -0.5 * np.sum(p[:, 1] ** 2 * d[:, 0]) * w / area
        return np.array([cx, cy])

    def polygon(self, m: int = 2048) -> np.ndarray:
        return self.position(TWO_PI * np.arange(m) / m)


def _radial_curve(name, center, r, dr, d2r, n_nodes) -> BoundaryCurve:
    cx, cy = center

    def position(t):
        t = np.asarray(t, dtype=float)
        rr = r(t)
        return _arr(cx + rr * np.cos(t), cy + rr * np.sin(t))

    def d1(t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        rr, rp = r(t), dr(t)
        return _arr(rp * c - rr * s, rp * s + rr * c)

    def d2(t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        rr, rp, rpp = r(t), dr(t), d2r(t)
        return _arr((rpp - rr) * c - 2 * rp * s, (rpp - rr) * s + 2 * rp * c)

    return BoundaryCurve(name, position, d1, d2, n_nodes)


def make_kite(n_nodes: int = DEFAULT_NODES, center=(2.0, 2.0)) -> BoundaryCurve:
    """Kite (2+0.5(cos t+0.65 cos 2t-0.65), 2+0.75 sin t), shifted by ``center - (2, 2)``."""
    cx, cy = center

    def position(t):
        t = np.asarray(t, dtype=float)
        return _arr(cx + 0.5 * (np.cos(t) + 0.65 * np.cos(2 * t) - 0.65), cy + 0.75 * np.sin(t))

    def d1(t):
        t = np.asarray(t, dtype=float)
        return _arr(-0.5 * (np.sin(t) + 1.3 * np.sin(2 * t)), 0.75 * np.cos(t))

    def d2(t):
        t = np.asarray(t, dtype=float)
        return _arr(-0.5 * (np.cos(t) + 2.6 * np.cos(2 * t)), -0.75 * np.sin(t))

    return BoundaryCurve("kite", position, d1, d2, n_nodes)


def make_peanut(n_nodes: int = DEFAULT_NODES, center=(-2.0, -2.0)) -> BoundaryCurve:
    """Peanut with radius sqrt(cos^2 t + 0.25 sin^2 t) about ``center``."""

    def r(t):
        return np.sqrt(1.0 - 0.75 * np.sin(t) ** 2)

    def dr(t):
        return -0.375 * np.sin(2 * t) / r(t)

    def d2r(t):
        return (-0.75 * np.cos(2 * t) - dr(t) ** 2) / r(t)

    return _radial_curve("peanut", center, r, dr, d2r, n_nodes)


def make_pear(n_nodes: int = DEFAULT_NODES, center=(0.0, 0.0)) -> BoundaryCurve:
    """Pear (2 + 0.3 cos 3t)(cos t, sin t)."""
    return _radial_curve(
        "pear",
        center,
        lambda t: 2.0 + 0.3 * np.cos(3 * t),
        lambda t: -0.9 * np.sin(3 * t),
        lambda t: -2.7 * np.cos(3 * t),
        n_nodes,
    )


def make_disk(center=(0.0, 0.0), radius: float = 1.0, n_nodes: int = DEFAULT_NODES) -> BoundaryCurve:
    if radius <= 0:
        raise DomainError("disk radius must be positive")
    radius = float(radius)
    return _radial_curve(
        "disk",
        center,
        lambda t: np.full(np.shape(t), radius),
        lambda t: np.zeros(np.shape(t)),
        lambda t: np.zeros(np.shape(t)),
        n_nodes,
    )


def _inside_polygon(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd ray casting; ``pts`` shape (m, 2)."""
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (x < xcross)
    return np.count_nonzero(hits, axis=1) % 2 == 1


@dataclass(frozen=True)
class Obstacle:
    """Union of pairwise disjoint boundary components (possibly empty)."""

    components: tuple = ()
    name: str = ""

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                if min_distance(comps[i], comps[j]) <= 0:
                    raise DomainError("obstacle components must be disjoint")
                if np.any(_inside_polygon(comps[i].polygon(512), comps[j].points[:1])) or np.any(
                    _inside_polygon(comps[j].polygon(512), comps[i].points[:1])
                ):
                    raise DomainError("obstacle components must not be nested")

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def is_empty(self) -> bool:
        return not self.components

    @property
    def n_nodes(self) -> int:
        return sum(c.n_nodes for c in self.components)

    def with_nodes(self, n_nodes: int) -> "Obstacle":
        return Obstacle(tuple(c.with_nodes(n_nodes) for c in self.components), self.name)

    def boundary_points(self, m: int | None = None) -> np.ndarray:
        """Boundary samples: the Nystrom nodes, or ``m`` per component."""
        if self.is_empty:
            return np.zeros((0, 2))
        if m is None:
            return np.concatenate([c.points for c in self.components])
        return np.concatenate([c.polygon(m) for c in self.components])

    def contains(self, points, m: int = 2048) -> np.ndarray:
        """True where a point lies inside (or numerically on) some component."""
        pts = as_points(points).reshape(-1, 2)
        inside = np.zeros(len(pts), dtype=bool)
        for c in self.components:
            inside |= _inside_polygon(c.polygon(m), pts)
        return inside

    def distance_to_boundary(self, points, m: int = 4096) -> np.ndarray:
        """Distance from each point to the nearest of ``m`` samples per component."""
        pts = as_points(points).reshape(-1, 2)
        if self.is_empty:
            return np.full(len(pts), np.inf)
        bnd = self.boundary_points(m)
        out = np.empty(len(pts))
        for s in range(0, len(pts), 2048):
            d = pts[s : s + 2048, None, :] - bnd[None, :, :]
            out[s : s + 2048] = np.sqrt(np.min(d[..., 0] ** 2 + d[..., 1] ** 2, axis=1))
        return out


def min_distance(a: BoundaryCurve, b: BoundaryCurve, m: int = 1024) -> float:
    pa, pb = a.polygon(m), b.polygon(m)
    d = pa[:, None, :] - pb[None, :, :]
    return float(np.sqrt(np.min(d[..., 0] ** 2 + d[..., 1] ** 2)))


def make_close_pair(n_nodes: int = DEFAULT_NODES) -> Obstacle:
    """Kite centred at (2, 0) next to a radius-1.5 disk at (-0.7, 0)."""
    return Obstacle(
        (make_kite(n_nodes, center=(2.0, 0.0)), make_disk((-0.7, 0.0), 1.5, n_nodes)),
        name="close-pair",
    )


def make_multiscale(n_nodes: int = DEFAULT_NODES) -> Obstacle:
    """Pear at the origin plus a radius-0.2 disk centred at (2, 3)."""
    return Obstacle((make_pear(n_nodes), make_disk((2.0, 3.0), 0.2, n_nodes)), name="multiscale")


SHAPES = {
    "kite": lambda n: Obstacle((make_kite(n),), name="kite"),
    "peanut": lambda n: Obstacle((make_peanut(n),), name="peanut"),
    "pear": lambda n: Obstacle((make_pear(n),), name="pear"),
    "disk": lambda n: Obstacle((make_disk((0.0, 0.0), 1.0, n),), name="disk"),
    "close-pair": make_close_pair,
    "multiscale": make_multiscale,
}


def make_obstacle(shape: str, n_nodes: int = DEFAULT_NODES) -> Obstacle:
    try:
        return SHAPES[shape](n_nodes)
    except KeyError:
        raise UsageError(f"unknown shape {shape!r}; choose from {sorted(SHAPES)}") from None


@dataclass(frozen=True)
class ReceiverArray:
    J: int
    r_B: float
    angles: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    @property
    def weight(self) -> float:
        """Trapezoid weight 2 pi r_B / J on the measurement circle."""
        return TWO_PI * self.r_B / self.J


def receiver_array(J: int = 256, r_B: float = 5.0) -> ReceiverArray:
    """J equispaced receivers x_j = r_B (cos g_j, sin g_j), g_j = 2 pi (j-1)/J."""
    if J < 2 or r_B <= 0:
        raise DomainError("receiver array needs J >= 2 and r_B > 0")
    angles = TWO_PI * np.arange(J) / J
    points = r_B * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return ReceiverArray(int(J), float(r_B), angles, points)


def uniform_stream(seed: int, size: int) -> np.ndarray:
    """U[0, 1) draws from a Philox counter-based generator (53-bit mantissa)."""
    return np.random.Generator(np.random.Philox(seed)).random(size)


@dataclass(frozen=True)
class SourceArray:
    L: int
    R_sigma: float
    xi: float
    seed: int
    angles: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    @property
    def measure(self) -> float:
        """Length of the source circle, 2 pi R_sigma."""
        return TWO_PI * self.R_sigma

    @property
    def weight(self) -> float:
        return self.measure / self.L


def source_array(L: int = 256, R_sigma: float = 100.0, xi: float = 0.4, seed: int = 0) -> SourceArray:
    """Sources z_l on a circle at angles 2 pi (l - 1 + xi_l) / L with xi_l ~ U[0, xi]."""
    if L < 2 or R_sigma <= 0 or xi < 0 or not np.isfinite(xi):
        raise DomainError("source array needs L >= 2, R_sigma > 0 and xi >= 0")
    jitter = xi * uniform_stream(seed, L)
    angles = TWO_PI * (np.arange(L) + jitter) / L
    points = R_sigma * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return SourceArray(int(L), float(R_sigma), float(xi), int(seed), angles, points)


def equispaced_sources(L: int, R_sigma: float = 100.0) -> SourceArray:
    return source_array(L, R_sigma, 0.0, 0)


@dataclass(frozen=True)
class SamplingGrid:
    """Equispaced grid stored row-major with the first row at y_max."""

    bounds: tuple
    nx: int
    ny: int

    def __post_init__(self):
        xmin, xmax, ymin, ymax = map(float, self.bounds)
        if self.nx < 2 or self.ny < 2 or not (xmin < xmax and ymin < ymax):
            raise DomainError("grid needs n_x, n_y >= 2 and increasing bounds")
        object.__setattr__(self, "bounds", (xmin, xmax, ymin, ymax))

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.bounds[0], self.bounds[1], self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.bounds[3], self.bounds[2], self.ny)

    @property
    def spacing(self) -> tuple:
        xmin, xmax, ymin, ymax = self.bounds
        return ((xmax - xmin) / (self.nx - 1), (ymax - ymin) / (self.ny - 1))

    @property
    def points(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.stack([X.ravel(), Y.ravel()], axis=-1)


def sampling_grid(bounds: Sequence[float] = (-5.0, 5.0, -5.0, 5.0), nx: int = 200, ny: int = 200) -> SamplingGrid:
    return SamplingGrid(tuple(bounds), int(nx), int(ny))
