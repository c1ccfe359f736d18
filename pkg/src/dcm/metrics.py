"""Scalar summaries of indicator images."""

import numpy as np
from scipy.optimize import nnls

from .errors import DomainError
from .geometry import Obstacle, min_distance
from .imaging import ImageGrid


def level_set(image: ImageGrid, alpha: float) -> np.ndarray:
    """Grid points with I >= alpha * max I."""
    if not 0 < alpha < 1:
        raise DomainError("threshold must lie in (0, 1)")
    v = image.values.ravel()
    if v.max() == v.min():
        raise DomainError("indicator image is constant")
    return image.points[v >= alpha * v.max()]


def _nearest_node_distance(points: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    out = np.empty(len(points))
    for s in range(0, len(points), 1024):
        d = points[s:s + 1024, None, :] - nodes[None, :, :]
        out[s:s + 1024] = np.sqrt(np.min(d[..., 0] ** 2 + d[..., 1] ** 2, axis=1))
    return out


def localization_error(image: ImageGrid, obstacle: Obstacle, alpha: float = 0.8) -> float:
    """Largest distance from the alpha-level set to the nearest boundary node."""
    pts = level_set(image, alpha)
    return float(np.max(_nearest_node_distance(pts, obstacle.boundary_points())))


def gap_midpoint(obstacle: Obstacle, m: int = 2048) -> np.ndarray:
    """Midpoint of the closest pair of boundary samples of a two-component obstacle."""
    if len(obstacle) != 2:
        raise DomainError("gap midpoint needs exactly two components")
    a, b = (c.polygon(m) for c in obstacle)
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return 0.5 * (a[i] + b[j])


def gap_width(obstacle: Obstacle) -> float:
    a, b = obstacle.components
    return min_distance(a, b, 2048)


def level_set_hits(image: ImageGrid, alpha: float, center, radius: float) -> bool:
    """Whether the level set has a grid point within ``radius`` of ``center``."""
    pts = level_set(image, alpha)
    return bool(np.any(np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]) <= radius))


def level_set_near_curve(image: ImageGrid, alpha: float, obstacle: Obstacle, band: float) -> bool:
    pts = level_set(image, alpha)
    return bool(np.any(obstacle.distance_to_boundary(pts) <= band))


def fit_linear_quadratic(deltas, norms):
    """Nonnegative least squares fit norms ~ c1 delta + c2 delta^2.

    Returns (c1, c2, relative residual).
    """
    d = np.asarray(deltas, dtype=float)
    y = np.asarray(norms, dtype=float)
    coef, res = nnls(np.column_stack([d, d**2]), y)
    return float(coef[0]), float(coef[1]), float(res / np.linalg.norm(y))
