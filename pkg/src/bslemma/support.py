"""Isolation radii, deficits and (delta, s)-supported points.

For a point ``w`` of a configuration ``C`` with isolation radius ``rho``, the
*deficit* is the least number of points of ``C`` left in the open ball
``B(w, rho / delta)`` after deleting one open ball of radius ``delta * rho``
centred anywhere.  ``w`` is (delta, s)-supported iff its deficit is at least s.

Computing the deficit is a fixed-radius maximum-coverage problem for the
deleted ball; :class:`SolverMode` picks where its centre may range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ModeMismatchError, UndefinedRadiusError, ValidationError
from .metric import EPS_TOL, PointConfiguration

_CHUNK = 4096


@dataclass(frozen=True)
class SolverMode:
    kind: str
    resolution: int = 0

    def __post_init__(self):
        if self.kind not in ("restricted-to-c", "euclidean-exact-2d", "candidate-grid"):
            raise ValidationError(f"unknown solver mode {self.kind!r}")
        if self.kind == "candidate-grid" and self.resolution < 8:
            raise ValidationError("candidate grid resolution must be >= 8")

    @property
    def exact(self) -> bool:
        return self.kind == "euclidean-exact-2d"

    def __str__(self) -> str:
        if self.kind == "candidate-grid":
            return f"candidate-grid({self.resolution})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> SolverMode:
        """Accepts ``restricted-to-c``, ``euclidean-exact-2d``, ``candidate-grid``,
        ``candidate-grid:64`` and ``candidate-grid(64)``."""
        text = text.strip().lower()
        if text.startswith("candidate-grid"):
            res = text[len("candidate-grid"):].strip(":()") or "64"
            return cls("candidate-grid", int(res))
        return cls(text)


RESTRICTED_TO_C = SolverMode("restricted-to-c")
EUCLIDEAN_EXACT_2D = SolverMode("euclidean-exact-2d")


def candidate_grid(resolution: int = 64) -> SolverMode:
    return SolverMode("candidate-grid", resolution)


def default_mode(space) -> SolverMode:
    """Best available solver: exact for planar-reducible spaces, the
    configuration itself for abstract spaces, a 64-grid otherwise."""
    if space.planar_reduction() is not None:
        return EUCLIDEAN_EXACT_2D
    if not space.is_coordinate:
        return RESTRICTED_TO_C
    return candidate_grid(64)


@dataclass(frozen=True)
class SupportParams:
    delta: float
    s: int

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta!r}")
        if int(self.s) != self.s or self.s < 2:
            raise ValidationError(f"s must be an integer >= 2, got {self.s!r}")


@dataclass(frozen=True, eq=False)
class SupportReport:
    delta: float
    s: int
    mode: SolverMode
    isolation_radius: np.ndarray
    deficit: np.ndarray
    supported: np.ndarray
    centers: list

    @property
    def direction(self) -> str:
        # restricting the deleted ball's centre can only raise the infimum
        return "exact" if self.mode.exact else "upper-bound"

    def rows(self) -> list[dict]:
        return [
            {
                "index": i,
                "isolation_radius": float(self.isolation_radius[i]),
                "deficit": int(self.deficit[i]),
                "supported": bool(self.supported[i]),
            }
            for i in range(len(self.deficit))
        ]


def isolation_radius(config: PointConfiguration, w: int) -> float:
    if len(config) < 2:
        raise UndefinedRadiusError("isolation radius needs at least 2 points")
    return float(config.isolation_radii[w])


# --- maximum coverage ------------------------------------------------------


def _restricted(config, eligible, r):
    # a candidate whose own isolation radius is >= r covers only itself
    rho = config.isolation_radii
    counts = np.zeros(len(config), dtype=np.int64)
    counts[eligible] = 1
    crowded = np.flatnonzero(rho < r)
    if crowded.size and eligible.size:
        counts[crowded] = (config.distances[np.ix_(crowded, eligible)] < r).sum(axis=1)
    best = int(np.argmax(counts))
    return int(counts[best]), config.points[best]


def _circle_pair_centers(x: np.ndarray, radius: float) -> np.ndarray:
    """Both intersection points of radius-``radius`` circles about every pair of
    points closer than ``2 * radius``, ordered by pair then by side."""
    d = cdist(x, x)
    i, j = np.nonzero(np.triu(d <= 2.0 * radius, 1))
    if i.size == 0:
        return np.empty((0, 2))
    a, b, dd = x[i], x[j], d[i, j]
    mid = 0.5 * (a + b)
    h = np.sqrt(np.maximum(radius * radius - 0.25 * dd * dd, 0.0))
    normal = np.column_stack([a[:, 1] - b[:, 1], b[:, 0] - a[:, 0]]) / dd[:, None]
    out = np.empty((2 * i.size, 2))
    out[0::2] = mid + h[:, None] * normal
    out[1::2] = mid - h[:, None] * normal
    return out


def _best_center(candidates: np.ndarray, x: np.ndarray, radius: float):
    best_count, best_at = -1, 0
    for start in range(0, len(candidates), _CHUNK):
        counts = (cdist(candidates[start:start + _CHUNK], x) < radius).sum(axis=1)
        k = int(np.argmax(counts))
        if counts[k] > best_count:
            best_count, best_at = int(counts[k]), start + k
    return best_count, candidates[best_at]


def planar_max_coverage(x: np.ndarray, radius: float, tol: float = EPS_TOL):
    """Exact maximum number of planar points ``x`` inside one open disk of the
    given radius, and a centre attaining it.

    An optimal closed disk of radius ``radius * (1 - tol)`` can be slid until it
    is centred on a point or has two points on its boundary, so the points and
    the pairwise circle intersections form a complete candidate set.  Counting
    at those candidates uses the open disk of the full radius.
    """
    if len(x) == 0:
        return 0, np.zeros(2)
    shrunk = radius * (1.0 - tol)
    candidates = np.vstack([x, _circle_pair_centers(x, shrunk)])
    return _best_center(candidates, x, radius)


def _exact_2d(config, eligible, r):
    reduction = config.space.planar_reduction()
    if reduction is None:
        raise ModeMismatchError(f"euclidean-exact-2d needs a planar Euclidean space, got {config.space!r}")
    dim, radius_map = reduction
    x = config.points[eligible]
    if dim == 1:
        x = np.column_stack([x[:, 0], np.zeros(len(x))])
    count, center = planar_max_coverage(x, radius_map(r))
    if dim == 1:
        # an off-axis disk covers no more of the line than its projection
        center = center[:1]
    return count, center


def _grid(config, eligible, r, resolution):
    space = config.space
    if not space.is_coordinate:
        raise ModeMismatchError("candidate-grid needs a coordinate space")
    pts = config.points[eligible]
    lo, hi = space.ball_bounds(pts, r)
    axes = [np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, space.dim)
    grid = grid[space.domain_mask(grid)]
    candidates = np.vstack([pts, grid])
    best_count, best_at = -1, 0
    for start in range(0, len(candidates), _CHUNK):
        counts = (space.pairwise(candidates[start:start + _CHUNK], pts) < r).sum(axis=1)
        k = int(np.argmax(counts))
        if counts[k] > best_count:
            best_count, best_at = int(counts[k]), start + k
    return best_count, candidates[best_at]


def max_ball_coverage(config: PointConfiguration, eligible, r: float, mode: SolverMode):
    """Largest number of ``eligible`` points inside one open ball of radius ``r``.

    Returns ``(count, center)``.  The centre ranges over the configuration
    (``restricted-to-c``), the whole plane (``euclidean-exact-2d``) or a grid
    over the eligible points' bounding region plus the eligible points
    themselves (``candidate-grid``).  Ties go to the lowest candidate index.
    """
    if not r > 0:
        raise ValidationError("coverage radius must be positive")
    eligible = np.asarray(eligible, dtype=np.int64)
    if mode.kind == "euclidean-exact-2d":
        return _exact_2d(config, eligible, r)
    if eligible.size == 0:
        return 0, config.points[0]
    if mode.kind == "restricted-to-c":
        return _restricted(config, eligible, r)
    return _grid(config, eligible, r, mode.resolution)


def _deficit(config, w, delta, mode):
    rho = config.isolation_radii[w]
    outer = np.flatnonzero(config.distances[w] < rho / delta)
    count, center = max_ball_coverage(config, outer, delta * rho, mode)
    return len(outer) - count, center


def supported_deficit(config: PointConfiguration, w: int, delta: float, mode: SolverMode) -> int:
    """Deficit of point ``w``: exact under ``euclidean-exact-2d``, an upper
    bound on the true infimum under the other modes."""
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta!r}")
    return int(_deficit(config, w, delta, mode)[0])


def deficits(config: PointConfiguration, delta: float, mode: SolverMode):
    """Deficits of every point and the deleted-ball centres that realise them."""
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta!r}")
    out = np.empty(len(config), dtype=np.int64)
    centers = []
    for w in range(len(config)):
        out[w], c = _deficit(config, w, delta, mode)
        centers.append(c)
    return out, centers


def supported_points(config: PointConfiguration, params: SupportParams, mode: SolverMode | None = None):
    """Indices of the (delta, s)-supported points and the full per-point report."""
    mode = mode or default_mode(config.space)
    d, centers = deficits(config, params.delta, mode)
    supported = d >= params.s
    report = SupportReport(
        delta=params.delta,
        s=params.s,
        mode=mode,
        isolation_radius=config.isolation_radii.copy(),
        deficit=d,
        supported=supported,
        centers=centers,
    )
    return np.flatnonzero(supported), report
