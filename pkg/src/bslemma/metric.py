"""Metric spaces as vectorised distance oracles, finite configurations, open balls
and seeded configuration generators.

A space knows how to compute a block of distances between two arrays of points.
Coordinate spaces take ``(m, dim)`` float arrays; abstract spaces (distance
matrices, equilateral spaces) take 1-D integer index arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DuplicatePointError,
    GenerationError,
    InvalidPointError,
    MetricAxiomError,
    ValidationError,
)

#: Tolerance knob for the few comparisons that are not performed exactly.
EPS_TOL = 1e-12

#: Quasi-triangle constant of the Korányi gauge.  With the group law used below
#: the gauge is the Cygan metric, which satisfies the ordinary triangle inequality.
HEISENBERG_K = 1.0


class MetricSpace:
    """Base class.  Subclasses implement :meth:`pairwise` and :meth:`validate_points`."""

    #: Number of coordinates per point; ``None`` for index-valued spaces.
    dim: int | None = None

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate_points(self, points) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_coordinate(self) -> bool:
        return self.dim is not None

    def planar_reduction(self) -> tuple[int, Callable[[float], float]] | None:
        """``(euclidean_dim, radius_map)`` when balls of this space are Euclidean
        balls in dimension <= 2 with radius ``radius_map(r)``; otherwise ``None``."""
        return None

    def domain_mask(self, coords: np.ndarray) -> np.ndarray:
        """Which rows of a coordinate array are points of the space."""
        return np.ones(len(coords), dtype=bool)

    def ball_bounds(self, points: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate bounding box of the union of closed balls of radius ``r``."""
        raise NotImplementedError(f"{self!r} has no coordinate bounding boxes")


def _as_coords(points, dim: int) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim <= 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise InvalidPointError(f"expected points with {dim} coordinate(s), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPointError("coordinates must be finite")
    return arr


def _as_indices(points, size: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(points))
    if arr.ndim != 1:
        raise InvalidPointError("abstract spaces take a flat list of point indices")
    if not np.issubdtype(arr.dtype, np.integer):
        if arr.size and not (np.issubdtype(arr.dtype, np.floating) and np.all(np.mod(arr, 1) == 0)):
            raise InvalidPointError("abstract spaces take integer point indices")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= size):
        raise InvalidPointError(f"point index out of range for a space of size {size}")
    return arr


@dataclass(frozen=True)
class Euclidean(MetricSpace):
    dimension: int

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValidationError("Euclidean dimension must be a positive integer")

    @property
    def dim(self) -> int:
        return self.dimension

    def validate_points(self, points):
        return _as_coords(points, self.dimension)

    def pairwise(self, a, b):
        return cdist(a, b)

    def planar_reduction(self):
        if self.dimension <= 2:
            return self.dimension, float
        return None

    def ball_bounds(self, points, r):
        return points.min(axis=0) - r, points.max(axis=0) + r


@dataclass(frozen=True, eq=False)
class DistanceMatrix(MetricSpace):
    """Finite metric given by an explicit matrix, validated at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        m.setflags(write=False)
        validate_distance_matrix(m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def validate_points(self, points):
        return _as_indices(points, self.size)

    def pairwise(self, a, b):
        return self.matrix[np.ix_(a, b)]


@dataclass(frozen=True)
class Equilateral(MetricSpace):
    """``size`` points at mutual distance 1."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ValidationError("Equilateral space needs size >= 2")

    def validate_points(self, points):
        return _as_indices(points, self.size)

    def pairwise(self, a, b):
        return (a[:, None] != b[None, :]).astype(float)


@dataclass(frozen=True)
class HyperbolicHalfPlane(MetricSpace):
    """Upper half-plane ``{(x, y): y > 0}`` with curvature -1."""

    @property
    def dim(self) -> int:
        return 2

    def validate_points(self, points):
        arr = _as_coords(points, 2)
        if np.any(arr[:, 1] <= 0):
            raise InvalidPointError("half-plane points need a positive second coordinate")
        return arr

    def domain_mask(self, coords):
        return coords[:, 1] > 0

    def pairwise(self, a, b):
        # 2 asinh(|a-b| / (2 sqrt(y_a y_b))), the cancellation-free form of arccosh(1 + |a-b|^2 / (2 y_a y_b))
        chord = cdist(a, b)
        return 2.0 * np.arcsinh(chord / (2.0 * np.sqrt(np.outer(a[:, 1], b[:, 1]))))

    def ball_bounds(self, points, r):
        # the hyperbolic r-ball about (x, y) is the Euclidean disk centred (x, y cosh r) of radius y sinh r
        x, y = points[:, 0], points[:, 1]
        lo = np.array([np.min(x - y * math.sinh(r)), np.min(y) * math.exp(-r)])
        hi = np.array([np.max(x + y * math.sinh(r)), np.max(y) * math.exp(r)])
        return lo, hi


@dataclass(frozen=True)
class HeisenbergGauge(MetricSpace):
    """First Heisenberg group with the Korányi gauge distance.

    Points are ``(x, y, t)``; the group law is
    ``(z, t)(w, s) = (z + w, t + s + 2 Im(z conj(w)))`` and
    ``d(p, q) = (|z_q - z_p|^4 + dt^2)^(1/4)`` with
    ``dt = t_q - t_p + 2 (x_p y_q - y_p x_q)``.
    """

    @property
    def dim(self) -> int:
        return 3

    def validate_points(self, points):
        return _as_coords(points, 3)

    def pairwise(self, a, b):
        dx = b[None, :, 0] - a[:, None, 0]
        dy = b[None, :, 1] - a[:, None, 1]
        cross = a[:, None, 0] * b[None, :, 1] - a[:, None, 1] * b[None, :, 0]
        dt = (b[None, :, 2] - a[:, None, 2]) + 2.0 * cross
        planar = dx * dx + dy * dy
        return np.sqrt(np.sqrt(planar * planar + dt * dt))

    def ball_bounds(self, points, r):
        radial = np.hypot(points[:, 0], points[:, 1])
        slack = r * r + 2.0 * r * radial
        lo = np.array([points[:, 0].min() - r, points[:, 1].min() - r, np.min(points[:, 2] - slack)])
        hi = np.array([points[:, 0].max() + r, points[:, 1].max() + r, np.max(points[:, 2] + slack)])
        return lo, hi


@dataclass(frozen=True, eq=False)
class Snowflake(MetricSpace):
    """``d(x, y) ** epsilon`` over a base space."""

    base: MetricSpace
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError("snowflake exponent must lie in (0, 1)")

    @property
    def dim(self):
        return self.base.dim

    @property
    def size(self):
        return getattr(self.base, "size", None)

    def validate_points(self, points):
        return self.base.validate_points(points)

    def domain_mask(self, coords):
        return self.base.domain_mask(coords)

    def pairwise(self, a, b):
        return np.power(self.base.pairwise(a, b), self.epsilon)

    def planar_reduction(self):
        inner = self.base.planar_reduction()
        if inner is None:
            return None
        dim, radius_map = inner
        inv = 1.0 / self.epsilon
        return dim, lambda r: radius_map(r**inv)

    def ball_bounds(self, points, r):
        return self.base.ball_bounds(points, r ** (1.0 / self.epsilon))


@dataclass(frozen=True, eq=False)
class Scaled(MetricSpace):
    """``scale * d(x, y)`` over a base space."""

    base: MetricSpace
    scale: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValidationError("scale factor must be positive")

    @property
    def dim(self):
        return self.base.dim

    @property
    def size(self):
        return getattr(self.base, "size", None)

    def validate_points(self, points):
        return self.base.validate_points(points)

    def domain_mask(self, coords):
        return self.base.domain_mask(coords)

    def pairwise(self, a, b):
        return self.scale * self.base.pairwise(a, b)

    def planar_reduction(self):
        inner = self.base.planar_reduction()
        if inner is None:
            return None
        dim, radius_map = inner
        return dim, lambda r: radius_map(r / self.scale)

    def ball_bounds(self, points, r):
        return self.base.ball_bounds(points, r / self.scale)


def validate_distance_matrix(m: np.ndarray, tol: float = EPS_TOL) -> None:
    """Raise :class:`MetricAxiomError` unless ``m`` is a finite metric.

    Symmetry and the zero diagonal are checked exactly; the triangle inequality
    is checked in O(n^3) with relative slack ``tol``.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MetricAxiomError(f"distance matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if n < 2:
        raise MetricAxiomError("distance matrix needs at least 2 points")
    if not np.all(np.isfinite(m)):
        raise MetricAxiomError("distance matrix has non-finite entries")
    if not np.array_equal(m, m.T):
        i, j = np.argwhere(m != m.T)[0]
        raise MetricAxiomError(f"asymmetric entry at ({i}, {j}): {m[i, j]!r} != {m[j, i]!r}")
    if np.any(np.diag(m) != 0.0):
        raise MetricAxiomError("distance matrix diagonal must be zero")
    off = ~np.eye(n, dtype=bool)
    if np.any(m[off] <= 0.0):
        i, j = np.argwhere((m <= 0.0) & off)[0]
        raise MetricAxiomError(f"non-positive off-diagonal entry at ({i}, {j})")
    for k in range(n):
        through_k = m[:, k, None] + m[None, k, :]
        bad = m > through_k * (1.0 + tol)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise MetricAxiomError(
                f"triangle inequality fails: d({i},{j}) = {m[i, j]!r} > d({i},{k}) + d({k},{j}) = {through_k[i, j]!r}"
            )


def distance(space: MetricSpace, a, b) -> float:
    pa = space.validate_points(a)
    pb = space.validate_points(b)
    if len(pa) != 1 or len(pb) != 1:
        raise InvalidPointError("distance() takes single points")
    return float(space.pairwise(pa, pb)[0, 0])


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """An ordered, duplicate-free finite subset of a metric space."""

    space: MetricSpace
    points: np.ndarray

    def __post_init__(self):
        pts = self.space.validate_points(self.points)
        if len(pts) < 2:
            raise ValidationError("a configuration needs at least 2 points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        d = self.distances
        off = ~np.eye(len(pts), dtype=bool)
        if np.any(d[off] <= 0.0):
            i, j = np.argwhere((d <= 0.0) & off)[0]
            raise DuplicatePointError(f"points {i} and {j} coincide")

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def distances(self) -> np.ndarray:
        d = self.space.pairwise(self.points, self.points)
        np.fill_diagonal(d, 0.0)
        d.setflags(write=False)
        return d

    @cached_property
    def isolation_radii(self) -> np.ndarray:
        d = self.distances.copy()
        np.fill_diagonal(d, np.inf)
        return d.min(axis=1)

    @property
    def diameter(self) -> float:
        return float(self.distances.max())

    def distances_from(self, point) -> np.ndarray:
        p = self.space.validate_points(point)
        return self.space.pairwise(p, self.points)[0]

    def subset(self, indices) -> PointConfiguration:
        return PointConfiguration(self.space, self.points[np.asarray(indices, dtype=np.int64)])

    def with_space(self, space: MetricSpace) -> PointConfiguration:
        return PointConfiguration(space, self.points)


def ball_members(config: PointConfiguration, center, r: float) -> np.ndarray:
    """Indices ``i`` with ``d(center, C[i]) < r`` (open ball), ascending."""
    if not r > 0:
        raise ValidationError("ball radius must be positive")
    return np.flatnonzero(config.distances_from(center) < r)


# --- generators ------------------------------------------------------------

FAMILIES = ("uniform-square", "integer-grid", "hyperbolic-circle", "hyperbolic-disk", "equilateral")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    count: int
    seed: int = 0
    dimension: int = 2
    radius: float = 1.0  # hyperbolic families only

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown generator family {self.family!r}; expected one of {FAMILIES}")
        if self.count < 2:
            raise ValidationError("generator count must be >= 2")
        if self.family.startswith("hyperbolic") and not self.radius > 0:
            raise ValidationError("hyperbolic generators need a positive radius")

    def space(self) -> MetricSpace:
        if self.family in ("uniform-square", "integer-grid"):
            return Euclidean(self.dimension)
        if self.family == "equilateral":
            return Equilateral(self.count)
        return HyperbolicHalfPlane()


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint64)[0])


def _disk_to_half_plane(radius: np.ndarray, angle: np.ndarray) -> np.ndarray:
    # Poincaré disk -> half-plane via the Cayley map sending 0 to (0, 1)
    w = np.tanh(radius / 2.0) * np.exp(1j * angle)
    z = 1j * (1 + w) / (1 - w)
    return np.column_stack([z.real, z.imag])


def _sample(spec: GeneratorSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    if spec.family == "uniform-square":
        return rng.random((n, spec.dimension))
    # hyperbolic-disk: uniform in hyperbolic area, radial CDF (cosh r - 1) / (cosh R - 1)
    u = rng.random(n)
    r = np.arccosh(1.0 + u * (math.cosh(spec.radius) - 1.0))
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    return _disk_to_half_plane(r, theta)


def generate_configuration(spec: GeneratorSpec, max_retries: int = 100) -> PointConfiguration:
    space = spec.space()
    n = spec.count
    if spec.family == "equilateral":
        return PointConfiguration(space, np.arange(n))
    if spec.family == "integer-grid":
        width = math.ceil(round(n ** (1.0 / spec.dimension), 9))
        k = np.arange(n)
        cols = [(k // width**axis) % width for axis in range(spec.dimension)]
        return PointConfiguration(space, np.column_stack(cols).astype(float))
    if spec.family == "hyperbolic-circle":
        theta = 2.0 * math.pi * np.arange(n) / n
        return PointConfiguration(space, _disk_to_half_plane(np.full(n, spec.radius), theta))

    rng = np.random.default_rng(spec.seed)
    pts = _sample(spec, rng, n)
    for _ in range(max_retries):
        d = space.pairwise(pts, pts)
        dup = np.triu(d <= 0.0, 1).any(axis=0)
        if not dup.any():
            return PointConfiguration(space, pts)
        pts[dup] = _sample(spec, rng, int(dup.sum()))
    raise GenerationError(f"could not draw {n} distinct points after {max_retries} retries")


def hyperbolic_disk_count(radius: float, density: float) -> int:
    """Point count giving ``density`` points per unit hyperbolic area in a disk."""
    return max(2, round(density * 2.0 * math.pi * (math.cosh(radius) - 1.0)))


__all__ = [
    "EPS_TOL",
    "HEISENBERG_K",
    "MetricSpace",
    "Euclidean",
    "DistanceMatrix",
    "Equilateral",
    "HyperbolicHalfPlane",
    "HeisenbergGauge",
    "Snowflake",
    "Scaled",
    "PointConfiguration",
    "GeneratorSpec",
    "distance",
    "ball_members",
    "generate_configuration",
    "validate_distance_matrix",
    "derive_seed",
    "hyperbolic_disk_count",
]
