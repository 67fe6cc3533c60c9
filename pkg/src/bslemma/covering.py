"""Greedy nets, Vitali-type disjoint ball selection and doubling estimates.

Nets use closed coverage (``d <= r``); the support computations elsewhere use
open balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .metric import PointConfiguration


@dataclass(frozen=True)
class BallFamily:
    """Balls of a common radius centred at configuration points."""

    centers: tuple[int, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(int(c) for c in self.centers))
        if not self.centers:
            raise ValidationError("ball family must be non-empty")
        if not self.radius > 0:
            raise ValidationError("ball radius must be positive")


@dataclass(frozen=True)
class NetResult:
    net: list[int]
    radius: float
    covering_radius: float  # realised max distance to the nearest net point
    separation: float  # realised min distance between net points (inf for one point)


@dataclass(frozen=True)
class DoublingEstimate:
    samples: list[tuple[int, float, int]] = field(repr=False)
    D_hat: int
    dim_hat: float


def _greedy(d: np.ndarray, order: np.ndarray, threshold: float, strict: bool) -> list[int]:
    # scan ``order``; keep a point unless an already-kept one lies within the threshold
    blocked = np.zeros(d.shape[0], dtype=bool)
    kept = []
    for p in order:
        if blocked[p]:
            continue
        kept.append(int(p))
        row = d[p]
        blocked |= (row < threshold) if strict else (row <= threshold)
    return kept


def greedy_net(config: PointConfiguration, r: float, subset=None) -> NetResult:
    """Greedy ``r``-net in index order: a point joins unless some earlier net
    point lies within closed distance ``r``.  The net is ``r``-covering and
    strictly ``r``-separated."""
    if not r > 0:
        raise ValidationError("net radius must be positive")
    order = np.arange(len(config)) if subset is None else np.sort(np.asarray(subset, dtype=np.int64))
    if order.size == 0:
        return NetResult([], r, 0.0, math.inf)
    d = config.distances
    net = _greedy(d, order, r, strict=False)
    covering = float(d[np.ix_(order, net)].min(axis=1).max())
    if len(net) > 1:
        sub = d[np.ix_(net, net)] + np.diag(np.full(len(net), np.inf))
        separation = float(sub.min())
    else:
        separation = math.inf
    return NetResult(net, r, covering, separation)


def vitali_disjoint_subfamily(config: PointConfiguration, family: BallFamily) -> list[int]:
    """Scan the family in order and keep a ball unless its centre is within
    ``< 2r`` of a kept centre.

    Kept balls are pairwise disjoint, and every skipped ball of radius ``r``
    lies inside the ``5r`` ball about the kept centre that blocked it.
    """
    order = np.asarray(family.centers, dtype=np.int64)
    return _greedy(config.distances, order, 2.0 * family.radius, strict=True)


def doubling_count(config: PointConfiguration, center: int, R: float) -> int:
    """Size of a greedy ``R/2``-net of the points within closed distance ``R``
    of ``center``; an upper bound on the number of ``R/2``-balls needed to
    cover them."""
    if not R > 0:
        raise ValidationError("radius must be positive")
    members = np.flatnonzero(config.distances[center] <= R)
    if members.size == 0:
        return 0
    return len(_greedy(config.distances, members, R / 2.0, strict=False))


def estimate_doubling(config: PointConfiguration, sample_count: int, seed: int = 0) -> DoublingEstimate:
    """Max of :func:`doubling_count` over sampled (centre, radius) pairs.

    Centres are uniform over the configuration; radii are log-uniform between
    the smallest pairwise distance and the diameter.
    """
    if sample_count < 1:
        raise ValidationError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.integers(0, len(config), size=sample_count)
    lo = math.log(float(config.isolation_radii.min()))
    hi = math.log(config.diameter)
    radii = np.exp(rng.uniform(lo, hi, size=sample_count))
    samples = [
        (int(c), float(R), doubling_count(config, int(c), float(R)))
        for c, R in zip(centers, radii)
    ]
    D_hat = max(1, max(k for _, _, k in samples))
    return DoublingEstimate(samples, D_hat, math.log2(D_hat))
