"""Non-doubling witnesses.

Given a finite set ``A`` of diameter ``d``, cover it by the balls of radius
``d/10`` centred at its own points, keep a disjoint subfamily whose 5-fold
dilates still cover ``A``, and take the kept centres as ``C``.  The centres
are ``d/5``-separated, so every isolation radius is at least ``d/5`` and the
ball of radius ``rho / (1/20) >= 4d`` about any centre holds all of ``C``,
while a ball of radius ``rho / 20 < d/10`` (anywhere in the space) holds at
most one centre.  Every centre is then (1/20, |C| - 1)-supported.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .covering import BallFamily, vitali_disjoint_subfamily
from .errors import DegenerateWitnessError, ValidationError
from .metric import PointConfiguration

WITNESS_DELTA = Fraction(1, 20)


@dataclass(frozen=True)
class WitnessResult:
    centers: list[int]
    diameter: float
    min_separation: float
    max_isolation_radius: float
    verified: bool
    delta: Fraction = WITNESS_DELTA

    @property
    def s_achieved(self) -> int:
        return len(self.centers) - 1

    def to_json(self) -> dict:
        out = asdict(self)
        out["delta"] = str(self.delta)
        out["delta_value"] = float(self.delta)
        out["s_achieved"] = self.s_achieved
        out["separation_bound"] = self.diameter / 5.0
        out["radius_bound"] = 2.0 * self.diameter
        return out


def _center_stats(config: PointConfiguration, centers) -> tuple[float, float]:
    d = config.distances[np.ix_(centers, centers)] + np.diag(np.full(len(centers), np.inf))
    rho = d.min(axis=1)
    return float(rho.min()), float(rho.max())


def construct_witness(config: PointConfiguration) -> WitnessResult:
    if len(config) < 2:
        raise ValidationError("witness input needs at least 2 points")
    diameter = config.diameter
    family = BallFamily(tuple(range(len(config))), diameter / 10.0)
    centers = vitali_disjoint_subfamily(config, family)
    if len(centers) < 2:
        raise DegenerateWitnessError("input is covered by a single ball of radius diameter/10")
    min_sep, max_rho = _center_stats(config, centers)
    draft = WitnessResult(centers, diameter, min_sep, max_rho, verified=False)
    return WitnessResult(centers, diameter, min_sep, max_rho, verify_witness_analytic(config, draft))


def verify_witness_analytic(config: PointConfiguration, result: WitnessResult) -> bool:
    """Recheck the certificate from raw distances: centres pairwise at least
    ``diameter/5`` apart and every isolation radius within ``C`` below
    ``2 * diameter``.  Needs no optimisation over the ambient space."""
    centers = np.asarray(result.centers, dtype=np.int64)
    if centers.size < 2:
        return False
    d_n = result.diameter
    min_sep, max_rho = _center_stats(config, centers)
    if min_sep < d_n / 5.0 or not max_rho < 2.0 * d_n:
        return False
    # delta = 1/20: rho/delta >= 4 d_n reaches every centre; delta*rho < d_n/10
    delta = float(result.delta)
    outer = min_sep / delta
    reach = config.distances[np.ix_(centers, centers)].max()
    return bool(reach < outer and delta * max_rho < d_n / 10.0)
