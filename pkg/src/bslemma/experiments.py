"""Supported-point sweeps, c(delta) fits and the snowflake / bi-Lipschitz
transfer checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidMapError, ValidationError
from .metric import EPS_TOL, Euclidean, GeneratorSpec, PointConfiguration, Snowflake, derive_seed, generate_configuration
from .support import SolverMode, deficits, default_mode


@dataclass(frozen=True)
class SweepSpec:
    generator: GeneratorSpec
    deltas: tuple[float, ...]
    s_values: tuple[int, ...]
    trials: int = 1
    seed: int = 0
    mode: SolverMode | None = None

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "s_values", tuple(int(s) for s in self.s_values))
        if not self.deltas or any(not 0.0 < d < 1.0 for d in self.deltas):
            raise ValidationError("sweep deltas must be non-empty and lie in (0, 1)")
        if not self.s_values or any(s < 2 for s in self.s_values):
            raise ValidationError("sweep s values must be non-empty and >= 2")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")


@dataclass(frozen=True)
class SweepRecord:
    delta: float
    s: int
    n: int
    supported_count: float  # mean over trials
    fraction: float
    c_hat_cell: float
    solver: str
    seed: int


SWEEP_FIELDS = ("delta", "s", "n", "supported_count", "fraction", "c_hat_cell", "solver", "seed")
FIT_FIELDS = ("delta", "c_hat", "reference_curve")


def trial_configuration(spec: SweepSpec, trial: int) -> PointConfiguration:
    gen = replace(spec.generator, seed=derive_seed(spec.seed, trial))
    return generate_configuration(gen)


def trial_deficits(spec: SweepSpec, trial: int) -> tuple[int, str, dict[float, np.ndarray]]:
    """Deficits of every point of one trial's configuration, per delta.

    Deficits do not depend on ``s``, so each (trial, delta) is solved once.
    """
    config = trial_configuration(spec, trial)
    mode = spec.mode or default_mode(config.space)
    return len(config), str(mode), {d: deficits(config, d, mode)[0] for d in spec.deltas}


def records_from_deficits(spec: SweepSpec, per_trial) -> list[SweepRecord]:
    records = []
    for delta in sorted(spec.deltas):
        for s in sorted(spec.s_values):
            counts = [int(np.count_nonzero(defs[delta] >= s)) for _, _, defs in per_trial]
            n = per_trial[0][0]
            mean = float(np.mean(counts))
            fraction = float(np.mean([c / m for c, (m, _, _) in zip(counts, per_trial)]))
            records.append(
                SweepRecord(delta, s, n, mean, fraction, fraction * s, per_trial[0][1], spec.seed)
            )
    return records


def bs_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepRecord]:
    """One record per (delta, s) cell, averaged over the trials.

    Trial configurations are seeded from ``(spec.seed, trial)`` and shared by
    every delta.  With ``workers`` the trials run in a process pool; the
    records are the same either way.
    """
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            per_trial = list(pool.map(trial_deficits, [spec] * spec.trials, range(spec.trials)))
    else:
        per_trial = [trial_deficits(spec, t) for t in range(spec.trials)]
    return records_from_deficits(spec, per_trial)


def reference_curve(delta: float, dimension: int = 2) -> float:
    return delta ** (-dimension) * math.log(1.0 / delta)


def fit_c_delta(records: list[SweepRecord]) -> dict[float, float]:
    """Empirical constant per delta: the max of ``c_hat_cell`` over s."""
    if not records:
        raise ValidationError("fit_c_delta needs at least one record")
    out: dict[float, float] = {}
    for rec in records:
        out[rec.delta] = max(out.get(rec.delta, 0.0), rec.c_hat_cell)
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class CDeltaRow:
    delta: float
    c_hat: float
    reference_curve: float


def c_delta_table(records: list[SweepRecord], dimension: int = 2) -> list[CDeltaRow]:
    return [CDeltaRow(d, c, reference_curve(d, dimension)) for d, c in fit_c_delta(records).items()]


# --- snowflake transfer ----------------------------------------------------


@dataclass
class SnowflakeTransferReport:
    equal: bool
    epsilon: float
    delta: float
    base_delta: float
    radius_mismatches: list[int] = field(default_factory=list)
    ball_mismatches: list[tuple[int, int]] = field(default_factory=list)
    boundary_hits: list[tuple[int, int]] = field(default_factory=list)
    deficit_mismatches: list[int] = field(default_factory=list)
    snow_deficits: list[int] = field(default_factory=list)
    base_deficits: list[int] = field(default_factory=list)


def _within_ulps(a: np.ndarray, b: np.ndarray, ulps: int = 1) -> np.ndarray:
    return np.abs(a - b) <= ulps * np.spacing(np.maximum(np.abs(a), np.abs(b)))


def check_snowflake_transfer(
    config: PointConfiguration, epsilon: float, delta: float, mode: SolverMode | None = None
) -> SnowflakeTransferReport:
    """Compare ``(d**epsilon, delta)`` on ``config`` with ``(d, delta**(1/epsilon))``.

    Checks, for every point: the snowflaked isolation radius is the base one
    raised to ``epsilon``; the outer balls hold the same points; and the
    deficits agree, which makes the supported sets agree for every ``s``.
    Outer-ball disagreements for points within ``EPS_TOL`` (relative) of the
    boundary are tolerated and listed in ``boundary_hits``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError("epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1)")
    snow = config.with_space(Snowflake(config.space, epsilon))
    base_delta = delta ** (1.0 / epsilon)
    report = SnowflakeTransferReport(True, epsilon, delta, base_delta)

    rho, rho_snow = config.isolation_radii, snow.isolation_radii
    report.radius_mismatches = np.flatnonzero(~_within_ulps(rho_snow, rho**epsilon)).tolist()

    for w in range(len(config)):
        outer_snow = snow.distances[w] < rho_snow[w] / delta
        base_radius = rho[w] / base_delta
        outer_base = config.distances[w] < base_radius
        for v in np.flatnonzero(outer_snow != outer_base):
            hit = (w, int(v))
            if abs(config.distances[w, v] - base_radius) <= EPS_TOL * base_radius:
                report.boundary_hits.append(hit)
            else:
                report.ball_mismatches.append(hit)

    snow_mode = mode or default_mode(snow.space)
    base_mode = mode or default_mode(config.space)
    d_snow, _ = deficits(snow, delta, snow_mode)
    d_base, _ = deficits(config, base_delta, base_mode)
    report.snow_deficits = d_snow.tolist()
    report.base_deficits = d_base.tolist()
    report.deficit_mismatches = np.flatnonzero(d_snow != d_base).tolist()
    report.equal = not (report.radius_mismatches or report.ball_mismatches or report.deficit_mismatches)
    return report


# --- bi-Lipschitz transfer -------------------------------------------------


@dataclass(frozen=True, eq=False)
class TransferMap:
    """Affine map ``x -> matrix @ x + offset`` with a declared bi-Lipschitz constant."""

    matrix: np.ndarray
    offset: np.ndarray
    lipschitz: float

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", np.broadcast_to(np.asarray(self.offset, dtype=float), (m.shape[0],)).copy())
        if m.shape[0] != m.shape[1]:
            raise InvalidMapError("transfer matrix must be square")
        if not self.lipschitz >= 1.0:
            raise InvalidMapError("declared Lipschitz constant must be >= 1")

    @classmethod
    def identity(cls, dim: int = 2) -> TransferMap:
        return cls(np.eye(dim), np.zeros(dim), 1.0)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return points @ self.matrix.T + self.offset

    def validate(self, config: PointConfiguration) -> None:
        """Raise :class:`InvalidMapError` unless ``d/L <= d' <= L d`` on every pair."""
        if config.space.dim != self.matrix.shape[0] or not isinstance(config.space, Euclidean):
            raise InvalidMapError("transfer maps act on Euclidean coordinate configurations")
        d = config.distances
        image = PointConfiguration(config.space, self(config.points)).distances
        L = self.lipschitz
        slack = 1.0 + EPS_TOL
        bad = (image * L * slack < d) | (image > L * d * slack)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise InvalidMapError(
                f"declared L={L} violated on pair ({i}, {j}): d={d[i, j]!r}, image d={image[i, j]!r}"
            )


def random_transfer_map(rng: np.random.Generator, lipschitz: float, dim: int = 2) -> TransferMap:
    """Rotation, axis stretch with singular values in ``[1/L, L]``, rotation, shift."""
    q1, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    q2, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    if lipschitz == 1.0:
        sv = np.ones(dim)
    else:
        sv = np.exp(rng.uniform(-math.log(lipschitz), math.log(lipschitz), size=dim))
        sv[0] = lipschitz  # make the declared constant tight
    return TransferMap(q1 @ np.diag(sv) @ q2, rng.normal(size=dim), lipschitz)


@dataclass
class BiLipschitzTransferReport:
    holds: bool
    lipschitz: float
    delta: float
    image_delta: float
    s: int
    radius_violations: list[int] = field(default_factory=list)
    source_supported: list[int] = field(default_factory=list)
    image_supported: list[int] = field(default_factory=list)
    inclusion_violations: list[int] = field(default_factory=list)


def check_bilipschitz_transfer(
    config: PointConfiguration, f: TransferMap, delta: float, s: int, mode: SolverMode | None = None
) -> BiLipschitzTransferReport:
    """Check that ``rho/L <= rho' <= L rho`` for every point and that every
    (delta, s)-supported point maps to a (delta/L^2, s)-supported point of the
    image.  Only this inclusion is checked, not equality."""
    f.validate(config)
    L = f.lipschitz
    image_delta = delta / (L * L)
    if not 0.0 < image_delta < 1.0 or not 0.0 < delta < 1.0:
        raise ValidationError("delta and delta/L^2 must lie in (0, 1)")
    image = PointConfiguration(config.space, f(config.points))
    rho, rho_img = config.isolation_radii, image.isolation_radii
    slack = 1.0 + EPS_TOL
    bad_rho = (rho_img * L * slack < rho) | (rho_img > L * rho * slack)

    mode_src = mode or default_mode(config.space)
    mode_img = mode or default_mode(image.space)
    src = np.flatnonzero(deficits(config, delta, mode_src)[0] >= s)
    img = np.flatnonzero(deficits(image, image_delta, mode_img)[0] >= s)
    missing = np.setdiff1d(src, img)
    return BiLipschitzTransferReport(
        holds=not bad_rho.any() and missing.size == 0,
        lipschitz=L,
        delta=delta,
        image_delta=image_delta,
        s=s,
        radius_violations=np.flatnonzero(bad_rho).tolist(),
        source_supported=src.tolist(),
        image_supported=img.tolist(),
        inclusion_violations=missing.tolist(),
    )
