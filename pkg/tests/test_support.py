import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bslemma.errors import ModeMismatchError, UndefinedRadiusError, ValidationError
from bslemma.metric import (
    Equilateral,
    Euclidean,
    GeneratorSpec,
    HyperbolicHalfPlane,
    PointConfiguration,
    Scaled,
    Snowflake,
    generate_configuration,
)
from bslemma.support import (
    EUCLIDEAN_EXACT_2D,
    RESTRICTED_TO_C,
    SolverMode,
    SupportParams,
    candidate_grid,
    default_mode,
    deficits,
    isolation_radius,
    max_ball_coverage,
    planar_max_coverage,
    supported_deficit,
    supported_points,
)


def grid_cover_1d(xs, r, lo, hi, steps=30000):
    """Oracle: best open-interval coverage over a fine grid of centres."""
    centers = np.linspace(lo, hi, steps + 1)
    return int((np.abs(np.asarray(xs)[None, :] - centers[:, None]) < r).sum(axis=1).max())


def grid_cover_2d(pts, r, steps=400):
    pts = np.asarray(pts, float)
    lo, hi = pts.min(axis=0) - r, pts.max(axis=0) + r
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], steps + 1), np.linspace(lo[1], hi[1], steps + 1))
    g = np.column_stack([gx.ravel(), gy.ravel()])
    d = np.hypot(g[:, None, 0] - pts[None, :, 0], g[:, None, 1] - pts[None, :, 1])
    return int((d < r).sum(axis=1).max())


# --- isolation radius -------------------------------------------------------


def test_isolation_radius_examples():
    c = PointConfiguration(Euclidean(1), [0, 1, 3])
    assert [isolation_radius(c, w) for w in range(3)] == [1.0, 1.0, 2.0]
    e = PointConfiguration(Equilateral(6), np.arange(6))
    assert all(isolation_radius(e, w) == 1.0 for w in range(6))
    s = PointConfiguration(Snowflake(Euclidean(1), 0.5), [0, 4, 9])
    assert isolation_radius(s, 0) == 2.0


def test_isolation_radius_needs_two_points():
    class Lonely:
        isolation_radii = np.array([1.0])

        def __len__(self):
            return 1

    with pytest.raises(UndefinedRadiusError):
        isolation_radius(Lonely(), 0)


# --- maximum coverage --------------------------------------------------------


def test_max_coverage_three_points_on_a_line():
    # frozen from grid_cover_1d([0, .5, 1], .6, -1, 2) == 3
    c = PointConfiguration(Euclidean(1), [0, 0.5, 1])
    count, center = max_ball_coverage(c, [0, 1, 2], 0.6, EUCLIDEAN_EXACT_2D)
    assert count == 3 == grid_cover_1d([0, 0.5, 1], 0.6, -1, 2)
    assert abs(center[0] - 0.5) < 0.1 + 1e-12


def test_max_coverage_two_points_unit_apart():
    c = PointConfiguration(Euclidean(1), [0, 1])
    assert grid_cover_1d([0, 1], 0.5, -1, 2) == 1
    for mode in (EUCLIDEAN_EXACT_2D, RESTRICTED_TO_C, candidate_grid(16)):
        assert max_ball_coverage(c, [0, 1], 0.5, mode)[0] == 1


def test_max_coverage_equilateral_restricted():
    c = PointConfiguration(Equilateral(9), np.arange(9))
    count, center = max_ball_coverage(c, np.arange(9), 1 / 20, RESTRICTED_TO_C)
    assert count == 1
    assert center == 0  # lowest index on ties


def test_mode_mismatch():
    e = PointConfiguration(Equilateral(4), np.arange(4))
    with pytest.raises(ModeMismatchError):
        max_ball_coverage(e, [0, 1], 0.5, EUCLIDEAN_EXACT_2D)
    with pytest.raises(ModeMismatchError):
        max_ball_coverage(e, [0, 1], 0.5, candidate_grid(8))
    h = generate_configuration(GeneratorSpec("hyperbolic-circle", 6, radius=1.0))
    with pytest.raises(ModeMismatchError):
        max_ball_coverage(h, [0, 1], 0.5, EUCLIDEAN_EXACT_2D)


def test_solver_mode_parsing():
    assert SolverMode.parse("candidate-grid:32") == candidate_grid(32)
    assert SolverMode.parse("candidate-grid(64)") == candidate_grid(64)
    assert SolverMode.parse("restricted-to-c") == RESTRICTED_TO_C
    assert str(candidate_grid(16)) == "candidate-grid(16)"
    with pytest.raises(ValidationError):
        candidate_grid(4)
    with pytest.raises(ValidationError):
        SolverMode.parse("simplex")


def test_default_modes():
    assert default_mode(Euclidean(2)) == EUCLIDEAN_EXACT_2D
    assert default_mode(Snowflake(Scaled(Euclidean(1), 2.0), 0.5)) == EUCLIDEAN_EXACT_2D
    assert default_mode(Equilateral(3)) == RESTRICTED_TO_C
    assert default_mode(Euclidean(3)) == candidate_grid(64)
    assert default_mode(HyperbolicHalfPlane()) == candidate_grid(64)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9), st.floats(0.05, 0.6))
def test_planar_coverage_matches_grid_oracle(seed, n, r):
    pts = np.random.default_rng(seed).random((n, 2))
    exact, center = planar_max_coverage(pts, r)
    oracle = grid_cover_2d(pts, r, steps=300)
    # the grid can only miss an optimum, never beat it
    assert oracle <= exact
    assert int((np.hypot(*(pts - center).T) < r).sum()) == exact


# --- deficits ----------------------------------------------------------------


def test_deficit_two_points():
    c = PointConfiguration(Euclidean(1), [0, 1])
    assert supported_deficit(c, 0, 0.5, EUCLIDEAN_EXACT_2D) == 1


def test_deficit_grid_center():
    # frozen: brute-force oracle over a 200x200 centre grid gives 8
    g = generate_configuration(GeneratorSpec("integer-grid", 25))
    assert supported_deficit(g, 12, 0.5, EUCLIDEAN_EXACT_2D) == 8
    outer = g.points[np.hypot(*(g.points - g.points[12]).T) < 2.0]
    assert len(outer) - grid_cover_2d(outer, 0.5, steps=200) == 8


@pytest.mark.parametrize("n", [3, 10, 25])
def test_deficit_equilateral(n):
    e = PointConfiguration(Equilateral(n), np.arange(n))
    assert supported_deficit(e, 0, 1 / 20, RESTRICTED_TO_C) == n - 1


def test_delta_validation():
    c = PointConfiguration(Euclidean(1), [0, 1])
    with pytest.raises(ValidationError):
        supported_deficit(c, 0, 1.0, EUCLIDEAN_EXACT_2D)
    with pytest.raises(ValidationError):
        SupportParams(0.5, 1)
    with pytest.raises(ValidationError):
        SupportParams(0.0, 2)


def test_supported_points_examples():
    c = PointConfiguration(Euclidean(1), [0, 1])
    idx, report = supported_points(c, SupportParams(0.5, 2), EUCLIDEAN_EXACT_2D)
    assert idx.tolist() == []
    assert report.deficit.tolist() == [1, 1]
    assert report.direction == "exact"

    e = PointConfiguration(Equilateral(10), np.arange(10))
    idx, report = supported_points(e, SupportParams(1 / 20, 9))
    assert idx.tolist() == list(range(10))
    assert report.direction == "upper-bound"
    assert all(row["supported"] for row in report.rows())


def test_s_above_size_gives_nothing():
    c = generate_configuration(GeneratorSpec("uniform-square", 30, seed=2))
    idx, _ = supported_points(c, SupportParams(0.1, 31))
    assert idx.size == 0


def test_report_invariants():
    c = generate_configuration(GeneratorSpec("uniform-square", 60, seed=9))
    _, report = supported_points(c, SupportParams(0.25, 5))
    assert np.array_equal(report.supported, report.deficit >= 5)
    d = c.distances + np.diag(np.full(len(c), np.inf))
    assert np.array_equal(report.isolation_radius, d.min(axis=1))


def test_hyperbolic_grid_mode_runs():
    h = generate_configuration(GeneratorSpec("hyperbolic-disk", 40, seed=4, radius=3.0))
    d_grid, _ = deficits(h, 0.3, candidate_grid(16))
    d_restr, _ = deficits(h, 0.3, RESTRICTED_TO_C)
    # the grid candidates include the eligible points, so it is at least as good
    assert np.all(d_grid <= d_restr)
    assert np.all(d_grid >= 0)


# --- properties ---------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def _planar(seed, n=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(5, 40))
    return PointConfiguration(Euclidean(2), rng.random((n, 2)))


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.1, 0.9), st.integers(2, 10), st.integers(0, 10))
def test_monotone_in_s(seed, delta, s, extra):
    c = _planar(seed)
    lo = set(supported_points(c, SupportParams(delta, s))[0].tolist())
    hi = set(supported_points(c, SupportParams(delta, s + extra))[0].tolist())
    assert hi <= lo


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.1, 0.9), st.floats(0.3, 1.0))
def test_monotone_in_delta(seed, delta, shrink):
    c = _planar(seed)
    big, _ = deficits(c, delta, EUCLIDEAN_EXACT_2D)
    small, _ = deficits(c, delta * shrink, EUCLIDEAN_EXACT_2D)
    assert np.all(small >= big)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.1, 0.9), st.floats(0, 2 * math.pi))
def test_isometry_invariance(seed, delta, angle):
    c = _planar(seed)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    perm = np.random.default_rng(seed).permutation(len(c))
    moved = PointConfiguration(Euclidean(2), c.points[perm] @ rot.T + np.array([3.0, -1.5]))
    a, _ = deficits(c, delta, EUCLIDEAN_EXACT_2D)
    b, _ = deficits(moved, delta, EUCLIDEAN_EXACT_2D)
    assert np.array_equal(a[perm], b)
    assert np.allclose(c.isolation_radii[perm], moved.isolation_radii, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.1, 0.9), st.sampled_from([0.25, 0.5, 2.0, 3.0, 8.0]))
def test_scale_invariance(seed, delta, lam):
    c = _planar(seed)
    scaled = c.with_space(Scaled(Euclidean(2), lam))
    a, _ = deficits(c, delta, EUCLIDEAN_EXACT_2D)
    b, _ = deficits(scaled, delta, EUCLIDEAN_EXACT_2D)
    assert np.array_equal(a, b)
    assert np.array_equal(scaled.isolation_radii, lam * c.isolation_radii)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.15, 0.9))
def test_solver_ordering_and_bounds(seed, delta):
    c = _planar(seed, n=15)
    exact, _ = deficits(c, delta, EUCLIDEAN_EXACT_2D)
    restricted, _ = deficits(c, delta, RESTRICTED_TO_C)
    grid, _ = deficits(c, delta, candidate_grid(24))
    assert np.all(exact <= restricted)
    assert np.all(exact <= grid)
    for w in range(len(c)):
        outer = int((c.distances[w] < c.isolation_radii[w] / delta).sum())
        assert 0 <= restricted[w] <= outer - 1
        assert 0 <= exact[w] <= outer - 1
