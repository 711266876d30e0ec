import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_min_distance, haversine_m, pearson
from pedinteract.errors import (
    DegenerateTrajectoryError,
    InvalidInputError,
    NoOverlapError,
    OutOfRangeError,
    PreconditionError,
)
from pedinteract.geometry import (
    DirectionFit,
    GeoPoint,
    LocalPoint,
    TimedPose,
    Trajectory,
    angle_between,
    fit_direction,
    mean_speed,
    min_distance,
    project_to_local,
    relative_to_global,
    resample,
    rotate,
)

ORIGIN = GeoPoint(50.0, 13.0)


def line(t, xy, heading=None):
    return Trajectory(np.asarray(t, float), np.asarray(xy, float), heading)


# ---------------------------------------------------------------- projection

def test_project_origin_is_zero():
    p = project_to_local(ORIGIN, GeoPoint(50.0, 13.0))
    assert (p.x, p.y) == (0.0, 0.0)


def test_project_100m_north_matches_haversine():
    p = GeoPoint(50.0 + 100 / 111_194.9, 13.0)
    expected = haversine_m(ORIGIN.lat, ORIGIN.lon, p.lat, p.lon)
    local = project_to_local(ORIGIN, p)
    assert abs(local.x) < 1e-9
    assert local.y == pytest.approx(100.0, abs=0.1)
    assert local.y == pytest.approx(expected, abs=0.1)


def test_project_50m_east_matches_haversine():
    # bisection for the longitude offset whose great-circle distance is 50 m
    lo, hi = 0.0, 0.01
    for _ in range(200):
        mid = (lo + hi) / 2
        if haversine_m(50.0, 13.0, 50.0, 13.0 + mid) < 50.0:
            lo = mid
        else:
            hi = mid
    local = project_to_local(ORIGIN, GeoPoint(50.0, 13.0 + lo))
    assert local.x == pytest.approx(50.0, abs=0.1)
    assert abs(local.y) < 1e-9


@pytest.mark.parametrize("lat,lon", [(91.0, 0.0), (-91.0, 0.0), (0.0, 181.0), (0.0, -180.5)])
def test_geopoint_rejects_out_of_range(lat, lon):
    with pytest.raises(InvalidInputError):
        GeoPoint(lat, lon)


def test_project_rejects_far_points():
    with pytest.raises(InvalidInputError):
        project_to_local(ORIGIN, GeoPoint(51.5, 13.0))


@settings(max_examples=200, deadline=None)
@given(
    lat0=st.floats(-60, 60),
    lon0=st.floats(-170, 170),
    bearing=st.floats(0, 2 * math.pi),
    dist=st.floats(10, 3000),
)
def test_projection_agrees_with_haversine(lat0, lon0, bearing, dist):
    origin = GeoPoint(lat0, lon0)
    dlat = math.degrees(dist * math.cos(bearing) / 6_371_000.0)
    dlon = math.degrees(dist * math.sin(bearing) / (6_371_000.0 * math.cos(math.radians(lat0))))
    p = GeoPoint(lat0 + dlat, lon0 + dlon)
    local = project_to_local(origin, p)
    assert math.hypot(local.x, local.y) == pytest.approx(
        haversine_m(lat0, lon0, p.lat, p.lon), rel=1e-3
    )


# ---------------------------------------------------------------- relative_to_global

@pytest.mark.parametrize(
    "pos,heading,offset,expected",
    [
        ((0, 0), 0.0, (1, 0), (1, 0)),
        ((0, 0), math.pi / 2, (1, 0), (0, 1)),
        ((3, 4), math.pi, (2, 0), (1, 4)),
    ],
)
def test_relative_to_global(pos, heading, offset, expected):
    pose = TimedPose(0.0, LocalPoint(*pos), heading)
    g = relative_to_global(pose, LocalPoint(*offset))
    assert g.x == pytest.approx(expected[0], abs=1e-9)
    assert g.y == pytest.approx(expected[1], abs=1e-9)


def test_relative_to_global_needs_heading():
    with pytest.raises(PreconditionError):
        relative_to_global(TimedPose(0.0, LocalPoint(0, 0)), LocalPoint(1, 0))


# ---------------------------------------------------------------- fit_direction

def test_fit_on_diagonal():
    x = np.arange(10.0)
    fit = fit_direction(line(x, np.column_stack([x, x])))
    assert fit.direction == pytest.approx((math.sqrt(2) / 2, math.sqrt(2) / 2), abs=1e-12)
    assert fit.pearson_r == pytest.approx(1.0)


def test_fit_axis_aligned_reports_r_one():
    x = np.arange(10.0)
    fit = fit_direction(line(x, np.column_stack([x, np.full(10, 2.0)])))
    assert fit.direction == pytest.approx((1.0, 0.0), abs=1e-12)
    assert fit.pearson_r == 1.0


def test_fit_vertical_motion():
    y = np.arange(10.0)
    fit = fit_direction(line(y, np.column_stack([np.zeros(10), -y])))
    assert fit.direction == pytest.approx((0.0, -1.0), abs=1e-12)
    assert fit.pearson_r == 1.0


def test_fit_noisy_line_pearson_matches_direct_formula():
    rng = np.random.default_rng(11)
    x = np.linspace(0, 20, 50)
    y = 0.5 * x + rng.normal(0, 0.8, 50)
    fit = fit_direction(line(np.arange(50.0), np.column_stack([x, y])))
    assert fit.pearson_r == pytest.approx(pearson(list(x), list(y)), abs=0.05)
    assert fit.pearson_r == pytest.approx(pearson(list(x), list(y)), abs=1e-12)


def test_fit_direction_follows_time():
    x = np.arange(10.0)[::-1]
    fit = fit_direction(line(np.arange(10.0), np.column_stack([x, 2 * x])))
    assert fit.direction[0] < 0 and fit.direction[1] < 0


def test_fit_degenerate_identical_positions():
    with pytest.raises(DegenerateTrajectoryError):
        fit_direction(line([0, 1, 2], [[1, 1], [1, 1], [1, 1]]))


def test_fit_degenerate_zero_displacement():
    with pytest.raises(DegenerateTrajectoryError):
        fit_direction(line([0, 1, 2], [[0, 0], [1, 0], [0, 0]]))


@settings(max_examples=100, deadline=None)
@given(
    theta=st.floats(-math.pi, math.pi),
    shift=st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)),
    slope=st.floats(-3, 3),
)
def test_fit_rotation_equivariance(theta, shift, slope):
    x = np.linspace(0, 10, 20)
    xy = np.column_stack([x, slope * x + 0.3 * np.sin(x)])
    base = fit_direction(line(np.arange(20.0), xy))
    moved = fit_direction(line(np.arange(20.0), rotate(xy, theta) + np.asarray(shift)))
    expected = rotate(np.array(base.direction), theta)
    assert np.allclose(moved.direction, expected, atol=1e-6)


@settings(max_examples=100, deadline=None)
@given(theta=st.floats(-math.pi, math.pi), length=st.floats(1, 100))
def test_fit_exact_lines_always_pass_linearity(theta, length):
    x = np.linspace(0, length, 15)
    xy = rotate(np.column_stack([x, np.zeros_like(x)]), theta)
    assert abs(fit_direction(line(np.arange(15.0), xy)).pearson_r) > 0.5


# ---------------------------------------------------------------- angle_between

def _fit(dx, dy):
    n = math.hypot(dx, dy)
    return DirectionFit((dx / n, dy / n), 1.0, LocalPoint(0, 0))


@pytest.mark.parametrize(
    "a,b,expected",
    [((1, 0), (1, 0), 0.0), ((1, 0), (-1, 0), math.pi), ((1, 0), (0, 1), math.pi / 2)],
)
def test_angle_examples(a, b, expected):
    assert angle_between(_fit(*a), _fit(*b)) == pytest.approx(expected, abs=1e-12)


@given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_angle_symmetric_and_bounded(p, q):
    a, b = _fit(math.cos(p), math.sin(p)), _fit(math.cos(q), math.sin(q))
    assert angle_between(a, b) == angle_between(b, a)
    assert 0.0 <= angle_between(a, b) <= math.pi
    assert angle_between(a, a) == pytest.approx(0.0, abs=1e-7)


# ---------------------------------------------------------------- mean_speed

def test_mean_speed_straight():
    t = np.linspace(0, 10, 11)
    assert mean_speed(line(t, np.column_stack([t, np.zeros(11)]))) == pytest.approx(1.0)


def test_mean_speed_stationary():
    assert mean_speed(line([0, 5, 10], np.zeros((3, 2)))) == 0.0


def test_mean_speed_l_shape():
    traj = line([0, 3, 7], [[0, 0], [3, 0], [3, 4]])
    assert mean_speed(traj) == pytest.approx((3 + 4) / 7)


@given(st.floats(-math.pi, math.pi), st.floats(-100, 100), st.floats(-100, 100))
def test_mean_speed_rigid_invariance(theta, dx, dy):
    xy = np.array([[0, 0], [1, 2], [3, 3], [4, 7.5]])
    t = [0, 1, 2.5, 4]
    a = mean_speed(line(t, xy))
    b = mean_speed(line(t, rotate(xy, theta) + [dx, dy]))
    assert b == pytest.approx(a, rel=1e-9)


# ---------------------------------------------------------------- resample

def test_resample_identity():
    traj = line([0, 1, 3], [[0, 0], [1, 2], [5, -1]], [0.1, 0.2, 0.3])
    r = resample(traj, traj.t)
    assert np.array_equal(r.xy, traj.xy)
    assert np.array_equal(r.heading, traj.heading)


def test_resample_midpoint():
    traj = line([0, 10], [[0, 0], [10, 0]])
    assert traj.pose_at(5.0).position == LocalPoint(5.0, 0.0)


def test_resample_piecewise_hand_computed():
    traj = line([0, 2, 6], [[0, 0], [4, 0], [4, 8]])
    r = resample(traj, [0.5, 2.0, 3.0, 5.0])
    assert np.allclose(r.xy, [[1, 0], [4, 0], [4, 2], [4, 6]])


def test_resample_heading_shortest_arc():
    traj = line([0, 1], [[0, 0], [1, 0]], [math.pi - 0.1, -math.pi + 0.1])
    h = traj.pose_at(0.5).heading
    assert abs(abs(h) - math.pi) < 1e-9


def test_resample_rejects_extrapolation():
    traj = line([0, 10], [[0, 0], [10, 0]])
    with pytest.raises(OutOfRangeError):
        resample(traj, [5, 11])


def test_trajectory_validation():
    with pytest.raises(InvalidInputError):
        line([0], [[0, 0]])
    with pytest.raises(InvalidInputError):
        line([0, 0], [[0, 0], [1, 1]])


# ---------------------------------------------------------------- min_distance

def test_min_distance_identical():
    traj = line([0, 1, 2], [[0, 0], [1, 1], [2, 0]])
    assert min_distance(traj, traj) == 0.0


def test_min_distance_parallel():
    t = np.linspace(0, 10, 11)
    a = line(t, np.column_stack([t, np.zeros(11)]))
    b = line(t, np.column_stack([t, np.full(11, 2.0)]))
    assert min_distance(a, b) == pytest.approx(2.0)


def test_min_distance_crossing_matches_dense_grid():
    # a walks east, b walks north; sampled at different rates
    ta = np.linspace(0, 10, 6)
    a = line(ta, np.column_stack([ta - 5.0, np.zeros_like(ta)]))
    tb = np.linspace(1, 11, 4)
    b = line(tb, np.column_stack([np.full_like(tb, 0.5), 0.8 * (tb - 7.0)]))
    oracle = dense_min_distance(
        lambda t: (t - 5.0, 0.0), lambda t: (0.5, 0.8 * (t - 7.0)), 1.0, 10.0
    )
    assert min_distance(a, b) == pytest.approx(oracle, abs=0.05)


def test_min_distance_no_overlap():
    a = line([0, 1], [[0, 0], [1, 0]])
    b = line([2, 3], [[0, 0], [1, 0]])
    with pytest.raises(NoOverlapError):
        min_distance(a, b)


@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=3, max_size=8))
def test_min_distance_symmetric(points):
    t = np.arange(len(points), dtype=float)
    a = line(t, points)
    b = line(t + 0.5, np.asarray(points)[::-1])
    assert min_distance(a, b) == min_distance(b, a)
