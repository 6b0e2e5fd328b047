import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leoma.exceptions import InvalidConfigError
from leoma.orbit import (
    EARTH_RADIUS,
    MU_EARTH,
    SatelliteId,
    ShellConfig,
    anomaly,
    constellation_state,
    ground_station_ecef,
    make_time_grid,
    orbital_period,
    satellite_ecef,
    visibility_mask,
    visible_ascending_set,
    wrap_angle,
)


def test_period_matches_kepler_third_law():
    # independent route: mean motion n = sqrt(mu / a^3)
    cfg = ShellConfig(J=1, K=2)
    a = EARTH_RADIUS + 550e3
    assert orbital_period(cfg) == pytest.approx(2 * math.pi / math.sqrt(MU_EARTH / a**3), rel=1e-14)


def test_earth_period_defaults_to_fifteen_orbits():
    cfg = ShellConfig(J=60, K=80)
    assert cfg.earth_period == pytest.approx(15 * orbital_period(cfg), rel=1e-15)
    assert ShellConfig(J=1, K=2, earth_period=86164.0).earth_period == 86164.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(J=0, K=4), dict(J=2, K=1), dict(J=2, K=4, R=-1.0), dict(J=2, K=4, H=0.0),
     dict(J=2, K=4, beta=0.0), dict(J=2, K=4, beta=math.pi), dict(J=2, K=4, earth_period=-5.0)],
)
def test_shell_rejects_invalid_values(kwargs):
    with pytest.raises(InvalidConfigError):
        ShellConfig(**kwargs)


def test_initial_anomalies_span_ascending_half():
    cfg = ShellConfig(J=1, K=5)
    alphas = [anomaly(cfg, SatelliteId(1, k), 0.0) for k in range(1, 6)]
    np.testing.assert_allclose(alphas, np.linspace(-math.pi / 2, math.pi / 2, 5), atol=1e-15)


def test_anomaly_rejects_negative_time():
    with pytest.raises(ValueError):
        anomaly(ShellConfig(J=1, K=2), SatelliteId(1, 1), -1.0)


def test_satellite_on_orbit_sphere_and_inclined_plane():
    cfg = ShellConfig(J=3, K=7)
    for t in (0.0, 1234.5, 5000.0):
        _, pos, _ = constellation_state(cfg, t)
        np.testing.assert_allclose(np.linalg.norm(pos, axis=1), cfg.R + cfg.H, rtol=1e-14)
        # every orbit lies in a plane through the origin tilted by beta
        for j in range(1, cfg.J + 1):
            node = 2 * math.pi * j / cfg.J
            normal = np.array([math.sin(cfg.beta) * math.sin(node), -math.sin(cfg.beta) * math.cos(node),
                               math.cos(cfg.beta)])
            rows = pos[(j - 1) * cfg.K : j * cfg.K]
            np.testing.assert_allclose(rows @ normal, 0.0, atol=1e-6)


def test_equator_crossing_at_zero_anomaly():
    cfg = ShellConfig(J=4, K=3)
    # k = 2 starts at anomaly 0 when K = 3
    for j in range(1, 5):
        r = satellite_ecef(cfg, SatelliteId(j, 2), 0.0)
        assert r[2] == pytest.approx(0.0, abs=1e-6)
        assert math.atan2(r[1], r[0]) == pytest.approx(float(wrap_angle(2 * math.pi * j / 4)), abs=1e-12)


def test_maximum_latitude_equals_inclination():
    cfg = ShellConfig(J=1, K=3)
    T = orbital_period(cfg)
    r = satellite_ecef(cfg, SatelliteId(1, 2), T / 4)
    assert math.asin(r[2] / np.linalg.norm(r)) == pytest.approx(cfg.beta, abs=1e-12)


def test_state_matches_single_satellite_query():
    cfg = ShellConfig(J=3, K=4)
    ids, pos, _ = constellation_state(cfg, 777.0)
    for sat, p in zip(ids, pos):
        np.testing.assert_allclose(satellite_ecef(cfg, sat, 777.0), p, rtol=1e-14)


def test_ground_station_rotates_with_earth():
    cfg = ShellConfig(J=1, K=2)
    r0 = ground_station_ecef(cfg, 0.3, 0.0)
    r1 = ground_station_ecef(cfg, 0.3, cfg.earth_period / 4)
    assert np.linalg.norm(r0) == pytest.approx(cfg.R)
    assert r0[2] == pytest.approx(cfg.R * math.sin(0.3))
    np.testing.assert_allclose(r1[:2], [-r0[1], r0[0]], atol=1e-6)


def test_visibility_uses_coverage_range_and_ascending_flag():
    cfg = ShellConfig(J=1, K=3)
    r_u = ground_station_ecef(cfg, 0.0, 0.0)
    _, pos, alpha = constellation_state(cfg, 0.0)
    # only the overhead satellite is in range; others sit on the horizon plane limit or beyond
    assert visibility_mask(cfg, r_u, pos, alpha).tolist() == [False, True, False]
    descending = visibility_mask(cfg, r_u, pos, alpha + math.pi)
    assert not descending.any()
    assert visible_ascending_set(cfg, 0.0, 0.0) == [SatelliteId(1, 2)]


def test_coverage_boundary_is_horizon():
    # the range limit corresponds to zero elevation: sqrt((R+H)^2 - R^2)
    cfg = ShellConfig(J=1, K=2)
    limit = math.sqrt((cfg.R + cfg.H) ** 2 - cfg.R**2)
    r_u = np.array([cfg.R, 0.0, 0.0])
    inside = np.array([[cfg.R, limit * (1 - 1e-9), 0.0]])
    outside = np.array([[cfg.R, limit * (1 + 1e-9), 0.0]])
    ok = np.array([0.1])
    assert visibility_mask(cfg, r_u, inside, ok)[0]
    assert not visibility_mask(cfg, r_u, outside, ok)[0]


def test_time_grid_midpoints():
    cfg = ShellConfig(J=12, K=24)
    grid = make_time_grid(cfg, 50)
    assert grid.t_bar == pytest.approx(cfg.earth_period / 12)
    assert grid.midpoints[0] == pytest.approx(grid.t_bar / 100)
    assert grid.midpoints[-1] == pytest.approx(grid.t_bar * 99 / 100)
    assert np.all(np.diff(grid.midpoints) > 0)
    assert grid.slot_length == pytest.approx(grid.t_bar / 50)


def test_time_grid_warns_when_window_not_multiple_of_spacing():
    with pytest.warns(UserWarning, match="integer multiple"):
        make_time_grid(ShellConfig(J=7, K=24), 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        make_time_grid(ShellConfig(J=12, K=24), 10)


def test_time_grid_rejects_bad_count():
    with pytest.raises(InvalidConfigError):
        make_time_grid(ShellConfig(J=2, K=4), 0)


def test_timing_for_the_two_long_windows():
    assert ShellConfig(J=60, K=80).earth_period / 60 == pytest.approx(1433, abs=1)
    assert ShellConfig(J=72, K=96).earth_period / 72 == pytest.approx(1194, abs=1)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_wrap_angle_range_and_equivalence(x):
    y = float(wrap_angle(x))
    assert -math.pi < y <= math.pi
    assert math.cos(y) == pytest.approx(math.cos(x), abs=1e-9)
    assert math.sin(y) == pytest.approx(math.sin(x), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(2, 8), st.floats(0.0, 2e4))
def test_positions_on_sphere_property(J, K, t):
    cfg = ShellConfig(J=J, K=K)
    ids, pos, alpha = constellation_state(cfg, t)
    assert len(ids) == J * K == len(pos) == len(alpha)
    np.testing.assert_allclose(np.linalg.norm(pos, axis=1), cfg.R + cfg.H, rtol=1e-12)
    lat = np.arcsin(pos[:, 2] / (cfg.R + cfg.H))
    assert np.all(np.abs(lat) <= cfg.beta + 1e-12)
