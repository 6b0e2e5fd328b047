import math
import warnings

import numpy as np
import pytest

from leoma.channel import StationConfig, sinr
from leoma.exceptions import InvalidConfigError
from leoma.solver import (
    SolveResult,
    SolverConfig,
    init_layout,
    init_weights,
    optimize,
    power_gain_metrics,
    to_db,
)

from conftest import synthetic_slot


def test_sparse_grid_for_sixteen_antennas():
    s = StationConfig(N=16)
    lam = s.wavelength
    pos = init_layout("SFPA", s)
    assert pos.shape == (16, 2)
    np.testing.assert_allclose(pos[0], [0, 0])
    np.testing.assert_allclose(pos[-1], [3 * lam, 3 * lam])
    np.testing.assert_allclose(np.unique(np.round(pos[:, 0] / lam, 9)), [0, 1, 2, 3])
    np.testing.assert_array_equal(init_layout("MA", s), pos)


def test_dense_grid_for_sixteen_antennas():
    s = StationConfig(N=16)
    pos = init_layout("DFPA", s) / s.wavelength
    np.testing.assert_allclose(np.unique(np.round(pos, 9)), [0, 0.5, 1.0, 1.5])


def test_non_square_count_fills_rows():
    s = StationConfig(N=8)
    pos = init_layout("SFPA", s) / s.wavelength
    # three columns, row-major, spanning the whole side
    np.testing.assert_allclose(pos[:4], [[0, 0], [1.5, 0], [3, 0], [0, 1.5]])
    assert len(np.unique(np.round(pos[:, 1], 9))) == 3


def test_single_row_and_single_antenna_centered():
    s2 = StationConfig(N=2)
    np.testing.assert_allclose(init_layout("MA", s2)[:, 1], s2.region_side / 2)
    s1 = StationConfig(N=1)
    np.testing.assert_allclose(init_layout("MA", s1), [[s1.region_side / 2] * 2])


def test_layout_errors():
    with pytest.raises(InvalidConfigError):
        init_layout("XYZ", StationConfig())
    with pytest.raises(InvalidConfigError):
        init_layout("DFPA", StationConfig(N=100))
    with pytest.raises(InvalidConfigError):
        init_layout("SFPA", StationConfig(N=100))


@pytest.mark.parametrize(
    "kwargs", [dict(epsilon=0.0), dict(i_max=0), dict(scheme="GD"), dict(sca_steps=0), dict(curvature="x"),
               dict(ma_init="random")],
)
def test_solver_config_validation(kwargs):
    with pytest.raises(InvalidConfigError):
        SolverConfig(**kwargs)


def test_initial_weights_are_normalized_channels(station, slots):
    pos = init_layout("SFPA", station)
    w = init_weights(pos, slots, station)
    for slot, row in zip(slots, w):
        if slot.servable:
            assert np.linalg.norm(row) == pytest.approx(1.0)
        else:
            assert not np.any(row)


def test_huge_epsilon_stops_after_one_iteration(station, slots):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = optimize(slots, station, SolverConfig(scheme="MA", epsilon=10.0))
    assert res.iterations == 1 and res.converged
    assert len(res.trace) == 2 and len(res.fp_trace) == 1


def test_unservable_slots_reported(station, slots):
    with pytest.warns(UserWarning, match="no visible satellite"):
        res = optimize(slots, station, SolverConfig(scheme="DFPA"))
    assert res.unservable_slots == [m for m, s in enumerate(slots) if not s.servable]
    assert np.all(res.per_slot_rates[res.unservable_slots] == 0)


def test_runs_are_bit_identical(station, slots, desk_results):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        again = optimize(slots, station, SolverConfig(scheme="MA"))
    first = desk_results["MA"]
    np.testing.assert_array_equal(again.layout, first.layout)
    np.testing.assert_array_equal(again.weights, first.weights)
    assert again.trace == first.trace


def test_fixed_schemes_keep_their_layout(station, desk_results):
    np.testing.assert_array_equal(desk_results["DFPA"].layout, init_layout("DFPA", station))
    np.testing.assert_array_equal(desk_results["SFPA"].layout, init_layout("SFPA", station))


def test_trace_starts_at_initial_rate_and_ends_at_average(desk_results):
    for res in desk_results.values():
        assert res.avg_rate == pytest.approx(res.trace[-1])
        assert len(res.trace) == res.iterations + 1


def test_fp_trace_bounded_by_rate(slots, desk_results):
    # the transformed objective is a lower bound on the sum rate at the same point
    M = len(slots)
    for res in desk_results.values():
        for fp, rate in zip(res.fp_trace, res.trace[1:]):
            assert fp / M <= rate + 1e-9


def test_ma_reduces_interference_on_desk_scenario(desk_results):
    assert desk_results["MA"].interference_gain <= desk_results["DFPA"].interference_gain


def test_dense_start_option(station, slots, desk_results):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = optimize(slots, station, SolverConfig(scheme="MA", ma_init="dense", i_max=30))
    assert res.avg_rate >= desk_results["DFPA"].avg_rate


def test_power_gains_single_satellite(station):
    slot = synthetic_slot(station, 0, [(60, 10, 300.0)])
    res = optimize([slot], station, SolverConfig(scheme="DFPA"))
    desired, interference = power_gain_metrics(res, [slot], station)
    assert interference == 0.0 and to_db(interference) == -math.inf
    # matched filter with unit norm collects N times the per-antenna power
    assert desired == pytest.approx(station.N * station.P_s * slot.serving.d_bar, rel=1e-9)


def test_power_gains_reproduce_sinr(station):
    slot = synthetic_slot(station, 0, [(60, 10, 300.0), (35, 130, 200.0), (25, 250, 150.0)])
    res = optimize([slot], station, SolverConfig(scheme="SFPA"))
    desired, interference = power_gain_metrics(res, [slot], station)
    gamma = sinr(slot, res.layout, res.weights[0], station)
    assert desired / (interference + station.sigma2) == pytest.approx(gamma, rel=1e-9)


def test_to_db():
    assert to_db(100.0) == pytest.approx(20.0)
    assert to_db(0.0) == -math.inf


def test_result_defaults():
    r = SolveResult(scheme="MA", layout=np.zeros((1, 2)), weights=np.zeros((0, 1)), per_slot_rates=np.zeros(0),
                    avg_rate=0.0, trace=[0.0])
    assert r.fp_trace == [] and r.unservable_slots == [] and not r.converged
