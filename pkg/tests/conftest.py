import math
import warnings

import numpy as np
import pytest

from leoma.channel import SlotGeometry, SlotLink, StationConfig, build_slots, station_wave_vectors
from leoma.orbit import SatelliteId, ShellConfig, make_time_grid
from leoma.solver import SCHEMES, SolverConfig, optimize

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}

DESK = dict(K=24, J=12, N=8, M=50, theta_u=math.radians(20.0))


def desk_shell():
    return ShellConfig(J=DESK["J"], K=DESK["K"])


def desk_station(**kw):
    return StationConfig(N=kw.pop("N", DESK["N"]), **kw)


def desk_slots(station=None, M=DESK["M"]):
    shell = desk_shell()
    station = station or desk_station()
    grid = make_time_grid(shell, M)
    return build_slots(grid.midpoints, shell, station, DESK["theta_u"])


def synthetic_link(station, j, elev_deg, azim_deg, snr):
    """Link arriving from (elev, azim) with per-antenna SNR `snr` (linear)."""
    a = station_wave_vectors(math.radians(elev_deg), math.radians(azim_deg), station.wavelength)
    return SlotLink(sat=SatelliteId(1, j), a_eff=a, d_bar=snr * station.sigma2 / station.P_s, phase=0.0)


def synthetic_slot(station, t, links):
    serving, *rest = [synthetic_link(station, j + 1, *spec) for j, spec in enumerate(links)]
    return SlotGeometry(t_m=float(t), serving=serving, interferers=tuple(rest))


@pytest.fixture(scope="session")
def station():
    return desk_station()


@pytest.fixture(scope="session")
def slots(station):
    return desk_slots(station)


@pytest.fixture(scope="session")
def desk_results(station, slots):
    """One optimizer run per scheme on the desk-scale scenario."""
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for scheme in SCHEMES:
            out[scheme] = optimize(slots, station, SolverConfig(scheme=scheme))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
