"""
Walker-Delta shell kinematics seen from a rotating ground station.

Positions live in a geocentric Cartesian frame whose x axis points to the
ascending node of the reference orbit at t = 0. The frame does not rotate
with the earth; the ground station does.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidConfigError

#: Standard gravitational parameter of the earth (m^3/s^2).
MU_EARTH = 3.986004418e14
EARTH_RADIUS = 6371e3


def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(x, dtype=float), 2 * math.pi)


class SatelliteId(NamedTuple):
    """1-based (orbit, in-orbit) index of a satellite."""

    j: int
    k: int

    @property
    def label(self) -> str:
        return f"S{self.j}_{self.k}"


@dataclass(frozen=True)
class ShellConfig:
    """Constellation geometry constants.

    `earth_period` defaults to ``15 * T`` (a whole number of orbits per
    earth rotation) when left as ``None``.
    """

    J: int
    K: int
    R: float = EARTH_RADIUS
    H: float = 550e3
    beta: float = math.radians(65.0)
    mu: float = MU_EARTH
    earth_period: float | None = field(default=None)

    def __post_init__(self):
        if int(self.J) != self.J or self.J < 1:
            raise InvalidConfigError(f"J must be a positive integer, got {self.J}")
        if int(self.K) != self.K or self.K < 2:
            raise InvalidConfigError(f"K must be an integer >= 2, got {self.K}")
        if not self.R > 0:
            raise InvalidConfigError(f"R must be positive, got {self.R}")
        if not self.H > 0:
            raise InvalidConfigError(f"H must be positive, got {self.H}")
        if not 0 < self.beta < math.pi:
            raise InvalidConfigError(f"beta must lie in (0, pi), got {self.beta}")
        if not self.mu > 0:
            raise InvalidConfigError(f"mu must be positive, got {self.mu}")
        if self.earth_period is None:
            object.__setattr__(self, "earth_period", 15.0 * _period(self.R, self.H, self.mu))
        elif not self.earth_period > 0:
            raise InvalidConfigError(f"earth_period must be positive, got {self.earth_period}")

    @property
    def n_satellites(self) -> int:
        return self.J * self.K

    def satellite_ids(self) -> list[SatelliteId]:
        return [SatelliteId(j, k) for j in range(1, self.J + 1) for k in range(1, self.K + 1)]


@dataclass(frozen=True)
class TimeGrid:
    t_bar: float
    M: int
    midpoints: np.ndarray

    @property
    def slot_length(self) -> float:
        return self.t_bar / self.M


def _period(R, H, mu):
    return 2 * math.pi * math.sqrt((R + H) ** 3 / mu)


def orbital_period(cfg: ShellConfig) -> float:
    """Circular-orbit period ``2*pi*sqrt((R+H)^3/mu)`` in seconds."""
    return _period(cfg.R, cfg.H, cfg.mu)


def _initial_anomaly(cfg: ShellConfig, k):
    if cfg.K < 2:
        raise InvalidConfigError("initial anomaly needs K >= 2")
    return -math.pi / 2 + math.pi * (np.asarray(k) - 1) / (cfg.K - 1)


def anomaly(cfg: ShellConfig, sat: SatelliteId, t: float) -> float:
    """Angle from the ascending node to the satellite at time `t` (rad)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return 2 * math.pi * t / orbital_period(cfg) + float(_initial_anomaly(cfg, sat.k))


def _spherical_to_cartesian(radius, elev, azim):
    ce = np.cos(elev)
    return np.stack(
        [radius * ce * np.cos(azim), radius * ce * np.sin(azim), radius * np.sin(elev) * np.ones_like(azim)],
        axis=-1,
    )


def _sat_angles(cfg: ShellConfig, j, alpha):
    # atan2 keeps the azimuth continuous past |alpha| = pi/2
    elev = np.arcsin(math.sin(cfg.beta) * np.sin(alpha))
    azim = np.arctan2(math.cos(cfg.beta) * np.sin(alpha), np.cos(alpha)) + 2 * math.pi * np.asarray(j) / cfg.J
    return elev, wrap_angle(azim)


def satellite_ecef(cfg: ShellConfig, sat: SatelliteId, t: float) -> np.ndarray:
    """Position of one satellite in the geocentric Cartesian frame (m)."""
    alpha = anomaly(cfg, sat, t)
    elev, azim = _sat_angles(cfg, sat.j, alpha)
    return _spherical_to_cartesian(cfg.R + cfg.H, elev, azim)


def constellation_state(cfg: ShellConfig, t: float):
    """All satellites at time `t`.

    Returns
    -------
    ids : list of SatelliteId
        Ordered by (j, k).
    positions : ndarray, shape (J*K, 3)
    alpha : ndarray, shape (J*K,)
        Anomalies, unwrapped.
    """
    ids = cfg.satellite_ids()
    j = np.array([s.j for s in ids])
    k = np.array([s.k for s in ids])
    alpha = 2 * math.pi * t / orbital_period(cfg) + _initial_anomaly(cfg, k)
    elev, azim = _sat_angles(cfg, j, alpha)
    return ids, _spherical_to_cartesian(cfg.R + cfg.H, elev, azim), alpha


def ground_station_ecef(cfg: ShellConfig, theta_u: float, t: float, phi0: float = 0.0) -> np.ndarray:
    """Ground station position; its azimuth advances as ``phi0 + 2*pi*t/T_E``."""
    if abs(theta_u) > math.pi / 2:
        raise ValueError(f"|theta_u| must not exceed pi/2, got {theta_u}")
    phi = phi0 + 2 * math.pi * t / cfg.earth_period
    return _spherical_to_cartesian(cfg.R, theta_u, np.float64(phi))


def visibility_mask(cfg: ShellConfig, r_u: np.ndarray, positions: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    d2 = np.sum((positions - r_u) ** 2, axis=-1)
    return (d2 <= (cfg.R + cfg.H) ** 2 - cfg.R**2) & (np.cos(alpha) > 0)


def visible_ascending_set(cfg: ShellConfig, theta_u: float, t: float, phi0: float = 0.0) -> list[SatelliteId]:
    """Satellites within the coverage range that are on the ascending segment."""
    ids, pos, alpha = constellation_state(cfg, t)
    mask = visibility_mask(cfg, ground_station_ecef(cfg, theta_u, t, phi0), pos, alpha)
    return [s for s, v in zip(ids, mask) if v]


def make_time_grid(cfg: ShellConfig, M: int) -> TimeGrid:
    """Split ``(0, T_E/J]`` into `M` slots represented by their midpoints."""
    if int(M) != M or M < 1:
        raise InvalidConfigError(f"M must be a positive integer, got {M}")
    t_bar = cfg.earth_period / cfg.J
    spacing = orbital_period(cfg) / cfg.K
    ratio = t_bar / spacing
    if abs(ratio - round(ratio)) > 1e-6 * max(1.0, ratio):
        warnings.warn(
            f"window {t_bar:.3f} s is not an integer multiple of the intra-orbit "
            f"spacing period {spacing:.3f} s (ratio {ratio:.4f})",
            stacklevel=2,
        )
    midpoints = (np.arange(1, M + 1) - 0.5) * t_bar / M
    return TimeGrid(t_bar=t_bar, M=int(M), midpoints=midpoints)
