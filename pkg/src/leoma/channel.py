"""
Per-slot channel quantities for the ground-station array.

The station frame has its z axis along the local vertical, so antennas sit
at z = 0 and only the x-y part of a wave vector changes their phases. That
2D part is what every routine here calls the effective wave vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import j1

from .exceptions import DegenerateGeometryError, InvalidConfigError, InvalidWeightsError
from .orbit import (
    SatelliteId,
    ShellConfig,
    constellation_state,
    ground_station_ecef,
    satellite_ecef,
    visibility_mask,
)

SPEED_OF_LIGHT = 299_792_458.0
GAIN_FORMS = ("printed", "squared")


@dataclass(frozen=True)
class StationConfig:
    """Ground-station array and link-budget parameters, SI units.

    Length defaults that scale with the wavelength (`region_side`, `d_min`,
    `r_ap`) and the free-space reference gain `rho0` are filled in from
    `wavelength` when left as ``None``.
    """

    N: int = 16
    wavelength: float = SPEED_OF_LIGHT / 14e9
    region_side: float | None = None
    d_min: float | None = None
    sigma2: float = 1e-15
    P_s: float = 1000.0
    r_ap: float | None = None
    eta: float = 0.5
    gamma_pl: float = 2.0
    rho0: float | None = None
    gain_form: str = field(default="printed")

    def __post_init__(self):
        lam = self.wavelength
        if not lam > 0:
            raise InvalidConfigError(f"wavelength must be positive, got {lam}")
        defaults = {
            "region_side": 3 * lam,
            "d_min": 0.5 * lam,
            "r_ap": 3 * lam,
            "rho0": (lam / (4 * math.pi)) ** 2,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if int(self.N) != self.N or self.N < 1:
            raise InvalidConfigError(f"N must be a positive integer, got {self.N}")
        if not self.region_side > 0:
            raise InvalidConfigError(f"region_side must be positive, got {self.region_side}")
        if not self.d_min >= 0:
            raise InvalidConfigError(f"d_min must be non-negative, got {self.d_min}")
        for name in ("sigma2", "P_s", "r_ap", "gamma_pl", "rho0"):
            if not getattr(self, name) > 0:
                raise InvalidConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.eta <= 1:
            raise InvalidConfigError(f"eta must lie in (0, 1], got {self.eta}")
        if self.gain_form not in GAIN_FORMS:
            raise InvalidConfigError(f"gain_form must be one of {GAIN_FORMS}, got {self.gain_form!r}")

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def peak_gain(self) -> float:
        """Boresight gain ``eta * (2*pi*r/lambda)^2`` of a satellite aperture."""
        return self.eta * (2 * math.pi * self.r_ap / self.wavelength) ** 2


@dataclass(frozen=True)
class SlotLink:
    sat: SatelliteId
    a_eff: np.ndarray
    d_bar: float
    phase: float


@dataclass(frozen=True)
class SlotGeometry:
    """Snapshot of one slot: serving link plus interfering links.

    `serving` is ``None`` when no satellite is visible; such a slot carries
    no rate.
    """

    t_m: float
    serving: SlotLink | None
    interferers: tuple[SlotLink, ...] = ()

    @property
    def servable(self) -> bool:
        return self.serving is not None

    @property
    def links(self) -> tuple[SlotLink, ...]:
        """Serving link first, then interferers."""
        if self.serving is None:
            return ()
        return (self.serving,) + tuple(self.interferers)

    @cached_property
    def wave_vectors(self) -> np.ndarray:
        out = np.array([lk.a_eff for lk in self.links], dtype=float).reshape(-1, 2)
        out.flags.writeable = False
        return out

    @cached_property
    def gains(self) -> np.ndarray:
        out = np.array([lk.d_bar for lk in self.links], dtype=float)
        out.flags.writeable = False
        return out


def sccs_basis(theta_u: float, t: float, cfg: ShellConfig, phi0: float = 0.0) -> np.ndarray:
    """Rotation from the station frame to the geocentric frame.

    Columns are (-east, north, -up) at the station. Wave vectors map into
    the station frame as ``T.T @ a``.
    """
    if abs(theta_u) > math.pi / 2:
        raise ValueError(f"|theta_u| must not exceed pi/2, got {theta_u}")
    phi = phi0 + 2 * math.pi * t / cfg.earth_period
    sp, cp = math.sin(phi), math.cos(phi)
    st, ct = math.sin(theta_u), math.cos(theta_u)
    return np.array(
        [
            [sp, -cp * st, -cp * ct],
            [-cp, -sp * st, -sp * ct],
            [0.0, ct, -st],
        ]
    )


def _link_terms(r_u, r_sat, basis, station: StationConfig):
    """Effective wave vector, range, and off-boresight angle for each satellite."""
    abar = r_u - r_sat
    dist = np.linalg.norm(abar, axis=-1)
    if np.any(dist == 0):
        raise DegenerateGeometryError("satellite and station coincide")
    a_full = station.wavenumber * abar / dist[..., None]
    a_eff = (a_full @ basis)[..., :2]
    nadir = -r_sat
    cross = np.linalg.norm(np.cross(abar, nadir), axis=-1)
    tau = np.arctan2(cross, np.sum(abar * nadir, axis=-1))
    return a_eff, dist, tau


def effective_wave_vector(
    sat: SatelliteId, t: float, shell: ShellConfig, station: StationConfig, theta_u: float, phi0: float = 0.0
) -> np.ndarray:
    r_u = ground_station_ecef(shell, theta_u, t, phi0)
    a_eff, _, _ = _link_terms(r_u, satellite_ecef(shell, sat, t), sccs_basis(theta_u, t, shell, phi0), station)
    return a_eff


def antenna_gain(tau, station: StationConfig):
    """Satellite aperture gain at off-boresight angle `tau`.

    ``"printed"`` evaluates ``4*D0*|J1(x)/x|`` with ``D(0) = D0``; note the
    jump to ``2*D0`` just off boresight. ``"squared"`` evaluates the
    continuous ``4*D0*(J1(x)/x)^2``. Angles beyond the hemisphere get 0.
    """
    tau = np.asarray(tau, dtype=float)
    d0 = station.peak_gain
    x = station.wavenumber * station.r_ap * np.sin(tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(x == 0, 0.5, j1(x) / np.where(x == 0, 1.0, x))
    if station.gain_form == "printed":
        gain = np.where(tau == 0, d0, 4 * d0 * np.abs(ratio))
    else:
        gain = 4 * d0 * ratio**2
    gain = np.where(np.abs(tau) > math.pi / 2, 0.0, gain)
    return float(gain) if gain.ndim == 0 else gain


def path_gain(dist, station: StationConfig):
    return station.rho0 * np.asarray(dist, dtype=float) ** (-station.gamma_pl)


def link_gain(
    sat: SatelliteId, t: float, shell: ShellConfig, station: StationConfig, theta_u: float, phi0: float = 0.0
) -> tuple[float, float]:
    """Combined gain ``D(tau) * rho`` and carrier phase of one link."""
    r_u = ground_station_ecef(shell, theta_u, t, phi0)
    _, dist, tau = _link_terms(r_u, satellite_ecef(shell, sat, t), sccs_basis(theta_u, t, shell, phi0), station)
    d_bar = float(antenna_gain(tau, station) * path_gain(dist, station))
    return d_bar, float(station.wavenumber * dist)


def steering_vector(a_eff, positions) -> np.ndarray:
    """Unit-modulus array response ``exp(1j * a_eff . c_n)``.

    `positions` has shape (N, 2). A stack of wave vectors with shape (L, 2)
    yields an (L, N) matrix.
    """
    phase = np.asarray(a_eff, dtype=float) @ np.asarray(positions, dtype=float).T
    out = np.empty(phase.shape, dtype=complex)
    np.cos(phase, out=out.real)
    np.sin(phase, out=out.imag)
    return out


def channel_vector(link: SlotLink, positions) -> np.ndarray:
    return math.sqrt(link.d_bar) * np.exp(1j * link.phase) * steering_vector(link.a_eff, positions)


def build_slot_geometry(
    t_m: float, shell: ShellConfig, station: StationConfig, theta_u: float, phi0: float = 0.0
) -> SlotGeometry:
    """Links to every visible ascending satellite at `t_m`.

    The serving satellite is the one with the largest combined gain; ties go
    to the smallest (j, k).
    """
    ids, pos, alpha = constellation_state(shell, t_m)
    r_u = ground_station_ecef(shell, theta_u, t_m, phi0)
    mask = visibility_mask(shell, r_u, pos, alpha)
    if not mask.any():
        return SlotGeometry(t_m=t_m, serving=None)
    idx = np.flatnonzero(mask)
    a_eff, dist, tau = _link_terms(r_u, pos[idx], sccs_basis(theta_u, t_m, shell, phi0), station)
    d_bar = antenna_gain(tau, station) * path_gain(dist, station)
    links = [
        SlotLink(sat=ids[i], a_eff=a_eff[n], d_bar=float(d_bar[n]), phase=float(station.wavenumber * dist[n]))
        for n, i in enumerate(idx)
    ]
    best = max(range(len(links)), key=lambda n: (links[n].d_bar, -n))
    serving = links.pop(best)
    return SlotGeometry(t_m=t_m, serving=serving, interferers=tuple(links))


def build_slots(times, shell: ShellConfig, station: StationConfig, theta_u: float, phi0: float = 0.0):
    return [build_slot_geometry(float(t), shell, station, theta_u, phi0) for t in times]


def received_powers(slot: SlotGeometry, positions, w) -> np.ndarray:
    """``d_bar * |s^H w|^2`` per link, serving first (without P_s)."""
    S = steering_vector(slot.wave_vectors, positions)
    return slot.gains * np.abs(S.conj() @ w) ** 2


def sinr(slot: SlotGeometry, positions, w, station: StationConfig) -> float:
    w = np.asarray(w, dtype=complex)
    norm2 = float(np.vdot(w, w).real)
    if norm2 == 0 or not np.all(np.isfinite(w)):
        raise InvalidWeightsError("weights must be finite and nonzero")
    if not slot.servable:
        return 0.0
    p = received_powers(slot, positions, w)
    return float(p[0] / (p[1:].sum() + station.sigma2 / station.P_s * norm2))


def slot_rates(slots, positions, weights, station: StationConfig) -> np.ndarray:
    """Per-slot ``log2(1 + sinr)``; unservable slots give 0."""
    weights = np.asarray(weights)
    if len(weights) != len(slots):
        raise ValueError(f"got {len(weights)} weight vectors for {len(slots)} slots")
    return np.array(
        [math.log2(1 + sinr(s, positions, w, station)) if s.servable else 0.0 for s, w in zip(slots, weights)]
    )


def average_rate(slots, positions, weights, station: StationConfig) -> float:
    if len(slots) == 0:
        return 0.0
    return float(np.mean(slot_rates(slots, positions, weights, station)))


def station_wave_vectors(elev, azim, wavelength: float) -> np.ndarray:
    """Effective wave vectors of plane waves arriving from (elevation, azimuth).

    Angles in radians; azimuth is measured from north towards east.
    Output has shape ``broadcast(elev, azim).shape + (2,)``.
    """
    elev, azim = np.broadcast_arrays(np.asarray(elev, float), np.asarray(azim, float))
    kc = 2 * math.pi / wavelength * np.cos(elev)
    return np.stack([kc * np.sin(azim), -kc * np.cos(azim)], axis=-1)


def direction_angles(a_eff, wavelength: float) -> tuple[float, float]:
    """Inverse of `station_wave_vectors` for a source above the horizon."""
    ax, ay = float(a_eff[0]), float(a_eff[1])
    c = min(1.0, math.hypot(ax, ay) * wavelength / (2 * math.pi))
    return math.acos(c), math.atan2(ax, -ay)


def beam_pattern(positions, w, a_grid) -> np.ndarray:
    """Array gain ``|s(a)^H w|^2`` over a grid of effective wave vectors."""
    w = np.asarray(w, dtype=complex)
    if not np.any(w):
        raise InvalidWeightsError("beam pattern of an all-zero weight vector")
    a_grid = np.asarray(a_grid, dtype=float)
    S = steering_vector(a_grid.reshape(-1, 2), positions)
    return (np.abs(S.conj() @ w) ** 2).reshape(a_grid.shape[:-1])
