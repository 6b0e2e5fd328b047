"""
Block coordinate ascent over auxiliaries, weights and (optionally) positions.

Three schemes share the loop: ``MA`` moves the antennas, ``SFPA`` and
``DFPA`` keep a fixed sparse or dense grid and only optimize weights.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .beamformer import update_weights
from .channel import StationConfig, channel_vector, received_powers, slot_rates
from .exceptions import InvalidConfigError
from .fp import fp_objective, refresh_aux
from .placement import CURVATURES, refine_layout

SCHEMES = ("MA", "SFPA", "DFPA")
MA_INITS = ("sparse", "dense")
INITIAL_SCALE = 1e-2


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-4
    i_max: int = 100
    scheme: str = "MA"
    sca_steps: int = 20
    sca_rtol: float = 1e-6
    curvature: str = "antenna"
    adaptive_curvature: bool = True
    ma_init: str = "sparse"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidConfigError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.i_max) != self.i_max or self.i_max < 1:
            raise InvalidConfigError(f"i_max must be a positive integer, got {self.i_max}")
        if self.scheme not in SCHEMES:
            raise InvalidConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.sca_steps) != self.sca_steps or self.sca_steps < 1:
            raise InvalidConfigError(f"sca_steps must be a positive integer, got {self.sca_steps}")
        if self.ma_init not in MA_INITS:
            raise InvalidConfigError(f"ma_init must be one of {MA_INITS}, got {self.ma_init!r}")
        if self.curvature not in CURVATURES:
            raise InvalidConfigError(f"curvature must be one of {CURVATURES}, got {self.curvature!r}")


@dataclass
class SolveResult:
    """Outcome of one `optimize` call.

    `trace` holds the average rate before the first iteration and after
    each one; `fp_trace` the transformed objective at the end of each
    iteration (before the next auxiliary refresh).
    """

    scheme: str
    layout: np.ndarray
    weights: np.ndarray
    per_slot_rates: np.ndarray
    avg_rate: float
    trace: list[float]
    fp_trace: list[float] = field(default_factory=list)
    desired_gain: float = 0.0
    interference_gain: float = 0.0
    iterations: int = 0
    converged: bool = False
    unservable_slots: list[int] = field(default_factory=list)
    timings: dict = field(default_factory=dict)


def _grid(n: int, spacing_x: float, spacing_y: float) -> np.ndarray:
    cols = math.ceil(math.sqrt(n))
    idx = np.arange(n)
    return np.column_stack([(idx % cols) * spacing_x, (idx // cols) * spacing_y]).astype(float)


def init_layout(scheme: str, station: StationConfig) -> np.ndarray:
    """Initial (N, 2) positions.

    ``MA`` and ``SFPA`` spread a ``ceil(sqrt(N))``-column grid over the
    whole region; ``DFPA`` packs the same grid at spacing ``lambda / 2``
    from the origin corner.
    """
    if scheme not in SCHEMES:
        raise InvalidConfigError(f"unknown scheme {scheme!r}")
    n = station.N
    if n == 1:
        return np.full((1, 2), station.region_side / 2)
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    if scheme == "DFPA":
        sx = sy = 0.5 * station.wavelength
        if (cols - 1) * sx > station.region_side:
            raise InvalidConfigError(f"N = {n} antennas at spacing lambda/2 do not fit the region")
    else:
        sx = station.region_side / (cols - 1)
        sy = station.region_side / (rows - 1) if rows > 1 else 0.0
    layout = _grid(n, sx, sy)
    if rows == 1 and scheme != "DFPA":
        layout[:, 1] = station.region_side / 2
    if min(sx, sy if rows > 1 else sx) < station.d_min * (1 - 1e-12):
        raise InvalidConfigError(f"N = {n} gives a grid spacing below d_min = {station.d_min}")
    return layout


def init_weights(layout, slots, station: StationConfig) -> np.ndarray:
    """Normalized serving channel per slot; zero rows for unservable slots."""
    out = np.zeros((len(slots), len(layout)), dtype=complex)
    for m, slot in enumerate(slots):
        if slot.servable:
            h = channel_vector(slot.serving, layout)
            out[m] = h / np.linalg.norm(h)
    return out


def power_gain_metrics(result: SolveResult, slots, station: StationConfig) -> tuple[float, float]:
    """Mean desired and interference power after unit-norm weight scaling."""
    desired = interference = 0.0
    for slot, w in zip(slots, result.weights):
        if not slot.servable:
            continue
        p = received_powers(slot, result.layout, w / np.linalg.norm(w))
        desired += station.P_s * p[0]
        interference += station.P_s * p[1:].sum()
    M = max(len(slots), 1)
    return desired / M, interference / M


def to_db(x: float) -> float:
    return 10 * math.log10(x) if x > 0 else -math.inf


def optimize(slots, station: StationConfig, cfg: SolverConfig = SolverConfig(), layout=None) -> SolveResult:
    """Run the alternating updates until the average rate settles.

    Stops when two consecutive average rates differ by at most
    ``cfg.epsilon`` or after ``cfg.i_max`` iterations. Without an explicit
    `layout`, ``MA`` starts from the sparse grid, or from the dense one when
    ``cfg.ma_init == "dense"``.
    """
    if layout is None:
        start = "DFPA" if cfg.scheme == "MA" and cfg.ma_init == "dense" else cfg.scheme
        layout = init_layout(start, station)
    layout = np.array(layout, dtype=float)
    weights = init_weights(layout, slots, station)
    unservable = [m for m, s in enumerate(slots) if not s.servable]
    if unservable:
        warnings.warn(f"{len(unservable)} of {len(slots)} slots have no visible satellite", stacklevel=2)
    M = max(len(slots), 1)

    rates = slot_rates(slots, layout, weights, station)
    trace = [float(rates.sum() / M)]
    fp_trace: list[float] = []
    timings = {"aux": 0.0, "weights": 0.0, "placement": 0.0}
    converged = False
    it = 0
    scale = INITIAL_SCALE if cfg.adaptive_curvature else None
    for it in range(1, cfg.i_max + 1):
        t0 = time.perf_counter()
        aux = refresh_aux(slots, layout, weights, station)
        t1 = time.perf_counter()
        weights = update_weights(slots, layout, aux, station)
        t2 = time.perf_counter()
        if cfg.scheme == "MA":
            layout, _, scale = refine_layout(
                slots, weights, aux, layout, station, cfg.sca_steps, cfg.sca_rtol, cfg.curvature, scale
            )
        t3 = time.perf_counter()
        timings["aux"] += t1 - t0
        timings["weights"] += t2 - t1
        timings["placement"] += t3 - t2

        fp_trace.append(fp_objective(layout, weights, aux, slots, station))
        rates = slot_rates(slots, layout, weights, station)
        trace.append(float(rates.sum() / M))
        if abs(trace[-1] - trace[-2]) <= cfg.epsilon:
            converged = True
            break

    result = SolveResult(
        scheme=cfg.scheme,
        layout=layout,
        weights=weights,
        per_slot_rates=rates,
        avg_rate=float(rates.mean()) if len(rates) else 0.0,
        trace=trace,
        fp_trace=fp_trace,
        iterations=it,
        converged=converged,
        unservable_slots=unservable,
        timings=timings,
    )
    result.desired_gain, result.interference_gain = power_gain_metrics(result, slots, station)
    return result
