"""
Lagrangian-dual and quadratic-transform reformulation of the sum rate.

For fixed positions and weights, each slot's log-rate is replaced by

    log2(1 + alpha) + [-alpha + 2*sqrt(1 + alpha)*Re(conj(beta)*A) - |beta|^2*B] / ln 2

which is a lower bound on ``log2(1 + sinr)`` for every (alpha, beta) and is
tight at ``alpha = sinr`` and ``beta = sqrt(1 + alpha) * A / B``. The
``1/ln 2`` on the bracket keeps the bound exact in base 2; it does not move
any maximizer in the weights or positions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SlotGeometry, StationConfig, sinr, steering_vector
from .exceptions import InvalidWeightsError, NumericalDegeneracyError

LN2 = math.log(2.0)


@dataclass
class AuxState:
    alpha: np.ndarray
    beta: np.ndarray

    @classmethod
    def zeros(cls, M: int) -> "AuxState":
        return cls(alpha=np.zeros(M), beta=np.zeros(M, dtype=complex))


def signal_terms(slot: SlotGeometry, positions, w, station: StationConfig) -> tuple[complex, float]:
    """Signal amplitude `A` and total received power `B` for one slot.

    `B` counts every visible satellite, the serving one included, plus
    noise, so ``sinr = |A|^2 / (B - |A|^2)``.
    """
    w = np.asarray(w, dtype=complex)
    norm2 = float(np.vdot(w, w).real)
    if norm2 == 0:
        raise InvalidWeightsError("weights must be nonzero")
    if not slot.servable:
        return 0j, station.sigma2 * norm2
    y = steering_vector(slot.wave_vectors, positions).conj() @ w
    A = complex(math.sqrt(station.P_s * slot.serving.d_bar) * y[0])
    B = float(station.P_s * (slot.gains @ np.abs(y) ** 2) + station.sigma2 * norm2)
    return A, B


def update_aux(gamma_m: float, A_m: complex, B_m: float) -> tuple[float, complex]:
    """Stationary point of the transformed objective in (alpha, beta)."""
    if not B_m > 0:
        raise NumericalDegeneracyError(f"B must be positive, got {B_m}")
    alpha = float(gamma_m)
    return alpha, math.sqrt(1 + alpha) * A_m / B_m


def _terms_all(slots, positions, weights, station):
    A = np.zeros(len(slots), dtype=complex)
    B = np.ones(len(slots))
    for m, (slot, w) in enumerate(zip(slots, weights)):
        if slot.servable:
            A[m], B[m] = signal_terms(slot, positions, w, station)
    return A, B


def refresh_aux(slots, positions, weights, station: StationConfig) -> AuxState:
    """Run `update_aux` on every servable slot; others keep alpha = beta = 0."""
    aux = AuxState.zeros(len(slots))
    A, B = _terms_all(slots, positions, weights, station)
    for m, slot in enumerate(slots):
        if slot.servable:
            gamma = sinr(slot, positions, weights[m], station)
            aux.alpha[m], aux.beta[m] = update_aux(gamma, A[m], B[m])
    return aux


def quadratic_terms(aux: AuxState, A, B) -> np.ndarray:
    """``2*sqrt(1+alpha)*Re(conj(beta)*A) - |beta|^2*B`` per slot."""
    return 2 * np.sqrt(1 + aux.alpha) * np.real(np.conj(aux.beta) * A) - np.abs(aux.beta) ** 2 * B


def fp_objective(positions, weights, aux: AuxState, slots, station: StationConfig) -> float:
    if not (len(weights) == len(slots) == len(aux.alpha) == len(aux.beta)):
        raise ValueError("weights, aux and slots must have matching lengths")
    A, B = _terms_all(slots, positions, weights, station)
    servable = np.array([s.servable for s in slots], dtype=bool)
    per_slot = np.log2(1 + aux.alpha) + (quadratic_terms(aux, A, B) - aux.alpha) / LN2
    return float(per_slot[servable].sum())
