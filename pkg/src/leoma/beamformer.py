"""Closed-form per-slot weight update for fixed positions and auxiliaries."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .channel import SlotGeometry, StationConfig, steering_vector
from .fp import AuxState


@dataclass(frozen=True)
class NormalEquations:
    """``U w = v`` for one slot. `degenerate` marks ``beta == 0``."""

    U: np.ndarray
    v: np.ndarray
    degenerate: bool = False


def assemble_normal_equations(
    slot: SlotGeometry, positions, alpha_m: float, beta_m: complex, station: StationConfig
) -> NormalEquations:
    S = steering_vector(slot.wave_vectors, positions)
    n = S.shape[1]
    # sum_l d_l s_l s_l^H
    cov = (S.T * slot.gains) @ S.conj()
    U = abs(beta_m) ** 2 * (station.sigma2 * np.eye(n) + station.P_s * cov)
    U = 0.5 * (U + U.conj().T)
    v = math.sqrt(station.P_s * slot.serving.d_bar * (1 + alpha_m)) * beta_m * S[0]
    return NormalEquations(U=U, v=v, degenerate=(beta_m == 0))


def solve_weights(ne: NormalEquations) -> np.ndarray:
    """Solve ``U w = v`` by Cholesky.

    A factorization failure is retried once with ``eps = 1e-12 * tr(U) / N``
    added to the diagonal.
    """
    n = ne.U.shape[0]
    try:
        factor = cho_factor(ne.U, lower=True)
    except LinAlgError:
        eps = 1e-12 * np.trace(ne.U).real / n
        warnings.warn(f"normal matrix not positive definite; adding {eps:.3e} * I", stacklevel=2)
        factor = cho_factor(ne.U + eps * np.eye(n), lower=True)
    return cho_solve(factor, ne.v)


def matched_filter(slot: SlotGeometry, positions) -> np.ndarray:
    s = steering_vector(slot.serving.a_eff, positions)
    return s / np.linalg.norm(s)


def update_weights(slots, positions, aux: AuxState, station: StationConfig) -> np.ndarray:
    """New weight matrix (M, N).

    Slots whose ``beta`` is zero fall back to the matched filter, since the
    closed form would return the all-zero vector there. Unservable slots
    keep zero weights.
    """
    n = np.asarray(positions).shape[0]
    out = np.zeros((len(slots), n), dtype=complex)
    for m, slot in enumerate(slots):
        if not slot.servable:
            continue
        if aux.beta[m] == 0:
            out[m] = matched_filter(slot, positions)
            continue
        ne = assemble_normal_equations(slot, positions, aux.alpha[m], aux.beta[m], station)
        out[m] = solve_weights(ne)
    return out
