import math

import numpy as np
import pytest

from leoma.beamformer import (
    NormalEquations,
    assemble_normal_equations,
    matched_filter,
    solve_weights,
    update_weights,
)
from leoma.channel import sinr, steering_vector
from leoma.fp import AuxState, fp_objective, refresh_aux

from conftest import synthetic_slot


def random_hpd(rng, n, cond=1e3):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    eig = np.geomspace(1.0, cond, n)
    return (Q * eig) @ Q.conj().T


@pytest.mark.parametrize("n", [1, 4, 16])
def test_solve_weights_small_residual(rng, n):
    for _ in range(20):
        U = random_hpd(rng, n)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        w = solve_weights(NormalEquations(U=U, v=v))
        assert np.linalg.norm(U @ w - v) <= 1e-10 * np.linalg.norm(v)


def test_solve_weights_regularizes_singular_matrix():
    U = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
    with pytest.warns(UserWarning, match="positive definite"):
        w = solve_weights(NormalEquations(U=U, v=np.array([1.0, 1.0], dtype=complex)))
    assert np.all(np.isfinite(w))


def test_normal_matrix_is_hermitian_pd(station, slots, rng):
    pos = rng.uniform(0, station.region_side, (station.N, 2))
    slot = next(s for s in slots if s.servable and s.interferers)
    ne = assemble_normal_equations(slot, pos, 2.0, 0.3 - 0.1j, station)
    np.testing.assert_array_equal(ne.U, ne.U.conj().T)
    assert np.linalg.eigvalsh(ne.U).min() > 0


def test_single_satellite_weights_are_matched_filter(station, rng):
    slot = synthetic_slot(station, 0, [(55, 30, 500.0)])
    pos = rng.uniform(0, station.region_side, (station.N, 2))
    w = update_weights([slot], pos, AuxState(np.array([4.0]), np.array([0.2 + 0.3j])), station)[0]
    s = steering_vector(slot.serving.a_eff, pos)
    cos = abs(np.vdot(s, w)) / (np.linalg.norm(s) * np.linalg.norm(w))
    assert math.sqrt(max(0.0, 1 - cos**2)) <= 1e-8


def test_weights_maximize_sinr_for_fixed_positions(station, rng):
    # the MMSE direction R^-1 s0 maximizes the Rayleigh quotient of the SINR
    slot = synthetic_slot(station, 0, [(60, 10, 300.0), (35, 130, 200.0), (25, 250, 150.0)])
    pos = rng.uniform(0, station.region_side, (station.N, 2))
    w0 = rng.normal(size=(1, station.N)) + 1j * rng.normal(size=(1, station.N))
    aux = refresh_aux([slot], pos, w0, station)
    w = update_weights([slot], pos, aux, station)[0]
    S = steering_vector(slot.wave_vectors, pos)
    d = slot.gains
    R = station.sigma2 / station.P_s * np.eye(station.N) + (S[1:].T * d[1:]) @ S[1:].conj()
    optimum = d[0] * np.real(S[0].conj() @ np.linalg.solve(R, S[0]))
    assert sinr(slot, pos, w, station) == pytest.approx(optimum, rel=1e-8)


def test_weight_update_does_not_decrease_fp_objective(station, slots, rng):
    pos = rng.uniform(0, station.region_side, (station.N, 2))
    w0 = rng.normal(size=(len(slots), station.N)) + 1j * rng.normal(size=(len(slots), station.N))
    aux = refresh_aux(slots, pos, w0, station)
    before = fp_objective(pos, w0, aux, slots, station)
    after = fp_objective(pos, update_weights(slots, pos, aux, station), aux, slots, station)
    assert after >= before - 1e-12 * abs(before)


def test_zero_beta_falls_back_to_matched_filter(station, rng):
    slot = synthetic_slot(station, 0, [(60, 10, 300.0), (35, 130, 200.0)])
    pos = rng.uniform(0, station.region_side, (station.N, 2))
    w = update_weights([slot], pos, AuxState.zeros(1), station)[0]
    np.testing.assert_allclose(w, matched_filter(slot, pos))
    assert np.linalg.norm(w) == pytest.approx(1.0)


def test_unservable_slots_get_zero_rows(station, slots):
    pos = np.zeros((station.N, 2))
    w = update_weights(slots, pos, AuxState.zeros(len(slots)), station)
    for slot, row in zip(slots, w):
        assert np.any(row) == slot.servable
