"""
Majorize-minimize update of the antenna positions.

Positions are flattened as ``c = [x1, y1, x2, y2, ...]``. For fixed weights
and auxiliaries the quantity to minimize is

    f(c) = sum_m |beta_m|^2 B_m(c) - 2 sqrt(1 + alpha_m) Re(conj(beta_m) A_m(c)).

Each step replaces f by an isotropic quadratic that touches it at the
current layout and lies above it everywhere, then minimizes that quadratic
over the movement box intersected with linearized spacing constraints.
Because the Hessian is ``kappa * I`` the subproblem is a Euclidean
projection onto a polytope, solved here by a primal active-set method.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .channel import SlotGeometry, StationConfig, steering_vector
from .fp import AuxState, _terms_all, quadratic_terms

CURVATURES = ("antenna", "norm")
MIN_SCALE = 1e-4


@dataclass(frozen=True)
class SurrogateModel:
    """Quadratic upper bound ``(kappa/2)|c|^2 + q.c + constant``.

    `grad` and `f0` are the gradient and value of the bounded function at
    `c0`; `value` evaluates around `c0` to avoid cancellation.
    """

    kappa: float
    q: np.ndarray
    c0: np.ndarray
    constant: float
    grad: np.ndarray
    f0: float

    def value(self, c) -> float:
        d = np.ravel(c) - self.c0
        return float(self.f0 + self.grad @ d + 0.5 * self.kappa * (d @ d))

    def with_curvature(self, kappa: float) -> "SurrogateModel":
        """Same expansion with a different curvature (no longer a bound if smaller)."""
        return replace(
            self, kappa=kappa, q=self.grad - kappa * self.c0, constant=self.f0 - self.grad @ self.c0 + 0.5 * kappa * (self.c0 @ self.c0)
        )

    @property
    def minimizer(self) -> np.ndarray:
        """Unconstrained minimizer ``-q / kappa``."""
        return self.c0 - self.grad / self.kappa


@dataclass(frozen=True)
class HalfspaceSet:
    """Constraints ``g_p . (c_n - c_m) >= d_min`` for each pair p = (n, m)."""

    pairs: np.ndarray
    directions: np.ndarray
    d_min: float

    def inequalities(self, n_antennas: int) -> tuple[np.ndarray, np.ndarray]:
        """Rows of ``G c <= h``."""
        G = np.zeros((len(self.pairs), 2 * n_antennas))
        for p, ((n, m), g) in enumerate(zip(self.pairs, self.directions)):
            G[p, 2 * n : 2 * n + 2] = -g
            G[p, 2 * m : 2 * m + 2] = g
        return G, np.full(len(self.pairs), -self.d_min)


def surrogate_vectors(
    slot: SlotGeometry, w_m, alpha_m: float, beta_m: complex, positions0, station: StationConfig, S0=None
):
    """Linear coefficients of the bound built around `positions0`.

    Returns ``(Z, z)``: row ``Z[l]`` multiplies ``s_l(c)`` for every visible
    satellite (serving first) and `z` multiplies the serving steering
    vector with a minus sign. `S0` may pass in the steering matrix at
    `positions0`.
    """
    w = np.asarray(w_m, dtype=complex)
    if S0 is None:
        S0 = steering_vector(slot.wave_vectors, positions0)
    # (W - |w|^2 I) s0 with W = w w^H
    shifted = np.outer(S0 @ w.conj(), w) - np.vdot(w, w).real * S0
    Z = (2 * abs(beta_m) ** 2 * station.P_s * slot.gains)[:, None] * shifted
    z = 2 * np.conj(beta_m) * math.sqrt((1 + alpha_m) * slot.serving.d_bar * station.P_s) * w
    return Z, z


def linear_term_gradient(b, a_eff, positions0) -> np.ndarray:
    """Gradient of ``Re(b^H s(c))`` at `positions0`, flattened to length 2N.

    Entry (n, d) is ``-a[d] * |b_n| * sin(a . c_n - arg b_n)``. Stacked
    inputs `b` (L, N) and `a_eff` (L, 2) return the gradient of the sum.
    """
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    a = np.atleast_2d(np.asarray(a_eff, dtype=float))
    phase = a @ np.asarray(positions0, dtype=float).T
    coeff = -np.abs(b) * np.sin(phase - np.angle(b))
    return (coeff.T @ a).ravel()


def reduced_objective(positions, slots, weights, aux: AuxState, station: StationConfig) -> float:
    A, B = _terms_all(slots, positions, weights, station)
    servable = np.array([s.servable for s in slots], dtype=bool)
    return float(-quadratic_terms(aux, A, B)[servable].sum())


def build_surrogate(
    slots, weights, aux: AuxState, positions0, station: StationConfig, curvature: str = "antenna"
) -> SurrogateModel:
    """Quadratic upper bound of `reduced_objective` touching it at `positions0`.

    ``curvature="norm"`` bounds each linear term's Hessian by
    ``|a|^2 |b|`` and sums over terms. ``"antenna"`` (default) merges the
    two terms of the serving satellite and bounds the Hessian block of each
    antenna by ``sum |a|^2 |b_n|``, taking the largest block; it is never
    larger and usually several times smaller.
    """
    if curvature not in CURVATURES:
        raise ValueError(f"curvature must be one of {CURVATURES}, got {curvature!r}")
    positions0 = np.asarray(positions0, dtype=float)
    n_ant = len(positions0)
    c0 = positions0.ravel().copy()
    grad = np.zeros_like(c0)
    kappa = 0.0
    per_antenna = np.zeros(n_ant)
    f0 = 0.0
    for m, slot in enumerate(slots):
        if not slot.servable:
            continue
        w = np.asarray(weights[m], dtype=complex)
        S0 = steering_vector(slot.wave_vectors, positions0)
        y = S0.conj() @ w
        A = math.sqrt(station.P_s * slot.serving.d_bar) * y[0]
        B = station.P_s * (slot.gains @ np.abs(y) ** 2) + station.sigma2 * np.vdot(w, w).real
        b = aux.beta[m]
        f0 -= 2 * math.sqrt(1 + aux.alpha[m]) * (np.conj(b) * A).real - abs(b) ** 2 * B
        if b == 0:
            continue
        Z, z = surrogate_vectors(slot, w, aux.alpha[m], b, positions0, station, S0)
        a = slot.wave_vectors
        a2 = np.sum(a * a, axis=1)
        if curvature == "norm":
            grad += linear_term_gradient(Z, a, positions0)
            kappa += float(a2 @ np.linalg.norm(Z, axis=1))
            grad -= linear_term_gradient(z, a[0], positions0)
            kappa += a2[0] * np.linalg.norm(z)
        else:
            B = Z.copy()
            B[0] -= z
            grad += linear_term_gradient(B, a, positions0)
            per_antenna += a2 @ np.abs(B)
    if curvature == "antenna":
        kappa = float(per_antenna.max(initial=0.0))
    f0 = float(f0)
    return SurrogateModel(
        kappa=float(kappa),
        q=grad - kappa * c0,
        c0=c0,
        constant=float(f0 - grad @ c0 + 0.5 * kappa * (c0 @ c0)),
        grad=grad,
        f0=f0,
    )


def distance_halfspaces(positions0, d_min: float) -> HalfspaceSet:
    """Linearize ``|c_n - c_m| >= d_min`` around `positions0`.

    A coincident pair (only possible with ``d_min == 0``) gets the fixed
    direction (1, 0).
    """
    positions0 = np.asarray(positions0, dtype=float)
    n = len(positions0)
    pairs, dirs = [], []
    for i in range(n):
        for k in range(i + 1, n):
            diff = positions0[i] - positions0[k]
            dist = math.hypot(*diff)
            if dist == 0:
                warnings.warn(f"antennas {i} and {k} coincide; using direction (1, 0)", stacklevel=2)
                dirs.append(np.array([1.0, 0.0]))
            else:
                dirs.append(diff / dist)
            pairs.append((i, k))
    return HalfspaceSet(
        pairs=np.array(pairs, dtype=int).reshape(-1, 2), directions=np.array(dirs).reshape(-1, 2), d_min=float(d_min)
    )


def box_inequalities(n_antennas: int, side: float) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(2 * n_antennas)
    return np.vstack([-eye, eye]), np.concatenate([np.zeros(2 * n_antennas), np.full(2 * n_antennas, side)])


@dataclass
class ProjectionResult:
    x: np.ndarray
    active: list
    multipliers: np.ndarray
    iterations: int
    converged: bool


def project_onto_polytope(target, G, h, x0, max_iter: int | None = None, tol: float = 1e-13) -> ProjectionResult:
    """Minimize ``0.5*|x - target|^2`` subject to ``G x <= h``.

    Primal active-set iteration from the feasible point `x0`; the objective
    never increases, so the best iterate is the last one even when the
    iteration cap is hit.
    """
    target = np.asarray(target, dtype=float)
    x = np.array(x0, dtype=float)
    n = len(x)
    row_norms = np.linalg.norm(G, axis=1)
    scale = max(1.0, np.abs(h).max(initial=0.0), np.abs(target).max(initial=0.0))
    feas_tol = 1e-12 * scale
    if max_iter is None:
        max_iter = 10 * (len(h) + n) + 50

    active: list[int] = []
    for i in np.flatnonzero(h - G @ x <= feas_tol * row_norms):
        trial = G[active + [i]]
        if np.linalg.matrix_rank(trial) == len(active) + 1:
            active.append(int(i))

    lam = np.zeros(0)
    for it in range(max_iter):
        r = x - target
        if active:
            GA = G[active]
            mu, *_ = np.linalg.lstsq(GA.T, r, rcond=None)
            step = -(r - GA.T @ mu)
        else:
            mu = np.zeros(0)
            step = -r
        if np.linalg.norm(step) <= tol * scale:
            lam = -mu
            if len(lam) == 0 or lam.min() >= -tol * scale:
                return ProjectionResult(x, active, np.maximum(lam, 0.0), it, True)
            active.pop(int(np.argmin(lam)))
            continue
        Gs = G @ step
        slack = h - G @ x
        t, block = 1.0, None
        for i in np.flatnonzero(Gs > 1e-15 * row_norms * np.linalg.norm(step)):
            if i in active:
                continue
            ti = max(slack[i], 0.0) / Gs[i]
            if ti < t:
                t, block = ti, int(i)
        x = x + t * step
        if block is not None:
            active.append(block)
    warnings.warn("active-set projection hit its iteration cap; returning last feasible iterate", stacklevel=2)
    return ProjectionResult(x, active, np.maximum(lam, 0.0), max_iter, False)


def kkt_residual(x, target, G, h, active, multipliers) -> float:
    """Largest violation among stationarity, feasibility and complementarity."""
    x = np.asarray(x, dtype=float)
    lam = np.zeros(len(h))
    lam[list(active)] = multipliers
    stat = np.abs(x - target + G.T @ lam).max(initial=0.0)
    feas = max(0.0, (G @ x - h).max(initial=0.0))
    comp = np.abs(lam * (h - G @ x)).max(initial=0.0)
    return float(max(stat, feas, comp, -min(0.0, lam.min(initial=0.0))))


def solve_qp(model: SurrogateModel, region_side: float, halfspaces: HalfspaceSet) -> np.ndarray:
    """Minimize the surrogate over the box and half-spaces; returns (N, 2)."""
    n_ant = len(model.c0) // 2
    Gb, hb = box_inequalities(n_ant, region_side)
    Gd, hd = halfspaces.inequalities(n_ant)
    G = np.vstack([Gb, Gd])
    h = np.concatenate([hb, hd])
    res = project_onto_polytope(model.minimizer, G, h, x0=model.c0)
    # active box faces can come back off by round-off
    return np.clip(res.x, 0.0, region_side).reshape(n_ant, 2)


def sca_step(
    slots, weights, aux: AuxState, positions, station: StationConfig, curvature: str = "antenna"
) -> np.ndarray:
    """One majorize-minimize update of the layout."""
    positions = np.asarray(positions, dtype=float)
    model = build_surrogate(slots, weights, aux, positions, station, curvature)
    if model.kappa <= 0:
        warnings.warn("surrogate curvature is zero; placement step skipped", stacklevel=2)
        return positions.copy()
    new = solve_qp(model, station.region_side, distance_halfspaces(positions, station.d_min))
    # the bound guarantees descent; guard against round-off on flat steps
    if reduced_objective(new, slots, weights, aux, station) > model.f0:
        return positions.copy()
    return new


def refine_layout(
    slots,
    weights,
    aux: AuxState,
    positions,
    station: StationConfig,
    max_steps: int = 20,
    rtol: float = 1e-6,
    curvature: str = "antenna",
    scale: float | None = None,
) -> tuple[np.ndarray, int, float | None]:
    """Repeat majorize-minimize steps until the relative decrease drops below `rtol`.

    With ``scale=None`` every step is the certified one. With a number,
    each step first tries the curvature ``scale * kappa``
    and keeps the result only if the true objective goes down; otherwise the
    scale is raised (x4, capped at 1) and the step retried. At ``scale == 1``
    the step is the certified one, so every accepted step is a descent step
    and the layout stays feasible. After a success the scale halves.

    Returns the layout, the number of accepted steps, and the scale to carry
    into the next call.
    """
    positions = np.asarray(positions, dtype=float)
    f = reduced_objective(positions, slots, weights, aux, station)
    accepted = 0
    for _ in range(max_steps):
        model = build_surrogate(slots, weights, aux, positions, station, curvature)
        if model.kappa <= 0:
            warnings.warn("surrogate curvature is zero; placement step skipped", stacklevel=2)
            break
        halfspaces = distance_halfspaces(positions, station.d_min)
        while True:
            trial = model if scale is None or scale >= 1 else model.with_curvature(scale * model.kappa)
            new = solve_qp(trial, station.region_side, halfspaces)
            f_new = reduced_objective(new, slots, weights, aux, station)
            if f_new < f or scale is None or scale >= 1:
                break
            scale = min(1.0, 4 * scale)
        if not f_new < f:
            break
        accepted += 1
        done = f - f_new <= rtol * abs(f)
        positions, f = new, f_new
        if scale is not None:
            scale = max(0.5 * scale, MIN_SCALE)
        if done:
            break
    return positions, accepted, scale
