"""Max-min SINR beamforming under a total power budget.

The solver runs an outer bisection on the SINR target with an inner
feasibility check built on uplink-downlink duality: a monotone fixed point on
virtual uplink powers with MMSE receive filters decides whether the target is
reachable within the budget, and the downlink beamformers are recovered from
the dual solution by a power-rebalancing linear solve.  A normalized
fixed-point polish then drives the solution to the exact-power, equal-SINR
optimum.  All inner algebra lives in the K x K Gram domain, so the cost per
iteration is O(K^3) regardless of the antenna count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .precoding import Precoder, sinr_per_user

_FP_TOL = 1e-13
_FP_MAX_ITER = 10_000
_BISECT_MAX_ITER = 200
_BRACKET_DOUBLINGS = 60
# the bisection only needs to bracket the optimum: the balanced fixed-point
# polish supplies the precision, so a loose inner tolerance is enough there
_BISECT_STEPS = 12
_BISECT_FP_TOL = 1e-6
_BISECT_FP_ITER = 300
_BALANCE_MAX_ITER = 2_000


@dataclass(frozen=True)
class BeamformerSolution:
    precoder: Precoder
    t_star: float
    per_user_sinr: np.ndarray
    iterations: int
    converged: bool


class SolverError(RuntimeError):
    """Raised when the solver cannot certify a solution."""


def _unit_power_costs(gram: np.ndarray, q: np.ndarray, n0: float) -> np.ndarray:
    """1 / (h_k Phi_{-k}^{-1} h_k^H): uplink power needed per unit SINR target.

    Phi = N0 I + sum_j q_j h_j^H h_j, handled in the K x K Gram domain via
    the Woodbury identity; the self-term is removed with the standard MMSE
    rank-one correction.
    """
    k = gram.shape[0]
    root = np.sqrt(q)
    b = n0 * np.eye(k, dtype=complex) + (root[:, None] * gram * root[None, :])
    y = root[:, None] * gram  # D^{1/2} G
    z = np.linalg.solve(b, y)
    quad = (gram.diagonal().real
            - np.einsum("ij,ij->j", y.conj(), z).real) / n0  # h_k Phi^{-1} h_k^H
    with_self = quad / (1.0 - q * quad)  # exclude user k's own uplink power
    return 1.0 / with_self


def _mmse_directions(h: np.ndarray, gram: np.ndarray, q: np.ndarray,
                     n0: float) -> np.ndarray:
    """Unit-norm columns Phi^{-1} h_k^H computed without forming Phi."""
    k = gram.shape[0]
    root = np.sqrt(q)
    b = n0 * np.eye(k, dtype=complex) + (root[:, None] * gram * root[None, :])
    y = root[:, None] * gram
    z = np.linalg.solve(b, y)  # B^{-1} D^{1/2} G
    u = (h.conj().T - (h.conj().T * root[None, :]) @ z) / n0  # (M, K)
    norms = np.linalg.norm(u, axis=0)
    if np.any(norms == 0):
        raise SolverError("degenerate MMSE direction (zero channel row?)")
    return u / norms


def _downlink_powers(h: np.ndarray, directions: np.ndarray, t: float,
                     n0: float) -> np.ndarray:
    """Per-user downlink powers giving every user SINR exactly t."""
    gains = np.abs(h @ directions) ** 2  # [k, j] = |h_k u_j|^2
    k = gains.shape[0]
    mat = -gains
    np.fill_diagonal(mat, gains.diagonal() / t)
    p = np.linalg.solve(mat, np.full(k, n0))
    if np.any(p < 0):
        raise SolverError("negative downlink power: target infeasible")
    return p


def feasibility_check(h_known: np.ndarray, t: float, p_watts: float,
                      n0_watts: float, fp_tol: float = _FP_TOL,
                      max_iter: int = _FP_MAX_ITER):
    """Decide whether min-SINR target t fits in the power budget.

    Returns (feasible, candidate W or None, info dict).  The fixed point
    iterates q_k <- t / (h_k Phi_{-k}^{-1} h_k^H) from zero; the iterates
    increase monotonically toward the dual solution, so crossing the budget
    proves infeasibility early.
    """
    if t < 0:
        raise ValueError("target must be nonnegative")
    k, m = h_known.shape
    if t == 0.0:
        w = np.zeros((m, k), dtype=complex)
        return True, Precoder(w=w, csi_mode="optimal", power_used=0.0), {
            "iterations": 0, "uplink_power": 0.0}
    gram = h_known @ h_known.conj().T
    q = np.zeros(k)
    for it in range(1, max_iter + 1):
        q_new = t * _unit_power_costs(gram, q, n0_watts)
        total = float(q_new.sum())
        if total > p_watts:
            return False, None, {"iterations": it, "uplink_power": total}
        delta = float(np.max(np.abs(q_new - q) / np.maximum(q_new, 1e-300)))
        q = q_new
        if delta < fp_tol:
            break
    else:
        return False, None, {"iterations": max_iter, "uplink_power": float(q.sum()),
                             "diverged": True}
    directions = _mmse_directions(h_known, gram, q, n0_watts)
    p_dl = _downlink_powers(h_known, directions, t, n0_watts)
    w = directions * np.sqrt(p_dl)[None, :]
    precoder = Precoder(w=w, csi_mode="optimal",
                        power_used=float(np.sum(np.abs(w) ** 2)))
    return True, precoder, {"iterations": it, "uplink_power": float(q.sum()),
                            "downlink_power": float(p_dl.sum())}


def _balance_alternating(h: np.ndarray, gram: np.ndarray, p_watts: float,
                         n0: float,
                         iters: int = _BALANCE_MAX_ITER) -> tuple[np.ndarray, np.ndarray, bool]:
    """Balanced dual powers at the full budget via filter/eigenvalue rounds.

    Alternates MMSE receive filters for the current uplink powers with the
    exact balanced-power solve for fixed filters (a Perron eigenproblem of
    the extended gain matrix).  Returns (q, directions, converged); at the
    fixed point all dual SINRs coincide and sum(q) = P.
    """
    k = gram.shape[0]
    q = np.full(k, p_watts / k)
    t_prev = 0.0
    converged = False
    directions = _mmse_directions(h, gram, q, n0)
    for _ in range(iters):
        a = np.abs(h @ directions) ** 2  # a[j, idx] = |h_j u_idx|^2
        d_inv = a.diagonal().copy()
        if np.any(d_inv <= 0):
            raise SolverError("vanishing direct gain in balancing step")
        b_t = a.T.copy()  # b_t[idx, j] = gain of user j at filter idx
        np.fill_diagonal(b_t, 0.0)
        top = b_t / d_inv[:, None]
        col = n0 / d_inv
        ext = np.zeros((k + 1, k + 1))
        ext[:k, :k] = top
        ext[:k, k] = col
        ext[k, :k] = top.sum(axis=0) / p_watts
        ext[k, k] = col.sum() / p_watts
        w, v = np.linalg.eig(ext)
        idx = int(np.argmax(w.real))
        lam = float(w[idx].real)
        vec = v[:, idx].real
        vec = vec / vec[k]
        q = np.maximum(vec[:k], 0.0)
        t = 1.0 / lam
        directions = _mmse_directions(h, gram, q, n0)
        if t_prev > 0 and abs(t - t_prev) <= 1e-14 * t:
            converged = True
            break
        t_prev = t
    return q, directions, converged


def maxmin_beamforming(h_known: np.ndarray, p_watts: float, n0_watts: float,
                       tol: float = 1e-8) -> BeamformerSolution:
    """Maximize the minimum user SINR subject to total power <= P.

    Bisection over the target with the duality feasibility check, followed by
    a normalized fixed-point polish that lands exactly on the full-power
    equal-SINR optimum.
    """
    h_known = np.asarray(h_known, dtype=complex)
    k, m = h_known.shape
    if tol <= 0:
        raise ValueError("tol must be positive")
    if np.linalg.matrix_rank(h_known) < min(k, m) and k <= m:
        raise SolverError("rank-deficient channel: max-min target is degenerate")
    if k == 1:
        h = h_known[0]
        w = (math.sqrt(p_watts) * h.conj() / np.linalg.norm(h))[:, None]
        precoder = Precoder(w=w, csi_mode="optimal", power_used=p_watts)
        sinr = sinr_per_user(h_known, precoder, n0_watts)
        return BeamformerSolution(precoder, float(sinr[0]), sinr, 0, True)

    gram = h_known @ h_known.conj().T
    t_hi = p_watts * float(np.max(gram.diagonal().real)) / n0_watts
    feasible_hi, _, _ = feasibility_check(h_known, t_hi, p_watts, n0_watts,
                                          _BISECT_FP_TOL, _BISECT_FP_ITER)
    doublings = 0
    while feasible_hi and doublings < _BRACKET_DOUBLINGS:
        t_hi *= 2.0
        feasible_hi, _, _ = feasibility_check(h_known, t_hi, p_watts, n0_watts,
                                              _BISECT_FP_TOL, _BISECT_FP_ITER)
        doublings += 1
    if feasible_hi:
        raise SolverError("could not bracket the optimum from above")

    t_lo = 0.0
    iterations = 0
    for iterations in range(1, min(_BISECT_STEPS, _BISECT_MAX_ITER) + 1):
        t_mid = 0.5 * (t_lo + t_hi)
        ok, _, info = feasibility_check(h_known, t_mid, p_watts, n0_watts,
                                        _BISECT_FP_TOL, _BISECT_FP_ITER)
        if ok:
            t_lo = t_mid
        else:
            t_hi = t_mid
        if t_lo > 0 and (t_hi - t_lo) <= tol * t_lo:
            break

    # polish: balanced dual powers at exactly the full budget
    q_star, directions, balanced = _balance_alternating(h_known, gram,
                                                        p_watts, n0_watts)
    cost = _unit_power_costs(gram, q_star, n0_watts)
    t_star = float(np.min(q_star / cost))
    p_dl = _downlink_powers(h_known, directions, t_star, n0_watts)
    w = directions * np.sqrt(p_dl)[None, :]
    w *= math.sqrt(p_watts / float(np.sum(np.abs(w) ** 2)))  # exact budget
    precoder = Precoder(w=w, csi_mode="optimal",
                        power_used=float(np.sum(np.abs(w) ** 2)))
    sinr = sinr_per_user(h_known, precoder, n0_watts)
    t_star = float(sinr.min())
    spread = float((sinr.max() - sinr.min()) / max(t_star, 1e-300))
    converged = balanced and spread <= 1e-6 and t_lo <= t_star <= t_hi * (1 + 1e-9)
    return BeamformerSolution(precoder, t_star, sinr, iterations, converged)
