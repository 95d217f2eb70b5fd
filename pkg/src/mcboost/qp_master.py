"""Restricted master problem: least-squares margin fit over the probability simplex.

Primal, over the columns generated so far (``A[i, t] = y_i h_t(x_i)``)::

    min  rho' rho - 2 E 1' rho    s.t.  rho = A w,  1' w = 1,  w >= 0

The dual variables come back from the KKT conditions: ``u = 2 (E 1 - rho)``
and ``r = max_t u' A[:, t]``.

Dual objective convention: :func:`dual_objective` returns the value of the
dual *maximization*, ``-r - |u - 2E 1|^2 / 4``, which equals the primal
minimum at optimality. Minimizing ``r + |u - 2E 1|^2 / 4`` (the form column
generation iterates on) gives the same optimum with the sign flipped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

TOL_KKT = 1e-9
TOL_GAP = 1e-8
TOL_FEAS = 1e-10
TOL_ACTIVE = 1e-8


class SolverError(RuntimeError):
    """The master solve stopped before reaching the KKT tolerance."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class RestrictedMaster:
    A: np.ndarray
    E: float

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64, copy=True)
        if A.ndim == 1:
            A = A[:, None]
        if A.ndim != 2 or A.shape[1] < 1 or A.shape[0] < 1:
            raise ValueError(f"A must be an M x T matrix with T >= 1, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("A must be finite")
        if not 0.0 < self.E < 1.0:
            raise ValueError(f"E must lie strictly inside (0, 1), got {self.E}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def n_columns(self) -> int:
        return self.A.shape[1]


@dataclass
class MasterSolution:
    w: np.ndarray
    rho: np.ndarray
    primal_objective: float
    u: np.ndarray
    r: float
    dual_objective: float
    kkt_residual: float = 0.0
    pivots: int = 0
    active: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def gap(self) -> float:
        return abs(self.primal_objective - self.dual_objective)


def primal_objective(rho, E: float) -> float:
    rho = np.asarray(rho, dtype=np.float64)
    return float(rho @ rho - 2.0 * E * rho.sum())


def dual_objective(u, r: float, E: float) -> float:
    u = np.asarray(u, dtype=np.float64)
    centered = u - 2.0 * E
    return float(-r - 0.25 * (centered @ centered))


def recover_dual(rho, master: RestrictedMaster) -> tuple[np.ndarray, float]:
    rho = np.asarray(rho, dtype=np.float64)
    u = 2.0 * (master.E - rho)
    r = float(np.max(u @ master.A))
    return u, r


def _affine_minimizer(Q: np.ndarray, c: np.ndarray) -> np.ndarray:
    """argmin z'Qz - 2c'z subject to sum(z) = 1 (minimum-norm if not unique)."""
    n = c.size
    K = np.empty((n + 1, n + 1))
    K[:n, :n] = Q
    K[:n, n] = 1.0
    K[n, :n] = 1.0
    K[n, n] = 0.0
    rhs = np.concatenate((c, [1.0]))
    try:
        sol = np.linalg.solve(K, rhs)
        if np.all(np.isfinite(sol)) and np.allclose(K @ sol, rhs, rtol=0, atol=1e-9 * (1 + np.abs(K).max())):
            return sol[:n]
    except np.linalg.LinAlgError:
        pass
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:n]


def _kkt_residual(Q, c, w, scale):
    g = Q @ w - c
    support = w > 0
    nu = w @ g
    complementarity = max(0.0, nu - g.min())
    stationarity = np.abs(g[support] - nu).max() if support.any() else 0.0
    return max(complementarity, stationarity) / scale


def solve_simplex_qp(Q, c, w0=None, tol=TOL_KKT, max_pivots=None):
    """Active-set minimization of ``w'Qw - 2c'w`` over the probability simplex.

    ``Q`` is symmetric positive semidefinite. Returns ``(w, kkt_residual, pivots)``.
    Raises :class:`SolverError` if the pivot budget runs out first.
    """
    Q = np.asarray(Q, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    T = c.size
    scale = max(1.0, np.abs(Q).max(), np.abs(c).max())
    if max_pivots is None:
        max_pivots = 50 * T + 100

    if w0 is None:
        # best vertex
        vertex_values = np.diag(Q) - 2.0 * c
        w = np.zeros(T)
        w[int(np.argmin(vertex_values))] = 1.0
    else:
        w = np.clip(np.asarray(w0, dtype=np.float64), 0.0, None)
        if w.shape != (T,) or w.sum() <= 0:
            raise ValueError("warm start must be a length-T nonnegative vector with positive sum")
        w = w / w.sum()

    support = w > 0
    blocked = np.zeros(T, dtype=bool)
    add_tol = 1e-12 * scale
    entering = -1
    pivots = 0
    while pivots < max_pivots:
        pivots += 1
        idx = np.flatnonzero(support)
        z = _affine_minimizer(Q[np.ix_(idx, idx)], c[idx])
        if np.all(z > 0):
            w[:] = 0.0
            w[idx] = z
            g = Q @ w - c
            nu = w @ g
            candidates = ~support & ~blocked
            if not candidates.any():
                break
            j = int(np.flatnonzero(candidates)[np.argmin(g[candidates])])
            if g[j] >= nu - add_tol:
                break
            support[j] = True
            entering = j
            continue
        # move toward z until the first support weight hits zero
        current = w[idx]
        shrinking = z <= 0
        ratios = current[shrinking] / (current[shrinking] - z[shrinking])
        alpha = float(ratios.min())
        w[idx] = current + alpha * (z - current)
        leaving = idx[shrinking][ratios <= alpha]
        w[leaving] = 0.0
        w[w < 0] = 0.0
        support = w > 0
        if alpha == 0.0 and entering in leaving:
            # degenerate pivot: the column's violation is rounding noise
            blocked[entering] = True
        if not support.any():
            raise SolverError("active set emptied; problem is numerically degenerate")
        w /= w.sum()
    else:
        res = _kkt_residual(Q, c, w, scale)
        if res > tol:
            raise SolverError(
                f"pivot limit {max_pivots} reached with KKT residual {res:.3e}",
                solution=(w.copy(), res, pivots),
            )

    res = _kkt_residual(Q, c, w, scale)
    if res > tol:
        raise SolverError(
            f"active-set solve ended with KKT residual {res:.3e} > {tol:.1e}",
            solution=(w.copy(), res, pivots),
        )
    return w, res, pivots


def _finish(master: RestrictedMaster, w, res, pivots) -> MasterSolution:
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    rho = master.A @ w
    u, r = recover_dual(rho, master)
    return MasterSolution(
        w=w,
        rho=rho,
        primal_objective=primal_objective(rho, master.E),
        u=u,
        r=r,
        dual_objective=dual_objective(u, r, master.E),
        kkt_residual=res,
        pivots=pivots,
        active=np.flatnonzero(w > TOL_ACTIVE),
    )


def solve_restricted(
    master: RestrictedMaster,
    warm_start: Optional[np.ndarray] = None,
    gram: Optional[np.ndarray] = None,
    tol_kkt: float = TOL_KKT,
) -> MasterSolution:
    """Solve the restricted master problem and recover its duals.

    ``gram`` may pass a precomputed ``A'A`` (the booster keeps it updated
    column by column).
    """
    A = master.A
    if warm_start is not None:
        warm_start = np.asarray(warm_start, dtype=np.float64)
        if warm_start.shape != (A.shape[1],):
            raise ValueError("warm start length does not match the number of columns")
        if np.any(warm_start < -TOL_FEAS) or abs(warm_start.sum() - 1.0) > 1e-8:
            raise ValueError("warm start must lie on the simplex")
    Q = A.T @ A if gram is None else np.asarray(gram, dtype=np.float64)
    c = master.E * A.sum(axis=0)
    try:
        w, res, pivots = solve_simplex_qp(Q, c, warm_start, tol=tol_kkt)
    except SolverError as exc:
        if exc.solution is not None:
            exc.solution = _finish(master, *exc.solution)
        raise
    return _finish(master, w, res, pivots)
