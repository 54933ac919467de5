"""Dense two-phase primal simplex.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``,
with each variable either nonnegative or free. Free variables are split
into positive and negative parts. Phase 1 minimizes the sum of artificial
variables; phase 2 optimizes the real objective from the feasible basis.

Entering columns follow Dantzig's rule (most negative reduced cost). After
a run of degenerate pivots the solver switches to Bland's rule, which
cannot cycle, and switches back once the objective moves again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DEGENERATE_STREAK = 50
REINVERT_EVERY = 100
PIVOT_TOL = 1e-9


@dataclass
class LPResult:
    x: np.ndarray | None
    objective: float
    status: str
    pivots: int
    phase1_objective: float

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, a: np.ndarray, b: np.ndarray, basis: np.ndarray, n_core: int,
                 tol: float, max_pivots: int):
        # Rows are kept in canonical form w.r.t. `basis`: a[:, basis] == I.
        # The starting matrix is kept for periodic reinversion.
        self.a0, self.b0 = a.copy(), b.copy()
        self.a = a
        self.b = b
        self.basis = basis
        self.n_core = n_core
        self.tol = tol
        self.max_pivots = max_pivots
        self.pivots = 0
        self.pin_artificials = False

    def reinvert(self) -> None:
        """Rebuild the tableau from the starting matrix and the current basis."""
        try:
            lu = np.linalg.solve(self.a0[:, self.basis], np.column_stack([self.a0, self.b0]))
        except np.linalg.LinAlgError:
            return
        self.a, self.b = lu[:, :-1], lu[:, -1]

    def pivot(self, row: int, col: int) -> None:
        a, b = self.a, self.b
        piv = a[row, col]
        a[row] /= piv
        b[row] /= piv
        factor = a[:, col].copy()
        factor[row] = 0.0
        a -= np.outer(factor, a[row])
        b -= factor * b[row]
        a[:, col] = 0.0
        a[row, col] = 1.0
        self.basis[row] = col
        self.pivots += 1
        if self.pivots % REINVERT_EVERY == 0:
            self.reinvert()

    def _leaving_row(self, column: np.ndarray, bland: bool) -> int | None:
        # Zero-level artificials left in the basis must stay at zero, so
        # any nonzero entry in their row blocks the step.
        if self.pin_artificials:
            stuck = np.flatnonzero((self.basis >= self.n_core) & (np.abs(column) > PIVOT_TOL))
        else:
            stuck = np.zeros(0, dtype=int)
        if stuck.size:
            return int(stuck[np.argmax(np.abs(column[stuck]))])
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return None
        b = np.maximum(self.b[rows], 0.0)
        col = column[rows]
        # Harris two-pass test: relax the bound by tol, then take the
        # largest pivot among rows within the relaxed step.
        theta = np.min((b + self.tol) / col)
        cand = rows[b / col <= theta]
        if bland:
            return int(cand[np.argmin(self.basis[cand])])
        return int(cand[np.argmax(column[cand])])

    def optimize(self, cost: np.ndarray, allowed: np.ndarray) -> str:
        """Pivot to optimality for ``cost`` using only ``allowed`` entering columns."""
        tol = self.tol
        bland = False
        streak = 0
        last_obj = np.inf
        while True:
            if self.pivots >= self.max_pivots:
                raise NumericalFailure(f"pivot budget of {self.max_pivots} exhausted")
            reduced = cost - cost[self.basis] @ self.a
            candidates = np.flatnonzero(allowed & (reduced < -tol))
            if candidates.size == 0:
                return OPTIMAL
            if bland:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmin(reduced[candidates])])
            row = self._leaving_row(self.a[:, col], bland)
            if row is None:
                return UNBOUNDED
            self.pivot(row, col)
            obj = float(cost[self.basis] @ self.b)
            if obj < last_obj - tol:
                streak = 0
                bland = False
            else:
                streak += 1
                if streak >= DEGENERATE_STREAK:
                    bland = True
            last_obj = min(obj, last_obj)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=None,
            tol: float = 1e-9, max_pivots: int | None = None) -> LPResult:
    """Minimize ``c @ x`` under linear constraints.

    Args:
        c: objective coefficients, length n.
        A_ub, b_ub: inequality rows ``A_ub @ x <= b_ub``.
        A_eq, b_eq: equality rows.
        free: boolean mask of unrestricted variables; others are ``>= 0``.
        tol: pivoting and feasibility tolerance.
        max_pivots: pivot budget across both phases.

    Returns:
        LPResult with status ``optimal``, ``infeasible`` or ``unbounded``.
        For ``infeasible`` the phase-1 optimum (sum of artificials) is the
        certificate that no feasible point exists.

    Raises:
        NumericalFailure: if the pivot budget runs out.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    free = np.zeros(n, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    if A_ub.shape != (b_ub.size, n) or A_eq.shape != (b_eq.size, n) or free.size != n:
        raise ValueError("inconsistent LP dimensions")

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    free_idx = np.flatnonzero(free)
    n_split = n + free_idx.size

    # columns: [x (n) | -x_free | slacks (m_ub) | artificials (m)]
    rows = np.vstack([A_ub, A_eq]) if m else np.zeros((0, n))
    core = np.hstack([rows, -rows[:, free_idx], np.zeros((m, m_ub))])
    core[np.arange(m_ub), n_split + np.arange(m_ub)] = 1.0
    rhs = np.concatenate([b_ub, b_eq])
    flip = rhs < 0
    core[flip] *= -1.0
    rhs = np.where(flip, -rhs, rhs)

    n_core = n_split + m_ub
    # Rows whose slack is already a unit column start basic on it.
    use_slack = np.zeros(m, dtype=bool)
    use_slack[:m_ub] = ~flip[:m_ub]
    art_rows = np.flatnonzero(~use_slack)
    a = np.hstack([core, np.zeros((m, art_rows.size))])
    a[art_rows, n_core + np.arange(art_rows.size)] = 1.0
    basis = np.empty(m, dtype=int)
    basis[use_slack] = n_split + np.flatnonzero(use_slack)
    basis[art_rows] = n_core + np.arange(art_rows.size)

    total_cols = a.shape[1]
    if max_pivots is None:
        max_pivots = 50 * (m + total_cols) + 1000
    tab = _Tableau(a, rhs.copy(), basis, n_core, tol, max_pivots)

    phase1 = 0.0
    if art_rows.size:
        cost1 = np.zeros(total_cols)
        cost1[n_core:] = 1.0
        tab.optimize(cost1, np.ones(total_cols, dtype=bool))
        tab.reinvert()
        phase1 = float(cost1[tab.basis] @ np.maximum(tab.b, 0.0))
        feas_tol = tol * max(1.0, float(np.abs(rhs).max(initial=0.0)))
        if phase1 > feas_tol * max(1, m):
            return LPResult(None, np.inf, INFEASIBLE, tab.pivots, phase1)
        _drive_out_artificials(tab)
        tab.pin_artificials = True

    allowed = np.zeros(total_cols, dtype=bool)
    allowed[:n_core] = True
    cost2 = np.zeros(total_cols)
    cost2[:n] = c
    cost2[n:n_split] = -c[free_idx]
    status = tab.optimize(cost2, allowed)
    if status == UNBOUNDED:
        return LPResult(None, -np.inf, UNBOUNDED, tab.pivots, phase1)
    tab.reinvert()

    x_std = np.zeros(total_cols)
    x_std[tab.basis] = np.maximum(tab.b, 0.0)
    x = x_std[:n].copy()
    x[free_idx] -= x_std[n:n_split]
    return LPResult(x, float(c @ x), OPTIMAL, tab.pivots, phase1)


def _drive_out_artificials(tab: _Tableau) -> None:
    """Pivot zero-level artificials out of the basis where a real column allows it.

    Artificials in redundant rows stay basic at zero; the ratio test keeps
    them there during phase 2.
    """
    for row in range(tab.a.shape[0]):
        if tab.basis[row] < tab.n_core:
            continue
        entries = np.abs(tab.a[row, :tab.n_core])
        col = int(np.argmax(entries))
        if entries[col] > PIVOT_TOL * 1e3:
            tab.pivot(row, col)
