"""Adjacency recovery from a (learned) eigenbasis.

Given an orthonormal ``V`` we look for eigenvalues ``lam`` such that
``A(lam) = V diag(lam) V.T`` is a valid adjacency matrix:

* zero diagonal,
* nonnegative off-diagonal entries,
* every row sum at least one.

Every entry of ``A(lam)`` is linear in ``lam`` (entry ``(i, j)`` has
coefficient ``V[i, q] * V[j, q]`` on ``lam[q]``), so this is a linear
feasibility problem. It is solved as the LP

    min t  s.t.  |A_ii| <= t,  A_ij >= -t (i < j),  A @ 1 >= 1,

whose optimum is ``t* = 0`` exactly when the constraints are feasible.
A positive ``t*`` is the infeasibility certificate, and the optimal
``lam`` is then the least-violating choice.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import simplex
from .errors import NumericalFailure, ValidityViolation
from .graph import Graph

DEFAULT_TOL = 1e-8
DEFAULT_TAU = 0.25
NEGATIVE_LIMIT = 1e-6


class Status(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class AdjacencyLP:
    """Linear coefficients of the adjacency constraints in terms of ``lam``.

    Attributes:
        basis: the N x N eigenbasis.
        pairs: row/column index arrays of the strict upper triangle.
        diag_coeffs: N x N, row i gives ``A(lam)_ii``.
        offdiag_coeffs: P x N with P = N(N-1)/2, row p gives ``A(lam)_ij``.
        rowsum_coeffs: N x N, row i gives ``(A(lam) @ 1)_i``.
    """

    basis: np.ndarray
    pairs: tuple[np.ndarray, np.ndarray]
    diag_coeffs: np.ndarray
    offdiag_coeffs: np.ndarray
    rowsum_coeffs: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def n_equalities(self) -> int:
        return self.diag_coeffs.shape[0]

    @property
    def n_inequalities(self) -> int:
        return self.offdiag_coeffs.shape[0] + self.rowsum_coeffs.shape[0]

    def violations(self, lam: np.ndarray) -> dict[str, float]:
        """Constraint violations of ``lam`` by direct substitution."""
        lam = np.asarray(lam, dtype=float)
        diag = self.diag_coeffs @ lam
        off = self.offdiag_coeffs @ lam
        rows = self.rowsum_coeffs @ lam
        return {
            "diagonal": float(np.max(np.abs(diag), initial=0.0)),
            "negativity": float(max(0.0, -np.min(off, initial=0.0))),
            "row_sum": float(max(0.0, np.max(1.0 - rows, initial=0.0))),
        }

    def max_violation(self, lam: np.ndarray) -> float:
        return max(self.violations(lam).values())


def build_adjacency_lp(basis: np.ndarray) -> AdjacencyLP:
    v = np.asarray(basis, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"basis must be square, got {v.shape}")
    iu, ju = np.triu_indices(v.shape[0], 1)
    return AdjacencyLP(
        basis=v,
        pairs=(iu, ju),
        diag_coeffs=v * v,
        offdiag_coeffs=v[iu] * v[ju],
        rowsum_coeffs=v * v.sum(axis=0),
    )


@dataclass
class FeasibilityResult:
    eigenvalues: np.ndarray
    status: Status
    min_max_violation: float  # LP optimum t*
    residual: float           # re-verified by substitution
    pivots: int
    sparse_objective: bool = False


def _minmax_rows(lp: AdjacencyLP):
    n, p = lp.n, lp.offdiag_coeffs.shape[0]
    ones_p, ones_n = np.ones((p, 1)), np.ones((n, 1))
    a_ub = np.vstack([
        np.hstack([-lp.offdiag_coeffs, -ones_p]),
        np.hstack([-lp.rowsum_coeffs, np.zeros((n, 1))]),
        np.hstack([lp.diag_coeffs, -ones_n]),
        np.hstack([-lp.diag_coeffs, -ones_n]),
    ])
    b_ub = np.concatenate([np.zeros(p), -np.ones(n), np.zeros(2 * n)])
    free = np.r_[np.ones(n, dtype=bool), False]
    return a_ub, b_ub, free


def solve_feasibility(lp: AdjacencyLP, tol: float = DEFAULT_TOL,
                      sparse_objective: bool = False,
                      sparse_slack: float = 0.1) -> FeasibilityResult:
    """Find eigenvalues making ``A(lam)`` a valid adjacency matrix.

    Args:
        lp: constraint coefficients from :func:`build_adjacency_lp`.
        tol: largest constraint violation accepted as feasible.
        sparse_objective: after the feasibility solve, minimize the total
            off-diagonal weight among points whose violation stays within
            ``tol / 2`` (feasible case) or ``(1 + sparse_slack) * t*``.

    Returns:
        A FeasibilityResult. Status is Feasible when the substituted
        violation is at most ``tol``; Infeasible when the LP optimum t*
        exceeds ``tol`` (eigenvalues then hold the least-violating point);
        NumericalFailure when the solver claims feasibility that
        substitution does not confirm, or runs out of pivots.
    """
    n = lp.n
    a_ub, b_ub, free = _minmax_rows(lp)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    try:
        res = simplex.linprog(c, a_ub, b_ub, free=free)
    except NumericalFailure:
        return FeasibilityResult(np.zeros(n), Status.NUMERICAL_FAILURE, np.inf, np.inf, -1)
    if not res.success:
        # lam = 1, t = 1 is always feasible and t >= 0 bounds the objective
        return FeasibilityResult(np.zeros(n), Status.NUMERICAL_FAILURE, np.inf, np.inf, res.pivots)
    lam, t_star = res.x[:n], max(float(res.x[n]), 0.0)
    pivots = res.pivots

    if sparse_objective:
        # Stay strictly inside the tolerance when the system is feasible.
        cap = 0.5 * tol if t_star <= tol else (1.0 + sparse_slack) * t_star
        c2 = np.r_[lp.offdiag_coeffs.sum(axis=0), 0.0]
        cap_row = np.r_[np.zeros(n), 1.0]
        try:
            res2 = simplex.linprog(c2, np.vstack([a_ub, cap_row]), np.r_[b_ub, cap], free=free)
            pivots += res2.pivots
            if res2.success and lp.max_violation(res2.x[:n]) <= max(tol, cap):
                lam = res2.x[:n]
        except NumericalFailure:
            pass

    residual = lp.max_violation(lam)
    if residual <= tol:
        status = Status.FEASIBLE
    elif t_star > tol:
        status = Status.INFEASIBLE
    else:
        status = Status.NUMERICAL_FAILURE
    return FeasibilityResult(lam, status, t_star, residual, pivots, sparse_objective)


def assemble_adjacency(basis: np.ndarray, lam: np.ndarray, zero_tol: float = DEFAULT_TOL,
                       strict: bool = True) -> np.ndarray:
    """Form ``V diag(lam) V.T`` and clean it into a valid adjacency matrix.

    The product is symmetrized, entries with magnitude below ``zero_tol``
    and the diagonal are set to zero, and remaining negatives are clamped.

    Raises:
        ValidityViolation: if ``strict`` and an off-diagonal entry is below
            -1e-6 before clamping.
    """
    v = np.asarray(basis, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (v.shape[1],):
        raise ValueError(f"need {v.shape[1]} eigenvalues, got shape {lam.shape}")
    a = (v * lam) @ v.T
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 0.0)
    if strict and a.size and a.min() < -NEGATIVE_LIMIT:
        raise ValidityViolation(f"entry {a.min():.3g} is below -{NEGATIVE_LIMIT:g}")
    a[np.abs(a) < zero_tol] = 0.0
    a[a < 0] = 0.0
    return a


def binarize(a: np.ndarray, tau: float = DEFAULT_TAU) -> Graph:
    """Unit-weight graph of entries strictly above ``tau`` times the largest entry."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    iu, ju = np.triu_indices(n, 1)
    vals = a[iu, ju]
    top = vals.max(initial=0.0)
    if top <= 0:
        return Graph(n)
    hit = vals > tau * top
    return Graph(n, tuple((int(i), int(j), 1.0) for i, j in zip(iu[hit], ju[hit])))


@dataclass
class RecoveredAdjacency:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    feasibility_residual: float
    status: Status
    min_max_violation: float
    pivots: int


def recover_adjacency(basis: np.ndarray, tol: float = DEFAULT_TOL,
                      sparse_objective: bool = False) -> RecoveredAdjacency:
    """Solve the feasibility LP and assemble the adjacency matrix.

    Infeasible solves, and NumericalFailure solves that reached an LP
    optimum, still yield the least-violating matrix with negatives clamped
    so downstream scoring can proceed.
    """
    lp = build_adjacency_lp(basis)
    sol = solve_feasibility(lp, tol=tol, sparse_objective=sparse_objective)
    strict = sol.status is Status.FEASIBLE
    a = assemble_adjacency(lp.basis, sol.eigenvalues, strict=strict)
    return RecoveredAdjacency(a, sol.eigenvalues, sol.residual, sol.status,
                              sol.min_max_violation, sol.pivots)
