"""Orthonormal eigenbasis learning by alternating minimization.

The model is ``X ~= V Y`` with ``V`` orthogonal and every column of ``Y``
at most k-sparse. With ``V`` fixed the best ``Y`` is a column-wise
hard threshold of ``V.T X``; with ``Y`` fixed the best ``V`` is the
orthogonal Procrustes solution from the SVD of ``X Y.T``. Alternating the
two exact solves never increases ``||X - V Y||_F``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import FailedConvergence, ZeroSignal
from .rng import make_rng, mix_seed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnConfig:
    """Settings for :func:`learn_eigenbasis` and :func:`estimate_sparsity`.

    ``k=None`` means the sparsity is estimated from the data.
    """

    k: int | None = 5
    epsilon: float = 1e-6
    max_iters: int = 500
    restarts: int = 5
    seed: int = 0
    knee_fraction: float = 0.01

    def validate(self, n: int | None = None) -> None:
        if self.k is not None and (self.k < 1 or (n is not None and self.k > n)):
            raise ValueError(f"k must lie in 1..{n}, got {self.k}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.knee_fraction < 0:
            raise ValueError("knee_fraction must be nonnegative")


@dataclass
class LearnResult:
    basis: np.ndarray
    coefficients: np.ndarray
    objective_trace: list[float]
    iterations: int
    converged: bool
    k: int
    restart: int = 0
    restart_objectives: list[float] = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")


def topk_project(v: np.ndarray, k: int) -> np.ndarray:
    """Keep the ``k`` largest-magnitude entries of ``v`` and zero the rest.

    Equal magnitudes are resolved in favor of the lower index.
    """
    v = np.asarray(v, dtype=float)
    _check_k(k, v.shape[0])
    out = np.zeros_like(v)
    keep = np.argsort(-np.abs(v), kind="stable")[:k]
    out[keep] = v[keep]
    return out


def sparse_code(basis: np.ndarray, x_obs: np.ndarray, k: int) -> np.ndarray:
    """Best k-sparse coefficients for each column of ``x_obs`` in an orthonormal basis."""
    basis = np.asarray(basis, dtype=float)
    x_obs = np.asarray(x_obs, dtype=float)
    if x_obs.ndim == 1:
        x_obs = x_obs[:, None]
    if basis.shape[0] != x_obs.shape[0]:
        raise ValueError(f"basis is {basis.shape}, observations are {x_obs.shape}")
    _check_k(k, basis.shape[1])
    z = basis.T @ x_obs
    if k == z.shape[0]:
        return z
    # stable sort on -|z| keeps lower row index first among ties
    keep = np.argsort(-np.abs(z), axis=0, kind="stable")[:k]
    y = np.zeros_like(z)
    np.put_along_axis(y, keep, np.take_along_axis(z, keep, axis=0), axis=0)
    return y


def procrustes_update(x_obs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Orthogonal ``V`` minimizing ``||X - V Y||_F`` (equivalently maximizing tr(Y.T V.T X))."""
    x_obs = np.asarray(x_obs, dtype=float)
    y = np.asarray(y, dtype=float)
    if x_obs.shape != y.shape:
        raise ValueError(f"X is {x_obs.shape} but Y is {y.shape}")
    try:
        u1, _, u2t = np.linalg.svd(x_obs @ y.T)
    except np.linalg.LinAlgError as exc:
        raise FailedConvergence(f"SVD did not converge: {exc}") from exc
    return u1 @ u2t


def pseudo_error(x_obs: np.ndarray, basis: np.ndarray, y: np.ndarray) -> float:
    """Relative squared residual ``||X - V Y||_F^2 / ||X||_F^2``."""
    x_obs = np.asarray(x_obs, dtype=float)
    denom = np.sum(x_obs**2)
    if denom == 0:
        raise ZeroSignal("observation matrix is identically zero")
    return float(np.sum((x_obs - basis @ y) ** 2) / denom)


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR of a seeded Gaussian matrix."""
    q, r = np.linalg.qr(make_rng(seed).standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _check_observations(x_obs) -> np.ndarray:
    x_obs = np.asarray(x_obs, dtype=float)
    if x_obs.ndim != 2 or x_obs.shape[1] < 1:
        raise ValueError(f"observations must be an N x M matrix with M >= 1, got {x_obs.shape}")
    if not np.all(np.isfinite(x_obs)):
        raise ValueError("observations contain NaN or inf")
    return x_obs


def alternate(x_obs: np.ndarray, v0: np.ndarray, k: int, epsilon: float = 1e-6,
              max_iters: int = 500) -> LearnResult:
    """Run the alternating scheme from a given starting basis.

    One iteration is a sparse-coding step followed by a Procrustes step;
    the objective recorded afterwards is ``||X - V_new Y||_F``. The loop
    stops once consecutive objectives differ by at most ``epsilon``.
    """
    v = np.asarray(v0, dtype=float)
    trace: list[float] = []
    prev = np.inf
    converged = False
    y = None
    for _ in range(max_iters):
        y = sparse_code(v, x_obs, k)
        v = procrustes_update(x_obs, y)
        obj = float(np.linalg.norm(x_obs - v @ y))
        trace.append(obj)
        if abs(prev - obj) <= epsilon:
            converged = True
            break
        prev = obj
    return LearnResult(v, y, trace, len(trace), converged, k)


def learn_eigenbasis(x_obs: np.ndarray, cfg: LearnConfig,
                     init: np.ndarray | None = None) -> LearnResult:
    """Fit an orthonormal basis and k-sparse coefficients to ``x_obs``.

    ``cfg.restarts`` independent random orthogonal starts are run (restart
    ``r`` seeded with ``mix_seed(cfg.seed, r)``); the run with the lowest
    final objective wins, ties going to the lower restart index. An explicit
    ``init`` basis is tried in addition to the random starts.
    """
    x_obs = _check_observations(x_obs)
    n = x_obs.shape[0]
    if cfg.k is None:
        raise ValueError("learn_eigenbasis needs a fixed k; use estimate_sparsity for k=auto")
    cfg.validate(n)
    starts = [random_orthogonal(n, mix_seed(cfg.seed, r)) for r in range(cfg.restarts)]
    if init is not None:
        starts.append(np.asarray(init, dtype=float))
    best = None
    objectives = []
    for r, v0 in enumerate(starts):
        res = alternate(x_obs, v0, cfg.k, cfg.epsilon, cfg.max_iters)
        res.restart = r
        objectives.append(res.objective)
        if best is None or res.objective < best.objective:
            best = res
    best.restart_objectives = objectives
    log.debug("k=%d best restart %d objective %.6g after %d iterations",
              cfg.k, best.restart, best.objective, best.iterations)
    return best


@dataclass
class SparsityEstimate:
    k: int
    errors: list[float]
    no_knee: bool
    results: dict[int, LearnResult]

    @property
    def result(self) -> LearnResult:
        return self.results[self.k]


def pick_knee(errors: list[float], knee_fraction: float = 0.01) -> tuple[int, bool]:
    """First k whose next step improves the pseudo error by less than the knee.

    ``errors[i]`` is the error at sparsity ``i + 1``. The knee is
    ``knee_fraction * errors[0]``. Returns ``(k, no_knee)``; without a knee
    the largest k is returned and ``no_knee`` is True.
    """
    delta = knee_fraction * errors[0]
    for i in range(len(errors) - 1):
        if errors[i + 1] - errors[i] > -delta:
            return i + 1, False
    return len(errors), True


def estimate_sparsity(x_obs: np.ndarray, cfg: LearnConfig,
                      k_values: range | None = None) -> SparsityEstimate:
    """Choose k from the pseudo-error curve of fully learned bases.

    Every k is learned from ``cfg.restarts`` random starts plus a warm start
    at the best basis found for k - 1, so the recorded curve is
    non-increasing in k.
    """
    x_obs = _check_observations(x_obs)
    n = x_obs.shape[0]
    cfg.validate(n)
    ks = list(k_values) if k_values is not None else list(range(1, n + 1))
    results: dict[int, LearnResult] = {}
    errors: list[float] = []
    prev_basis = None
    for k in ks:
        sub = LearnConfig(k=k, epsilon=cfg.epsilon, max_iters=cfg.max_iters,
                          restarts=cfg.restarts, seed=mix_seed(cfg.seed, k))
        res = learn_eigenbasis(x_obs, sub, init=prev_basis)
        results[k] = res
        errors.append(pseudo_error(x_obs, res.basis, res.coefficients))
        prev_basis = res.basis
    idx, no_knee = pick_knee(errors, cfg.knee_fraction)
    return SparsityEstimate(ks[idx - 1], errors, no_knee, results)
