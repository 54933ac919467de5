"""Ground-truth graph generators and spectrally sparse signal synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraph
from .graph import Graph, adjacency_of, eig_sym
from .rng import make_rng, mix_seed

RETRY_BUDGET = 100


def _regenerate(build, seed: int, what: str) -> Graph:
    # Attempt r uses sub-seed mix_seed(seed, r); the first graph with no
    # isolated vertex wins.
    for attempt in range(RETRY_BUDGET):
        g = build(make_rng(mix_seed(seed, attempt)))
        if g.degrees().min() > 0:
            return g
    raise DegenerateGraph(
        f"{what}: isolated vertex in all {RETRY_BUDGET} regenerations (seed={seed})")


def rbf_keep_distance(sigma: float = 0.5, keep_threshold: float = 0.75) -> float:
    """Largest distance whose Gaussian kernel weight still exceeds the threshold."""
    return float(np.sqrt(-2.0 * sigma**2 * np.log(keep_threshold)))


def rbf_weights(points: np.ndarray, sigma: float, keep_threshold: float) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.sum(diff**2, axis=-1)
    w = np.exp(-d2 / (2.0 * sigma**2))
    w[w <= keep_threshold] = 0.0
    np.fill_diagonal(w, 0.0)
    return w


def gen_rbf_graph(n: int, sigma: float = 0.5, keep_threshold: float = 0.75,
                  seed: int = 0) -> Graph:
    """Random geometric graph on the unit square with Gaussian-kernel weights.

    Points are uniform in [0, 1]^2; pair weight is exp(-d^2 / (2 sigma^2)),
    kept only when strictly above ``keep_threshold``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 0 <= keep_threshold < 1:
        raise ValueError("keep_threshold must lie in [0, 1)")

    def build(rng):
        return Graph.from_adjacency(
            rbf_weights(rng.random((n, 2)), sigma, keep_threshold))

    return _regenerate(build, seed, "RBF")


def gen_er_graph(n: int, p: float = 0.2, seed: int = 0) -> Graph:
    """Erdos-Renyi graph with unit weights."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    iu, ju = np.triu_indices(n, 1)

    def build(rng):
        hit = rng.random(iu.size) < p
        return Graph(n, tuple((int(i), int(j), 1.0) for i, j in zip(iu[hit], ju[hit])))

    return _regenerate(build, seed, "ER")


def gen_ba_graph(n: int, seed: int = 0, edges_per_vertex: int = 1) -> Graph:
    """Preferential-attachment graph grown from the single edge (0, 1).

    Each arriving vertex picks ``edges_per_vertex`` distinct targets, each
    drawn with probability proportional to current degree (normalized by
    the degree sum). With one edge per arrival the result is a tree.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if edges_per_vertex < 1:
        raise ValueError("edges_per_vertex must be >= 1")
    rng = make_rng(seed)
    deg = np.zeros(n)
    deg[0] = deg[1] = 1.0
    edges = [(0, 1, 1.0)]
    for v in range(2, n):
        m = min(edges_per_vertex, v)
        targets = rng.choice(v, size=m, replace=False, p=deg[:v] / deg[:v].sum())
        for u in sorted(int(t) for t in targets):
            edges.append((u, v, 1.0))
            deg[u] += 1
        deg[v] = m
    return Graph.from_edges(n, edges)


GRAPH_MODELS = ("RBF", "ER", "BA")


def gen_graph(model: str, n: int, seed: int, **params) -> Graph:
    model = model.upper()
    if model == "RBF":
        return gen_rbf_graph(n, seed=seed, **params)
    if model == "ER":
        return gen_er_graph(n, seed=seed, **params)
    if model == "BA":
        return gen_ba_graph(n, seed=seed, **params)
    raise ValueError(f"unknown graph model {model!r}; choose from {GRAPH_MODELS}")


@dataclass(frozen=True)
class SignalGenConfig:
    """Parameters of the sparse-spectrum signal model.

    ``noise_level`` is the variance of each Gaussian noise entry. When
    ``exact_sparsity`` is set every column uses exactly that many
    coefficients instead of a uniform draw from 1..k_max.
    """

    m: int = 300
    k_max: int = 5
    coeff_lo: float = 1.0
    coeff_hi: float = 2.0
    noise_level: float = 0.0
    seed: int = 0
    exact_sparsity: int | None = None

    def validate(self, n: int) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 1 <= self.k_max <= n:
            raise ValueError(f"k_max must lie in 1..{n}")
        if self.exact_sparsity is not None and not 1 <= self.exact_sparsity <= n:
            raise ValueError(f"exact_sparsity must lie in 1..{n}")
        if not 0 < self.coeff_lo <= self.coeff_hi:
            raise ValueError("need 0 < coeff_lo <= coeff_hi")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")


@dataclass
class GroundTruth:
    graph: Graph | None
    basis: np.ndarray
    spectrum: np.ndarray | None
    coefficients: np.ndarray
    clean_signals: np.ndarray
    noisy_signals: np.ndarray


def sparse_coefficients(n: int, cfg: SignalGenConfig, rng: np.random.Generator) -> np.ndarray:
    y = np.zeros((n, cfg.m))
    for col in range(cfg.m):
        k = cfg.exact_sparsity or int(rng.integers(1, cfg.k_max + 1))
        support = rng.choice(n, size=k, replace=False)
        y[support, col] = rng.uniform(cfg.coeff_lo, cfg.coeff_hi, size=k)
    return y


def gen_signals(basis: np.ndarray, cfg: SignalGenConfig, *, graph: Graph | None = None,
                spectrum: np.ndarray | None = None) -> GroundTruth:
    """Draw ``X = V Y + noise`` with column-sparse positive coefficients Y."""
    basis = np.asarray(basis, dtype=float)
    n = basis.shape[0]
    cfg.validate(n)
    rng = make_rng(cfg.seed)
    y = sparse_coefficients(n, cfg, rng)
    clean = basis @ y
    if cfg.noise_level > 0:
        noisy = clean + rng.normal(0.0, np.sqrt(cfg.noise_level), size=clean.shape)
    else:
        noisy = clean.copy()
    return GroundTruth(graph, basis, spectrum, y, clean, noisy)


def ground_truth(g: Graph, cfg: SignalGenConfig) -> GroundTruth:
    """Eigendecompose the graph's adjacency and synthesize signals on it."""
    v, lam = eig_sym(adjacency_of(g))
    return gen_signals(v, cfg, graph=g, spectrum=lam)
