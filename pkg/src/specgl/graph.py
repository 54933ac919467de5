"""Graph representations and the linear algebra shared by every stage.

Vertices are 0-based in memory and 1-based in edge-list files.
Matrices are dense numpy arrays; the design point is N of a few hundred.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import FailedConvergence

SYM_TOL = 1e-10


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph without self-loops.

    ``edges`` is a sorted tuple of ``(i, j, w)`` with ``0 <= i < j < n`` and
    ``w > 0``. Use :meth:`from_edges` to build one from loose input.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.n}")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge ({i}, {j}) for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not w > 0:
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            seen.add((i, j))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple]) -> "Graph":
        """Normalize ``(i, j)`` or ``(i, j, w)`` tuples into a Graph.

        Endpoints are reordered so ``i < j``. Repeated pairs and self-loops
        are rejected rather than merged.
        """
        norm = []
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            norm.append((i, j, w))
        return cls(n, tuple(sorted(norm)))

    @classmethod
    def from_adjacency(cls, a: np.ndarray) -> "Graph":
        a = np.asarray(a, dtype=float)
        iu, ju = np.triu_indices(a.shape[0], 1)
        keep = a[iu, ju] > 0
        return cls(a.shape[0], tuple(
            (int(i), int(j), float(w))
            for i, j, w in zip(iu[keep], ju[keep], a[iu, ju][keep])))

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((i, j) for i, j, _ in self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def __len__(self):
        return len(self.edges)


def adjacency_of(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        a[i, j] = a[j, i] = w
    return a


def laplacian_of(a: np.ndarray) -> np.ndarray:
    """Combinatorial Laplacian ``D - A`` with ``D`` the row-sum degrees."""
    a = np.asarray(a, dtype=float)
    return np.diag(a.sum(axis=1)) - a


def fix_signs(v: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive.

    Ties go to the lowest row index.
    """
    v = np.array(v, dtype=float, copy=True)
    if v.size == 0:
        return v
    rows = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[rows, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def eig_sym(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a real symmetric matrix.

    Returns:
        (V, lam): orthonormal eigenvector columns and eigenvalues sorted
        ascending, with ``m @ V == V @ diag(lam)``. Column signs follow
        :func:`fix_signs`.

    Raises:
        ValueError: if ``m`` is not square or not symmetric within 1e-10.
        FailedConvergence: if LAPACK's solver does not converge.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if m.size and np.max(np.abs(m - m.T)) > SYM_TOL:
        raise ValueError("matrix is not symmetric")
    sym = 0.5 * (m + m.T)
    try:
        lam, v = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise FailedConvergence(str(exc)) from exc
    return fix_signs(v), lam


def _check_signal(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"basis must be square, got {v.shape}")
    if x.shape[0] != v.shape[0]:
        raise ValueError(
            f"signal length {x.shape[0]} does not match basis size {v.shape[0]}")
    return x


def gft(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Graph Fourier transform ``V.T @ x``; ``x`` may hold signals as columns."""
    v = np.asarray(v, dtype=float)
    return v.T @ _check_signal(v, x)


def igft(v: np.ndarray, y: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v @ _check_signal(v, y)


def total_variation(lap: np.ndarray, x: np.ndarray) -> float:
    """Quadratic form ``x.T @ L @ x``."""
    lap = np.asarray(lap, dtype=float)
    x = _check_signal(lap, x)
    if x.ndim != 1:
        raise ValueError("total_variation takes a single signal vector")
    return float(x @ lap @ x)


def orthonormality_error(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v.T @ v - np.eye(v.shape[1]))))


# --- file formats -----------------------------------------------------------

def _data_lines(path: Path) -> Iterator[tuple[int, str]]:
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def read_edge_list(path, n: int | None = None) -> Graph:
    """Read ``i,j[,w]`` lines with 1-based vertices.

    A ``# n=<count>`` header line fixes the vertex count; otherwise ``n``
    defaults to the largest index seen.
    """
    path = Path(path)
    edges = []
    with open(path) as fh:
        for raw in fh:
            s = raw.strip().replace(" ", "")
            if s.startswith("#n=") and n is None:
                n = int(s[3:])
    for lineno, line in _data_lines(path):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'i,j[,w]', got {line!r}")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        w = float(parts[2]) if len(parts) == 3 else 1.0
        if i < 0 or j < 0:
            raise ValueError(f"{path}:{lineno}: vertex indices are 1-based")
        edges.append((i, j, w))
    if n is None:
        n = max((max(i, j) for i, j, _ in edges), default=-1) + 1
    return Graph.from_edges(n, edges)


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        for i, j, w in g.edges:
            fh.write(f"{i + 1},{j + 1},{w!r}\n")


def read_matrix(path) -> np.ndarray:
    rows = [[float(tok) for tok in line.split(",")]
            for _, line in _data_lines(Path(path))]
    if not rows:
        raise ValueError(f"{path}: no matrix rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged matrix rows")
    return np.array(rows)


def write_matrix(path, m: np.ndarray) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
