"""Undirected communication graphs and their Laplacian spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraph, InvalidParams

CONNECTIVITY_TOL = 1e-10

PRESETS = ("star", "path", "ring", "complete")


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph on n_agents nodes, zero diagonal."""

    n_agents: int
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.shape != (self.n_agents, self.n_agents):
            raise InvalidParams(f"adjacency must be {self.n_agents}x{self.n_agents}")
        if np.any(np.diag(a) != 0.0):
            raise InvalidParams("adjacency diagonal must be zero")
        if not np.array_equal(a, a.T):
            raise InvalidParams("adjacency must be symmetric")
        if np.any(a < 0.0):
            raise InvalidParams("adjacency weights must be nonnegative")
        object.__setattr__(self, "adjacency", a)


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Laplacian, its eigenvalues sorted ascending, and an orthogonal diagonalizer.

    The first column of ``unitary`` is the constant vector 1/sqrt(N); the
    remaining columns are eigenvectors for the ascending eigenvalues.
    """

    laplacian: np.ndarray
    eigenvalues: np.ndarray
    unitary: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.laplacian.shape[0]

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def consensus_eigenvalues(self) -> np.ndarray:
        """Eigenvalues excluding the structural zero."""
        return self.eigenvalues[1:]


def laplacian_matrix(g: Graph) -> np.ndarray:
    a = g.adjacency
    return np.diag(a.sum(axis=1)) - a


def build_laplacian(g: Graph) -> LaplacianSpectrum:
    """Eigendecompose the graph Laplacian.

    Raises DisconnectedGraph when the second-smallest eigenvalue is not
    positive (tolerance 1e-10). Ties among repeated eigenvalues keep the
    solver's ordering; any orthogonal diagonalizer is acceptable.
    """
    lap = laplacian_matrix(g)
    evals, evecs = np.linalg.eigh(lap)
    if g.n_agents < 2 or evals[1] <= CONNECTIVITY_TOL:
        raise DisconnectedGraph(
            f"graph is not connected (lambda_2 = {evals[1] if g.n_agents > 1 else 0.0:.3e})"
        )
    # The zero eigenvector is unique for a connected graph; pin it to the
    # exact constant vector so downstream block splits are clean.
    ones = np.full(g.n_agents, 1.0 / np.sqrt(g.n_agents))
    if evecs[0, 0] < 0:
        evecs[:, 0] = -evecs[:, 0]
    evecs[:, 0] = ones
    evals = evals.copy()
    evals[0] = 0.0
    return LaplacianSpectrum(laplacian=lap, eigenvalues=evals, unitary=evecs)


def check_connected(g: Graph) -> bool:
    lap = laplacian_matrix(g)
    evals = np.linalg.eigvalsh(lap)
    return bool(g.n_agents >= 2 and evals[1] > CONNECTIVITY_TOL)


def preset_graph(name: str, n: int, weight: float = 1.0) -> Graph:
    """Named topologies: star (hub is node 0), path, ring, complete."""
    if n < 2:
        raise InvalidParams("preset graphs need at least 2 nodes")
    if weight <= 0:
        raise InvalidParams("edge weight must be positive")
    a = np.zeros((n, n))
    if name == "star":
        a[0, 1:] = weight
        a[1:, 0] = weight
    elif name == "path":
        for i in range(n - 1):
            a[i, i + 1] = a[i + 1, i] = weight
    elif name == "ring":
        for i in range(n):
            j = (i + 1) % n
            a[i, j] = a[j, i] = weight
    elif name == "complete":
        a[:] = weight
        np.fill_diagonal(a, 0.0)
    else:
        raise InvalidParams(f"unknown graph preset {name!r} (choose from {PRESETS})")
    return Graph(n_agents=n, adjacency=a)


def graph_from_edges(n: int, edges: list[tuple[int, int, float]]) -> Graph:
    """Build a graph from (i, j, weight) triples with 0-based node indices."""
    a = np.zeros((n, n))
    for i, j, w in edges:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise InvalidParams(f"bad edge ({i}, {j}) for {n} nodes")
        if w <= 0:
            raise InvalidParams(f"edge ({i}, {j}) has nonpositive weight {w}")
        a[i, j] = a[j, i] = float(w)
    return Graph(n_agents=n, adjacency=a)
