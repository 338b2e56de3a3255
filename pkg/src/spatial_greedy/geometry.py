"""Grid discretization, the prediction graph, greedy maximal cliques, centroids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from . import kernels
from .covariance import Box, CovarianceModel, as_points

MAX_GRID_POINTS = 50_000_000


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    rho: int
    box: Box

    def __post_init__(self):
        if int(self.rho) != self.rho or self.rho < 1:
            raise ValueError(f"rho must be a positive integer, got {self.rho!r}")

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def size(self) -> int:
        return int(self.rho) ** self.dim


def make_grid(spec: GridSpec) -> np.ndarray:
    """``rho**d`` points; each axis holds ``rho`` evenly spaced values, endpoints included.

    ``rho == 1`` yields the box center.
    """
    if spec.size > MAX_GRID_POINTS:
        raise GridTooLarge(
            f"grid of {spec.rho}^{spec.dim} = {spec.size} points exceeds the limit of {MAX_GRID_POINTS}"
        )
    rho = int(spec.rho)
    if rho == 1:
        return spec.box.center.reshape(1, -1)
    axes = [np.linspace(lo, hi, rho) for lo, hi in zip(spec.box.lo, spec.box.hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class PredictionGraph:
    """Vertices are prediction points; an edge joins points within ``sqrt(2) * L``."""

    vertices: np.ndarray
    adjacency: np.ndarray

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])


def build_graph(model: CovarianceModel, omega) -> PredictionGraph:
    omega = as_points(omega)
    if omega.shape[0] == 0:
        raise ValueError("prediction set must be non-empty")
    if omega.shape[0] == 1:
        adj = np.zeros((1, 1), dtype=bool)
    else:
        dist = squareform(pdist(omega))
        adj = dist <= model.edge_threshold
        np.fill_diagonal(adj, False)
    return PredictionGraph(vertices=omega, adjacency=adj)


def greedy_maximal_cliques(graph: PredictionGraph) -> list[tuple[int, ...]]:
    """One clique grown from each vertex, first occurrence kept when seeds agree.

    Growth scans the other vertices in ascending index order and admits a
    vertex iff it is adjacent to every current member, so each result is a
    maximal clique (not necessarily a maximum one).
    """
    seen = set()
    cliques = []
    for members in kernels.greedy_cliques(graph.adjacency):
        key = tuple(int(i) for i in members)
        if key not in seen:
            seen.add(key)
            cliques.append(key)
    return cliques


def dedupe_points(points, tol: float = 1e-9) -> np.ndarray:
    """Drop points within ``tol`` of an earlier point; order of survivors is kept."""
    pts = as_points(points)
    if pts.shape[0] < 2:
        return pts.copy()
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if pairs.size == 0:
        return pts.copy()
    # union-find so chains of near-duplicates collapse onto their lowest index
    parent = np.arange(pts.shape[0])

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    keep = np.array([find(i) == i for i in range(pts.shape[0])])
    return pts[keep]


def clique_centroids(omega, cliques, tol: float = 1e-9) -> np.ndarray:
    omega = as_points(omega)
    if not cliques:
        return np.zeros((0, omega.shape[1]))
    cents = np.array([omega[list(c)].mean(axis=0) for c in cliques])
    return dedupe_points(cents, tol)


def maximal_clique_centroids(model: CovarianceModel, omega) -> np.ndarray:
    omega = as_points(omega)
    return clique_centroids(omega, greedy_maximal_cliques(build_graph(model, omega)))
