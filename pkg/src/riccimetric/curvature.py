"""Ollivier-Ricci edge curvature with optimal (OTD) or average (ATD) transport.

For an edge ``xy`` each endpoint spreads a probability measure over itself and
its neighbours (mass ``alpha`` on the node, ``(1 - alpha) / deg`` on each
neighbour).  The curvature is ``1 - T / d(x, y)`` where ``T`` is the cost of
moving one measure onto the other: the optimum for OTD, or the fixed plan
that spreads every neighbour's mass evenly over the other side's neighbours
for ATD.  Ground distances are weighted shortest paths.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from numba import njit

from .graph import DistanceOracle, Graph, GraphError
from .transport import TransportError, solve, transport_simplex

METHODS = ("OTD", "ATD")
DENOMINATORS = ("distance", "weight")


@dataclass(frozen=True)
class CurvatureParams:
    """``alpha`` is the mass kept on the node itself.

    ``denominator`` picks what ``T`` is divided by (and what ATD moves the
    node's own mass across): the shortest-path distance ``d(x, y)`` or the
    raw edge weight ``w(x, y)``.  They only differ once some edge is no
    longer a shortest path.
    """

    alpha: float = 0.5
    method: str = "ATD"
    denominator: str = "distance"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        method = self.method.upper()
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "method", method)
        if self.denominator not in DENOMINATORS:
            raise ValueError(f"denominator must be one of {DENOMINATORS}, got {self.denominator!r}")


@dataclass
class TransportPlan:
    moves: dict[tuple[str, str], float]
    cost: float


@dataclass
class CurvatureMap:
    """Per-edge curvature, aligned with ``graph.edge_index``."""

    graph: Graph
    params: CurvatureParams
    kappa: np.ndarray
    transport: np.ndarray = field(repr=False)
    length: np.ndarray = field(repr=False)

    @property
    def values(self) -> dict[tuple[str, str], float]:
        return {(u, v): k for (u, v, _), k in zip(self.graph.edges(), self.kappa.tolist())}

    def __getitem__(self, edge: tuple[str, str]) -> float:
        return float(self.kappa[self.graph.edge_position(*edge)])

    def to_csv(self) -> str:
        lines = ["u,v,kappa\n"]
        for (u, v, _), k in zip(self.graph.edges(), self.kappa.tolist()):
            lines.append(f"{u},{v},{k:.17g}\n")
        return "".join(lines)


def neighbor_measure(g: Graph, x: str, alpha: float = 0.5) -> dict[str, float]:
    """Mass ``alpha`` on ``x`` and ``(1 - alpha) / deg(x)`` on each neighbour; zero masses dropped."""
    nbrs = g.neighbors(x)
    if not nbrs:
        raise GraphError(f"node {x!r} is isolated")
    mu = {}
    if alpha > 0:
        mu[x] = float(alpha)
    if alpha < 1:
        share = (1.0 - alpha) / len(nbrs)
        for y in nbrs:
            mu[y] = share
    return mu


def transport_cost_optimal(mu: Mapping[str, float], nu: Mapping[str, float],
                           d: DistanceOracle) -> TransportPlan:
    """Minimum-cost plan moving ``mu`` onto ``nu`` under the oracle's distances."""
    g = d.graph
    src = list(mu)
    dst = list(nu)
    rows = d.rows([g.index(s) for s in src])
    C = rows[:, [g.index(t) for t in dst]]
    if not np.all(np.isfinite(C)):
        raise TransportError("supports are disconnected")
    X, cost = solve(np.array([mu[s] for s in src]), np.array([nu[t] for t in dst]), C)
    moves = {(src[i], dst[j]): float(X[i, j])
             for i, j in zip(*np.nonzero(X > 0))}
    return TransportPlan(moves, cost)


def transport_cost_average(g: Graph, x: str, y: str, alpha: float, d: DistanceOracle,
                           denominator: str = "distance") -> float:
    """Cost of the average plan: own mass across the edge, neighbour mass spread evenly."""
    g.edge_position(x, y)
    nx_ = [g.index(u) for u in g.neighbors(x)]
    ny_ = [g.index(u) for u in g.neighbors(y)]
    block = d.rows(nx_)[:, ny_]
    self_len = d.distance(x, y) if denominator == "distance" else g.weight(x, y)
    total = alpha * self_len + (1.0 - alpha) / (len(nx_) * len(ny_)) * block.sum()
    if not np.isfinite(total):
        raise TransportError(f"edge {{{x},{y}}}: neighbourhoods are disconnected")
    return float(total)


def edge_curvature(g: Graph, x: str, y: str, params: CurvatureParams = CurvatureParams(),
                   d: DistanceOracle | None = None) -> float:
    """Curvature of one edge, ``1 - T / d(x, y)``."""
    d = d or DistanceOracle(g)
    length = d.distance(x, y) if params.denominator == "distance" else g.weight(x, y)
    if not length > 0:
        raise GraphError(f"edge {{{x},{y}}} has zero length")
    if params.method == "OTD":
        t = transport_cost_optimal(neighbor_measure(g, x, params.alpha),
                                   neighbor_measure(g, y, params.alpha), d).cost
    else:
        t = transport_cost_average(g, x, y, params.alpha, d, params.denominator)
    return 1.0 - t / length


@njit(cache=True, nogil=True)
def _edge_transport(indptr, indices, D, edges, self_len, alpha, optimal):
    out = np.empty(len(edges))
    for e in range(len(edges)):
        x = edges[e, 0]
        y = edges[e, 1]
        nx_ = indices[indptr[x]:indptr[x + 1]]
        ny_ = indices[indptr[y]:indptr[y + 1]]
        dx = len(nx_)
        dy = len(ny_)
        if optimal:
            src = np.empty(dx + 1, dtype=np.int64)
            dst = np.empty(dy + 1, dtype=np.int64)
            src[0] = x
            src[1:] = nx_
            dst[0] = y
            dst[1:] = ny_
            a = np.full(dx + 1, (1.0 - alpha) / dx)
            b = np.full(dy + 1, (1.0 - alpha) / dy)
            a[0] = alpha
            b[0] = alpha
            C = np.empty((dx + 1, dy + 1))
            for i in range(dx + 1):
                for j in range(dy + 1):
                    C[i, j] = D[src[i], dst[j]]
            _, cost, status = transport_simplex(a, b, C)
            out[e] = cost if status == 0 else np.nan
        else:
            s = 0.0
            for i in range(dx):
                for j in range(dy):
                    s += D[nx_[i], ny_[j]]
            out[e] = alpha * self_len[e] + (1.0 - alpha) * s / (dx * dy)
    return out


def worker_count() -> int:
    """Worker threads for edge-parallel loops; ``RICCI_THREADS`` caps it (default 1)."""
    raw = os.environ.get("RICCI_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def edge_transport_costs(g: Graph, params: CurvatureParams, D: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Transport cost ``T`` and length (``d`` or ``w``) for every edge, from an all-pairs matrix."""
    edges = g.edge_index
    if len(edges) == 0:
        return np.empty(0), np.empty(0)
    deg = g.degrees()
    if np.any(deg == 0):
        raise GraphError(f"isolated node {g.nodes[int(np.argmin(deg))]!r}")
    dist = D[edges[:, 0], edges[:, 1]]
    if not np.all(np.isfinite(D)):
        raise GraphError("graph is disconnected")
    length = dist if params.denominator == "distance" else g.weights.copy()
    csr = g.to_csr()
    indptr = csr.indptr.astype(np.int64)
    indices = csr.indices.astype(np.int64)
    D = np.ascontiguousarray(D, dtype=np.float64)
    optimal = params.method == "OTD"

    workers = min(worker_count(), len(edges))
    if workers == 1:
        T = _edge_transport(indptr, indices, D, edges, length, params.alpha, optimal)
    else:
        chunks = np.array_split(np.arange(len(edges)), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(lambda c: _edge_transport(indptr, indices, D, edges[c], length[c],
                                                       params.alpha, optimal), chunks)
            T = np.concatenate(list(parts))
    if np.any(np.isnan(T)):
        raise TransportError("transportation simplex failed on some edge")
    return T, length


def curvature_map(g: Graph, params: CurvatureParams = CurvatureParams(),
                  oracle: DistanceOracle | None = None) -> CurvatureMap:
    """Curvature of every edge of a connected graph without isolated nodes."""
    oracle = oracle or DistanceOracle(g)
    T, length = edge_transport_costs(g, params, oracle.matrix())
    if np.any(length <= 0):
        raise GraphError("zero-length edge")
    return CurvatureMap(g, params, 1.0 - T / length, T, length)
