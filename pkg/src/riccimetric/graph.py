"""Weighted undirected graphs, shortest paths and the edge-list format."""

from __future__ import annotations

import heapq
import math
import threading
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra


class GraphError(ValueError):
    """Invalid graph data (bad edge list, self-loop, unknown node, ...)."""


def node_key(name: str):
    """Sort key for node identifiers: numeric names in numeric order first, then the rest."""
    if name.isdigit():
        return (0, int(name), name)
    return (1, 0, name)


def _check_weight(w: float, where: str) -> float:
    w = float(w)
    if not math.isfinite(w) or w <= 0.0:
        raise GraphError(f"{where}: edge weight must be positive and finite, got {w!r}")
    return w


class Graph:
    """Undirected simple graph with positive edge weights.

    Nodes are strings, kept in the order given by :func:`node_key`; every node
    also has a dense integer index in that order.  Edges are stored once as
    ``(i, j)`` index pairs with ``i < j``, sorted.  Instances are treated as
    immutable: operations that change weights or topology return new graphs.
    """

    __slots__ = ("_nodes", "_index", "_edges", "_weights", "_adj", "_edge_pos")

    def __init__(self, edges: Iterable[Sequence] = (), nodes: Iterable[str] = ()):
        names = {str(u) for u in nodes}
        triples = []
        for k, e in enumerate(edges):
            if len(e) == 2:
                u, v, w = e[0], e[1], 1.0
            elif len(e) == 3:
                u, v, w = e
            else:
                raise GraphError(f"edge {k}: expected (u, v) or (u, v, w), got {e!r}")
            u, v = str(u), str(v)
            if u == v:
                raise GraphError(f"edge {k}: self-loop on node {u!r}")
            triples.append((u, v, _check_weight(w, f"edge {u}-{v}")))
            names.add(u)
            names.add(v)

        order = tuple(sorted(names, key=node_key))
        index = {u: i for i, u in enumerate(order)}
        seen: dict[tuple[int, int], float] = {}
        for u, v, w in triples:
            i, j = index[u], index[v]
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise GraphError(f"duplicate undirected edge {{{u},{v}}}")
            seen[key] = w
        keys = sorted(seen)
        pairs = np.array(keys, dtype=np.int64).reshape(-1, 2)
        weights = np.array([seen[k] for k in keys], dtype=np.float64)
        self._init(order, index, pairs, weights)

    def _init(self, order, index, pairs, weights):
        self._nodes = order
        self._index = index
        self._edges = pairs
        self._edges.setflags(write=False)
        self._weights = weights
        self._weights.setflags(write=False)
        n = len(order)
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for i, j in pairs.tolist():
            nbrs[i].append(j)
            nbrs[j].append(i)
        self._adj = tuple(np.array(sorted(a), dtype=np.int64) for a in nbrs)
        self._edge_pos = {(i, j): k for k, (i, j) in enumerate(pairs.tolist())}

    @classmethod
    def _from_arrays(cls, order, pairs, weights, template: "Graph | None" = None) -> "Graph":
        # Trusted constructor: pairs already canonical (i < j, sorted, unique).
        g = cls.__new__(cls)
        if template is not None:
            g._nodes = template._nodes
            g._index = template._index
            g._edges = template._edges
            g._adj = template._adj
            g._edge_pos = template._edge_pos
            g._weights = np.array(weights, dtype=np.float64)
            g._weights.setflags(write=False)
            return g
        order = tuple(order)
        g._init(order, {u: i for i, u in enumerate(order)},
                np.asarray(pairs, dtype=np.int64).reshape(-1, 2),
                np.array(weights, dtype=np.float64))
        return g

    # -- basic accessors ---------------------------------------------------

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edge_index(self) -> np.ndarray:
        """``(m, 2)`` array of canonical edge index pairs."""
        return self._edges

    @property
    def weights(self) -> np.ndarray:
        """Read-only edge weights aligned with :attr:`edge_index`."""
        return self._weights

    def number_of_nodes(self) -> int:
        return len(self._nodes)

    def number_of_edges(self) -> int:
        return len(self._edges)

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, u) -> bool:
        return u in self._index

    def __repr__(self) -> str:
        return f"Graph(n={len(self._nodes)}, m={len(self._edges)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self._nodes == other._nodes
                and np.array_equal(self._edges, other._edges)
                and np.array_equal(self._weights, other._weights))

    def index(self, u: str) -> int:
        try:
            return self._index[u]
        except KeyError:
            raise GraphError(f"unknown node {u!r}") from None

    def edges(self) -> list[tuple[str, str, float]]:
        names = self._nodes
        return [(names[i], names[j], w)
                for (i, j), w in zip(self._edges.tolist(), self._weights.tolist())]

    def neighbor_indices(self, i: int) -> np.ndarray:
        return self._adj[i]

    def neighbors(self, u: str) -> tuple[str, ...]:
        return tuple(self._nodes[j] for j in self._adj[self.index(u)])

    def degree(self, u: str) -> int:
        return len(self._adj[self.index(u)])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=np.int64)

    def edge_position(self, u: str, v: str) -> int:
        i, j = self.index(u), self.index(v)
        key = (i, j) if i < j else (j, i)
        try:
            return self._edge_pos[key]
        except KeyError:
            raise GraphError(f"no edge {{{u},{v}}}") from None

    def has_edge(self, u: str, v: str) -> bool:
        if u not in self._index or v not in self._index:
            return False
        i, j = self._index[u], self._index[v]
        return ((i, j) if i < j else (j, i)) in self._edge_pos

    def weight(self, u: str, v: str) -> float:
        return float(self._weights[self.edge_position(u, v)])

    def total_weight(self) -> float:
        return float(self._weights.sum())

    def is_connected(self) -> bool:
        n = len(self._nodes)
        if n == 0:
            return True
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            i = stack.pop()
            for j in self._adj[i].tolist():
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        return bool(seen.all())

    # -- derived graphs ----------------------------------------------------

    def with_weights(self, weights) -> "Graph":
        """Same topology, new weights (aligned with :attr:`edge_index`)."""
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != self._weights.shape:
            raise GraphError(f"expected {len(self._weights)} weights, got {w.shape}")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise GraphError("edge weights must be positive and finite")
        return Graph._from_arrays(None, None, w, template=self)

    def unit_weights(self) -> "Graph":
        return self.with_weights(np.ones(len(self._weights)))

    def without(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()) -> "Graph":
        """Copy with the given nodes (and their incident edges) and edges deleted."""
        drop_nodes = {self.index(u) for u in nodes}
        drop_edges = {self.edge_position(u, v) for u, v in edges}
        keep_nodes = [i for i in range(len(self._nodes)) if i not in drop_nodes]
        remap = np.full(len(self._nodes), -1, dtype=np.int64)
        remap[keep_nodes] = np.arange(len(keep_nodes))
        keep = [k for k, (i, j) in enumerate(self._edges.tolist())
                if k not in drop_edges and i not in drop_nodes and j not in drop_nodes]
        pairs = remap[self._edges[keep]] if keep else np.empty((0, 2), dtype=np.int64)
        return Graph._from_arrays([self._nodes[i] for i in keep_nodes], pairs,
                                  self._weights[keep])

    def to_csr(self) -> csr_matrix:
        """Symmetric sparse weight matrix."""
        n = len(self._nodes)
        i, j = self._edges[:, 0], self._edges[:, 1]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        data = np.concatenate([self._weights, self._weights])
        return csr_matrix((data, (rows, cols)), shape=(n, n))


# -- edge-list format --------------------------------------------------------

def load_graph(text: str) -> Graph:
    """Parse an edge-list document.

    Each non-blank line that does not start with ``#`` holds ``u v [weight]``
    separated by spaces or tabs; a missing weight means 1.0.
    """
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 2 or 3 fields, got {len(fields)}")
        u, v = fields[0], fields[1]
        if u == v:
            raise GraphError(f"line {lineno}: self-loop on node {u!r}")
        w = 1.0
        if len(fields) == 3:
            try:
                w = float(fields[2])
            except ValueError:
                raise GraphError(f"line {lineno}: bad weight {fields[2]!r}") from None
            _check_weight(w, f"line {lineno}")
        edges.append((u, v, w))
    return Graph(edges)


def save_graph(g: Graph) -> str:
    """Canonical edge list: ``u<TAB>v<TAB>w`` per edge, node order, 17 significant digits."""
    return "".join(f"{u}\t{v}\t{w:.17g}\n" for u, v, w in g.edges())


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


# -- shortest paths ----------------------------------------------------------

def shortest_distances(g: Graph, source: str) -> dict[str, float]:
    """Single-source Dijkstra; unreachable nodes map to ``math.inf``."""
    s = g.index(source)
    n = g.number_of_nodes()
    dist = [math.inf] * n
    dist[s] = 0.0
    done = [False] * n
    adj = [a.tolist() for a in g._adj]
    pos = g._edge_pos
    w = g.weights.tolist()
    heap = [(0.0, s)]
    while heap:
        d, i = heapq.heappop(heap)
        if done[i]:
            continue
        done[i] = True
        for j in adj[i]:
            nd = d + w[pos[(i, j) if i < j else (j, i)]]
            if nd < dist[j]:
                dist[j] = nd
                heapq.heappush(heap, (nd, j))
    return dict(zip(g.nodes, dist))


class DistanceOracle:
    """Cached weighted shortest-path distances for one graph.

    Rows are filled lazily, one single-source sweep per requested source.
    Reads are safe from several threads.
    """

    def __init__(self, g: Graph):
        self.graph = g
        self._csr = g.to_csr()
        self._rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def rows(self, sources: Sequence[int]) -> np.ndarray:
        """Distance rows for the given source indices, shape ``(len(sources), n)``."""
        sources = [int(s) for s in sources]
        with self._lock:
            missing = sorted({s for s in sources if s not in self._rows})
            if missing:
                block = dijkstra(self._csr, directed=False, indices=missing)
                for s, row in zip(missing, np.atleast_2d(block)):
                    row.setflags(write=False)
                    self._rows[s] = row
            if not sources:
                return np.empty((0, self.graph.number_of_nodes()))
            return np.stack([self._rows[s] for s in sources])

    def row(self, source: int) -> np.ndarray:
        return self.rows([source])[0]

    def matrix(self) -> np.ndarray:
        """All-pairs distance matrix."""
        return self.rows(range(self.graph.number_of_nodes()))

    def distance(self, u: str, v: str) -> float:
        g = self.graph
        return float(self.row(g.index(u))[g.index(v)])

    def __call__(self, u: str, v: str) -> float:
        return self.distance(u, v)


def jaccard(g: Graph, u: str, v: str) -> float:
    """|N(u) & N(v)| / |N(u) | N(v)| with open neighbourhoods (u and v stay in the union)."""
    g.edge_position(u, v)
    nu, nv = set(g.neighbors(u)), set(g.neighbors(v))
    return len(nu & nv) / len(nu | nv)

