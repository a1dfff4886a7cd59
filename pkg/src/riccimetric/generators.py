"""Random graph models, node/edge perturbation and the karate-club dataset.

All randomness comes from ``numpy.random.Generator(PCG64(seed))`` so a seed
fully determines the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, GraphError


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _from_pairs(n: int, pairs) -> Graph:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    pairs = np.sort(pairs, axis=1)
    pairs = np.unique(pairs, axis=0)
    return Graph._from_arrays([str(i) for i in range(n)], pairs, np.ones(len(pairs)))


def gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p): each of the n(n-1)/2 pairs is an edge with probability p."""
    if n < 1:
        raise GraphError("gnp: n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"gnp: p must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    i, j = np.triu_indices(n, k=1)
    keep = rng.random(len(i)) < p
    return _from_pairs(n, np.column_stack([i[keep], j[keep]]))


def kleinberg(n: int, q: int, r: float, seed: int) -> Graph:
    """Kleinberg small world on an n x n grid (no wrap-around).

    Grid neighbours at Manhattan distance 1 are joined; every node then draws
    ``q`` long-range endpoints with probability proportional to ``d(u, v)^-r``
    (with replacement, duplicates collapsed).  Node ``(i, j)`` is named
    ``str(i * n + j)``.
    """
    if n < 2:
        raise GraphError("kleinberg: n must be >= 2")
    if q < 0:
        raise GraphError("kleinberg: q must be >= 0")
    rng = make_rng(seed)
    size = n * n
    ii, jj = np.divmod(np.arange(size), n)
    pairs = []
    for a in range(size):
        if jj[a] + 1 < n:
            pairs.append((a, a + 1))
        if ii[a] + 1 < n:
            pairs.append((a, a + n))
    for a in range(size):
        dist = np.abs(ii - ii[a]) + np.abs(jj - jj[a])
        prob = np.zeros(size)
        mask = dist > 0
        prob[mask] = dist[mask].astype(float) ** (-r)
        prob /= prob.sum()
        for b in rng.choice(size, size=q, replace=True, p=prob):
            pairs.append((a, int(b)))
    return _from_pairs(size, pairs)


def pref_attach(n: int, k: int, seed: int) -> Graph:
    """Barabasi-Albert preferential attachment.

    Starts from ``k`` isolated nodes; each newcomer joins ``k`` distinct
    existing nodes picked with probability proportional to degree (the
    first newcomer joins all seed nodes).
    """
    if k < 1 or n <= k:
        raise GraphError(f"pref_attach: need 1 <= k < n, got n={n}, k={k}")
    rng = make_rng(seed)
    pairs = []
    targets = list(range(k))
    repeated: list[int] = []
    for new in range(k, n):
        for t in targets:
            pairs.append((new, t))
        repeated.extend(targets)
        repeated.extend([new] * k)
        chosen: set[int] = set()
        while len(chosen) < k:
            chosen.add(repeated[int(rng.integers(len(repeated)))])
        targets = sorted(chosen)
    return _from_pairs(n, pairs)


def random_regular(n: int, d: int, seed: int, max_restarts: int = 1000) -> Graph:
    """Uniform-ish simple d-regular graph from the pairing model.

    Stubs are paired at random; a pair that would form a loop or a repeated
    edge is returned to the pool and re-drawn.  When the remaining stubs admit
    no valid pair the whole construction restarts.
    """
    if d < 0 or d >= n:
        raise GraphError(f"random_regular: need 0 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise GraphError(f"random_regular: n*d must be even, got n={n}, d={d}")
    rng = make_rng(seed)
    if d == 0:
        return Graph._from_arrays([str(i) for i in range(n)], np.empty((0, 2)), np.empty(0))
    for _ in range(max_restarts):
        edges = _try_pairing(n, d, rng)
        if edges is not None:
            return _from_pairs(n, sorted(edges))
    raise GraphError(f"random_regular: no simple graph after {max_restarts} restarts")


def _try_pairing(n: int, d: int, rng: np.random.Generator):
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), d)
    while len(stubs):
        rng.shuffle(stubs)
        left = []
        for a, b in stubs.reshape(-1, 2).tolist():
            key = (a, b) if a < b else (b, a)
            if a != b and key not in edges:
                edges.add(key)
            else:
                left.extend((a, b))
        if len(left) == len(stubs):
            # nothing placed this round; give up unless some pairing is still possible
            if not _pairable(left, edges):
                return None
        stubs = np.array(left, dtype=np.int64)
    return edges


def _pairable(stubs, edges) -> bool:
    nodes = sorted(set(stubs))
    for x in range(len(nodes)):
        for y in range(x + 1, len(nodes)):
            if (nodes[x], nodes[y]) not in edges:
                return True
    return False


MODELS = {
    "gnp": gnp,
    "kleinberg": kleinberg,
    "pref_attach": pref_attach,
    "random_regular": random_regular,
}


def generate(model: str, seed: int, **params) -> Graph:
    """Dispatch to a model by name, e.g. ``generate("gnp", 7, n=1000, p=0.01)``."""
    key = model.replace("-", "_")
    try:
        fn = MODELS[key]
    except KeyError:
        raise GraphError(f"unknown model {model!r}; choose from {sorted(MODELS)}") from None
    return fn(seed=seed, **params)


@dataclass
class GroundTruthMap:
    """Correspondence between an original graph and its perturbed copy."""

    pairs: dict[str, str]
    removed_nodes: list[str] = field(default_factory=list)
    removed_edges: list[tuple[str, str]] = field(default_factory=list)

    @property
    def removed(self) -> list:
        return [*self.removed_nodes, *self.removed_edges]

    @classmethod
    def identity(cls, g1: Graph, g2: Graph) -> "GroundTruthMap":
        return cls({u: u for u in g1.nodes if u in g2})

    def dumps(self) -> str:
        lines = [f"# removed node {u}\n" for u in self.removed_nodes]
        lines += [f"# removed edge {u} {v}\n" for u, v in self.removed_edges]
        lines += [f"{u}\t{v}\n" for u, v in self.pairs.items()]
        return "".join(lines)

    @classmethod
    def loads(cls, text: str) -> "GroundTruthMap":
        truth = cls({})
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                f = line[1:].split()
                if f[:2] == ["removed", "node"] and len(f) == 3:
                    truth.removed_nodes.append(f[2])
                elif f[:2] == ["removed", "edge"] and len(f) == 4:
                    truth.removed_edges.append((f[2], f[3]))
                continue
            f = line.split()
            if len(f) != 2:
                raise GraphError(f"line {lineno}: expected 2 fields in ground-truth map")
            if f[0] in truth.pairs:
                raise GraphError(f"line {lineno}: node {f[0]!r} mapped twice")
            truth.pairs[f[0]] = f[1]
        if len(set(truth.pairs.values())) != len(truth.pairs):
            raise GraphError("ground-truth map is not injective")
        return truth


def perturb(g: Graph, seed: int, remove_nodes: int = 0, remove_edges: int = 0):
    """Delete uniformly random nodes or edges.

    Returns ``(g2, truth)`` where ``truth`` maps every surviving node to
    itself and records what was deleted.  Node deletion also records the
    incident edges.
    """
    if remove_nodes and remove_edges:
        raise GraphError("perturb: remove either nodes or edges, not both")
    if remove_nodes < 0 or remove_edges < 0:
        raise GraphError("perturb: counts must be nonnegative")
    rng = make_rng(seed)
    if remove_nodes:
        if remove_nodes >= g.number_of_nodes():
            raise GraphError(f"perturb: cannot remove {remove_nodes} of {g.number_of_nodes()} nodes")
        picked = np.sort(rng.choice(g.number_of_nodes(), size=remove_nodes, replace=False))
        gone = [g.nodes[i] for i in picked]
        gone_set = set(gone)
        incident = [(u, v) for u, v, _ in g.edges() if u in gone_set or v in gone_set]
        g2 = g.without(nodes=gone)
        truth = GroundTruthMap({u: u for u in g2.nodes}, gone, incident)
    elif remove_edges:
        if remove_edges >= g.number_of_edges():
            raise GraphError(f"perturb: cannot remove {remove_edges} of {g.number_of_edges()} edges")
        picked = np.sort(rng.choice(g.number_of_edges(), size=remove_edges, replace=False))
        all_edges = g.edges()
        gone_edges = [(all_edges[k][0], all_edges[k][1]) for k in picked]
        g2 = g.without(edges=gone_edges)
        truth = GroundTruthMap({u: u for u in g.nodes}, [], gone_edges)
    else:
        g2 = g
        truth = GroundTruthMap({u: u for u in g.nodes})
    if g2.number_of_nodes() == 0:
        raise GraphError("perturb: result is empty")
    return g2, truth


_KARATE = (
    "0-1 0-2 0-3 0-4 0-5 0-6 0-7 0-8 0-10 0-11 0-12 0-13 0-17 0-19 0-21 0-31 "
    "1-2 1-3 1-7 1-13 1-17 1-19 1-21 1-30 2-3 2-7 2-8 2-9 2-13 2-27 2-28 2-32 "
    "3-7 3-12 3-13 4-6 4-10 5-6 5-10 5-16 6-16 8-30 8-32 8-33 9-33 13-33 14-32 "
    "14-33 15-32 15-33 18-32 18-33 19-33 20-32 20-33 22-32 22-33 23-25 23-27 "
    "23-29 23-32 23-33 24-25 24-27 24-31 25-31 26-29 26-33 27-33 28-31 28-33 "
    "29-32 29-33 30-32 30-33 31-32 31-33 32-33"
)


def karate_club() -> Graph:
    """Zachary's karate club (34 nodes, 78 edges, nodes ``"0"``..``"33"``), unit weights."""
    return Graph(tuple(e.split("-")) for e in _KARATE.split())
