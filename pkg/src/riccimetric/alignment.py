"""Landmark-coordinate network alignment and its evaluation measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .flow import FlowParams, ricci_flow
from .generators import GroundTruthMap, make_rng
from .graph import DistanceOracle, Graph, GraphError

METRICS = ("rf-atd", "rf-otd", "hop")
MATCHERS = ("hungarian", "greedy")


def metric_graph(g: Graph, metric: str, params: FlowParams | None = None) -> Graph:
    """Weights defining the node metric: Ricci flow weights, or unit weights for hop count."""
    if metric == "hop":
        return g.unit_weights()
    if metric not in ("rf-atd", "rf-otd"):
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    params = params or FlowParams()
    method = "ATD" if metric == "rf-atd" else "OTD"
    flowed, _ = ricci_flow(g, FlowParams(params.epsilon, params.iterations, params.tolerance,
                                         method, params.alpha, params.denominator))
    return flowed


def select_landmarks(g: Graph, k: int, seed: int,
                     candidates: Sequence[str] | None = None) -> list[str]:
    """Farthest-point landmarks.

    The first landmark is drawn uniformly (from ``candidates`` if given);
    each next one maximizes the distance to the nearest landmark chosen so
    far, ties going to the earlier node.
    """
    pool = np.array(sorted(g.index(u) for u in candidates) if candidates is not None
                    else range(g.number_of_nodes()), dtype=np.int64)
    if k < 1 or k > len(pool):
        raise GraphError(f"cannot pick {k} landmarks from {len(pool)} candidates")
    if not g.is_connected():
        raise GraphError("landmark selection needs a connected graph")
    rng = make_rng(seed)
    oracle = DistanceOracle(g)
    chosen = [int(pool[rng.integers(len(pool))])]
    nearest = oracle.row(chosen[0])[pool].copy()
    taken = np.zeros(len(pool), dtype=bool)
    taken[np.searchsorted(pool, chosen[0])] = True
    while len(chosen) < k:
        score = np.where(taken, -np.inf, nearest)
        pick = int(np.argmax(score))
        taken[pick] = True
        chosen.append(int(pool[pick]))
        nearest = np.minimum(nearest, oracle.row(chosen[-1])[pool])
    return [g.nodes[i] for i in chosen]


@dataclass
class CoordinateTable:
    nodes: tuple[str, ...]
    landmarks: tuple[str, ...]
    values: np.ndarray
    excluded: list[str] = field(default_factory=list)

    def __getitem__(self, u: str) -> np.ndarray:
        return self.values[self.nodes.index(u)]


def coordinates(g: Graph, landmarks: Sequence[str]) -> CoordinateTable:
    """Distance from every node to each landmark, in landmark order.

    Nodes that some landmark cannot reach are left out and listed in
    ``excluded``.
    """
    if not landmarks:
        raise GraphError("need at least one landmark")
    if len(set(landmarks)) != len(landmarks):
        raise GraphError("landmarks must be distinct")
    oracle = DistanceOracle(g)
    vals = oracle.rows([g.index(l) for l in landmarks]).T
    ok = np.all(np.isfinite(vals), axis=1)
    nodes = tuple(u for u, good in zip(g.nodes, ok) if good)
    excluded = [u for u, good in zip(g.nodes, ok) if not good]
    return CoordinateTable(nodes, tuple(landmarks), np.ascontiguousarray(vals[ok]), excluded)


@dataclass
class SimilarityMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cost: np.ndarray

    def to_csv(self) -> str:
        lines = ["," + ",".join(self.cols) + "\n"]
        for u, row in zip(self.rows, self.cost.tolist()):
            lines.append(u + "," + ",".join(f"{c:.17g}" for c in row) + "\n")
        return "".join(lines)


def similarity_matrix(a: CoordinateTable, b: CoordinateTable) -> SimilarityMatrix:
    """Euclidean distance between landmark coordinates for every row/column node pair."""
    if a.values.shape[1] != b.values.shape[1]:
        raise ValueError(f"coordinate tables use {a.values.shape[1]} and {b.values.shape[1]} landmarks")
    return SimilarityMatrix(a.nodes, b.nodes, cdist(a.values, b.values))


@dataclass
class AlignmentResult:
    matching: dict[str, str]
    total_cost: float
    pair_costs: dict[str, float]
    accuracy: float | None = None


def _result(S: SimilarityMatrix, rows, cols) -> AlignmentResult:
    order = np.argsort(rows, kind="stable")
    rows, cols = np.asarray(rows)[order], np.asarray(cols)[order]
    costs = S.cost[rows, cols]
    matching = {S.rows[i]: S.cols[j] for i, j in zip(rows.tolist(), cols.tolist())}
    pair_costs = {S.rows[i]: c for i, c in zip(rows.tolist(), costs.tolist())}
    return AlignmentResult(matching, float(costs.sum()), pair_costs)


def _check(S: SimilarityMatrix):
    if S.cost.size == 0:
        raise ValueError("empty similarity matrix")
    if not np.all(np.isfinite(S.cost)):
        raise ValueError("similarity matrix has non-finite entries")


def match_hungarian(S: SimilarityMatrix) -> AlignmentResult:
    """Minimum total-cost matching of size ``min(rows, cols)``."""
    _check(S)
    rows, cols = linear_sum_assignment(S.cost)
    return _result(S, rows, cols)


def match_greedy(S: SimilarityMatrix) -> AlignmentResult:
    """Repeatedly take the cheapest remaining pair; ties in row-then-column order."""
    _check(S)
    m, n = S.cost.shape
    order = np.argsort(S.cost, axis=None, kind="stable")
    row_used = np.zeros(m, dtype=bool)
    col_used = np.zeros(n, dtype=bool)
    rows, cols = [], []
    target = min(m, n)
    for flat in order.tolist():
        i, j = divmod(flat, n)
        if row_used[i] or col_used[j]:
            continue
        row_used[i] = col_used[j] = True
        rows.append(i)
        cols.append(j)
        if len(rows) == target:
            break
    return _result(S, rows, cols)


def default_eps(a: CoordinateTable, b: CoordinateTable, factor: float = 1e-3) -> float:
    """Scale-free threshold: ``factor`` times the mean coordinate entry of both tables."""
    return factor * float(np.concatenate([a.values.ravel(), b.values.ravel()]).mean())


def equivalence_errors(g1: Graph, g2: Graph, result: AlignmentResult,
                       truth: GroundTruthMap | Mapping[str, str] | None = None) -> dict[str, float]:
    """Per matched pair, the 2-norm gap between the two nodes' distance vectors.

    Vectors run over the ground-truth pairs in ``g1`` node order, skipping
    the positions of the two matched nodes themselves.
    """
    pairs = _pairs(truth, g1, g2)
    ref = sorted(pairs, key=g1.index)
    ref1 = np.array([g1.index(a) for a in ref], dtype=np.int64)
    ref2 = np.array([g2.index(pairs[a]) for a in ref], dtype=np.int64)
    slot1 = {a: k for k, a in enumerate(ref)}
    slot2 = {pairs[a]: k for k, a in enumerate(ref)}

    us = list(result.matching)
    vs = [result.matching[u] for u in us]
    D1 = DistanceOracle(g1).rows([g1.index(u) for u in us])[:, ref1]
    D2 = DistanceOracle(g2).rows([g2.index(v) for v in vs])[:, ref2]
    diff = D1 - D2
    for r, (u, v) in enumerate(zip(us, vs)):
        for s in (slot1.get(u), slot2.get(v)):
            if s is not None:
                diff[r, s] = 0.0
    if not np.all(np.isfinite(diff)):
        raise GraphError("matched nodes are disconnected from reference nodes")
    err = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return dict(zip(us, err.tolist()))


def accuracy_connected_equivalence(g1: Graph, g2: Graph, result: AlignmentResult, eps: float,
                                   truth: GroundTruthMap | Mapping[str, str] | None = None) -> float:
    """Fraction of matched pairs whose distance vectors differ by less than ``eps``."""
    if not result.matching:
        return 0.0
    errors = equivalence_errors(g1, g2, result, truth)
    return sum(e < eps for e in errors.values()) / len(errors)


def _pairs(truth, g1: Graph, g2: Graph) -> dict[str, str]:
    if truth is None:
        return GroundTruthMap.identity(g1, g2).pairs
    pairs = truth.pairs if isinstance(truth, GroundTruthMap) else dict(truth)
    for a, b in pairs.items():
        if a not in g1 or b not in g2:
            raise GraphError(f"ground-truth pair ({a}, {b}) not present in both graphs")
    return pairs


def stretch_ratios(g1: Graph, g2: Graph, source: str) -> dict[str, float]:
    """``(d1(s, t) - d2(s, t)) / d1(s, t)`` for every other node present in both graphs."""
    if source not in g1 or source not in g2:
        raise GraphError(f"source {source!r} must be in both graphs")
    d1 = DistanceOracle(g1).row(g1.index(source))
    d2 = DistanceOracle(g2).row(g2.index(source))
    out = {}
    for t in g1.nodes:
        if t == source or t not in g2:
            continue
        a, b = d1[g1.index(t)], d2[g2.index(t)]
        if not (math.isfinite(a) and math.isfinite(b)):
            raise GraphError(f"node {t!r} unreachable from {source!r}")
        out[t] = (a - b) / a
    return out


def similarity_rank(S: SimilarityMatrix, truth: GroundTruthMap | Mapping[str, str],
                    ties: str = "min") -> dict[str, float]:
    """1-based rank of each true counterpart within its row, cheapest first.

    ``ties="min"`` gives tied entries the best rank they share;
    ``ties="average"`` gives them the mean of the positions they occupy.
    """
    pairs = truth.pairs if isinstance(truth, GroundTruthMap) else dict(truth)
    rpos = {u: i for i, u in enumerate(S.rows)}
    cpos = {v: j for j, v in enumerate(S.cols)}
    out = {}
    for a, b in pairs.items():
        if a not in rpos or b not in cpos:
            raise GraphError(f"ground-truth pair ({a}, {b}) not in the similarity matrix")
        row = S.cost[rpos[a]]
        c = row[cpos[b]]
        below = int(np.count_nonzero(row < c))
        if ties == "min":
            out[a] = float(below + 1)
        elif ties == "average":
            tied = int(np.count_nonzero(row == c))
            out[a] = below + (tied + 1) / 2
        else:
            raise ValueError(f"ties must be 'min' or 'average', got {ties!r}")
    return out


@dataclass
class AlignmentReport:
    metric: str
    matcher: str
    landmarks: int
    seeds: list[int]
    accuracies: list[float]
    eps: list[float]
    runs: list[AlignmentResult]
    landmark_sets: list[list[str]]

    @property
    def accuracy_mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def accuracy_std(self) -> float:
        return float(np.std(self.accuracies))


def align(g1: Graph, g2: Graph, truth: GroundTruthMap | None = None, landmarks: int = 2,
          metric: str = "rf-atd", matcher: str = "hungarian", repeats: int = 10, seed: int = 0,
          eps: float | None = None, flow: FlowParams | None = None,
          metric_graphs: tuple[Graph, Graph] | None = None,
          anonymize: bool = False) -> AlignmentReport:
    """Full pipeline: metric, landmarks, coordinates, similarity, matching, accuracy.

    Repeat ``r`` uses seed ``seed + r`` for its landmarks.  With
    ``anonymize`` the columns (``g2`` nodes) are put in a seeded random order
    first, so that tie-breaking in the matcher cannot exploit node names
    shared by the two graphs.  ``eps=None`` applies :func:`default_eps` per
    repeat.  ``metric_graphs`` lets callers reuse already-flowed weights.
    Benchmarks on a perturbed copy should set ``anonymize``: with equal node
    names and tied costs the default order favours the true pairs.
    """
    if matcher not in MATCHERS:
        raise ValueError(f"matcher must be one of {MATCHERS}, got {matcher!r}")
    truth = truth or GroundTruthMap.identity(g1, g2)
    pairs = _pairs(truth, g1, g2)
    h1, h2 = metric_graphs or (metric_graph(g1, metric, flow), metric_graph(g2, metric, flow))
    match = match_hungarian if matcher == "hungarian" else match_greedy

    seeds, accs, used_eps, runs, sets = [], [], [], [], []
    for r in range(repeats):
        s = seed + r
        L1 = select_landmarks(h1, landmarks, s, candidates=list(pairs))
        A = coordinates(h1, L1)
        B = coordinates(h2, [pairs[l] for l in L1])
        S = similarity_matrix(A, B)
        if anonymize:
            perm = make_rng(s).permutation(len(S.cols))
            S = SimilarityMatrix(S.rows, tuple(S.cols[j] for j in perm), S.cost[:, perm])
        result = match(S)
        e = default_eps(A, B) if eps is None else eps
        result.accuracy = accuracy_connected_equivalence(h1, h2, result, e, pairs)
        seeds.append(s)
        accs.append(result.accuracy)
        used_eps.append(e)
        runs.append(result)
        sets.append(L1)
    return AlignmentReport(metric, matcher, landmarks, seeds, accs, used_eps, runs, sets)
