"""Graph comparison through the distribution of edge curvatures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import CurvatureParams, curvature_map
from .graph import Graph, GraphError


@dataclass
class CurvatureSignature:
    samples: np.ndarray
    label: str = ""
    method: str = "ATD"
    alpha: float = 0.5

    def __len__(self) -> int:
        return len(self.samples)


def curvature_signature(g: Graph, params: CurvatureParams = CurvatureParams(),
                        label: str = "") -> CurvatureSignature:
    """Sorted curvatures of all edges of a connected graph."""
    if g.number_of_edges() == 0 or not g.is_connected():
        raise GraphError(f"graph {label!r} must be connected with at least one edge")
    kappa = np.sort(curvature_map(g, params).kappa)
    return CurvatureSignature(kappa, label, params.method, params.alpha)


def emd_1d(a: CurvatureSignature | Sequence[float], b: CurvatureSignature | Sequence[float]) -> float:
    """Earth mover distance between two empirical distributions on the line.

    Each sample carries mass ``1/len``.  The distance is the integral of
    ``|Qa(p) - Qb(p)|`` over ``p`` in ``(0, 1]``, evaluated exactly on the
    merged breakpoints of the two step quantile functions.
    """
    xa = np.sort(np.asarray(getattr(a, "samples", a), dtype=np.float64))
    xb = np.sort(np.asarray(getattr(b, "samples", b), dtype=np.float64))
    if len(xa) == 0 or len(xb) == 0:
        raise ValueError("empty signature")
    pa = np.arange(1, len(xa) + 1) / len(xa)
    pb = np.arange(1, len(xb) + 1) / len(xb)
    p = np.union1d(pa, pb)
    lo = np.concatenate([[0.0], p[:-1]])
    mid = (lo + p) / 2
    qa = xa[np.minimum(np.searchsorted(pa, mid), len(xa) - 1)]
    qb = xb[np.minimum(np.searchsorted(pb, mid), len(xb) - 1)]
    return float(np.sum(np.abs(qa - qb) * (p - lo)))


@dataclass
class DistanceMatrix:
    labels: list[str]
    d: np.ndarray

    def to_csv(self) -> str:
        lines = ["," + ",".join(self.labels) + "\n"]
        for lab, row in zip(self.labels, self.d.tolist()):
            lines.append(lab + "," + ",".join(f"{x:.17g}" for x in row) + "\n")
        return "".join(lines)


def signature_distances(signatures: Sequence[CurvatureSignature]) -> DistanceMatrix:
    n = len(signatures)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = emd_1d(signatures[i], signatures[j])
    return DistanceMatrix([s.label for s in signatures], d)


def distance_matrix(graphs: Sequence[Graph], labels: Sequence[str] | None = None,
                    params: CurvatureParams = CurvatureParams()) -> DistanceMatrix:
    """Pairwise curvature-signature EMD between graphs."""
    if len(graphs) < 2:
        raise ValueError("need at least two graphs")
    labels = list(labels) if labels is not None else [f"g{i}" for i in range(len(graphs))]
    if len(labels) != len(graphs):
        raise ValueError("one label per graph")
    return signature_distances([curvature_signature(g, params, lab)
                                for g, lab in zip(graphs, labels)])
