"""Discrete Ricci flow on edge weights and the metric-uniformity diagnostic."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureParams, curvature_map
from .graph import DistanceOracle, Graph, GraphError

log = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class FlowParams:
    epsilon: float = 1.0
    iterations: int = 50
    tolerance: float = 1e-4
    method: str = "ATD"
    alpha: float = 0.5
    denominator: str = "distance"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.tolerance < 0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")
        object.__setattr__(self, "method", self.curvature.method)

    @property
    def curvature(self) -> CurvatureParams:
        return CurvatureParams(self.alpha, self.method, self.denominator)


@dataclass
class FlowRecord:
    iteration: int
    kappa_min: float
    kappa_max: float
    kappa_mean: float
    kappa_std: float
    total_weight: float


@dataclass
class FlowHistory:
    records: list[FlowRecord] = field(default_factory=list)
    converged: bool = False

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i) -> FlowRecord:
        return self.records[i]

    def to_csv(self) -> str:
        lines = ["iter,kappa_min,kappa_max,kappa_mean,kappa_std,total_weight\n"]
        for r in self.records:
            lines.append(f"{r.iteration},{r.kappa_min:.17g},{r.kappa_max:.17g},"
                         f"{r.kappa_mean:.17g},{r.kappa_std:.17g},{r.total_weight:.17g}\n")
        return "".join(lines)


def normalize(g: Graph) -> Graph:
    """Rescale weights so that they sum to the number of edges."""
    total = g.weights.sum()
    if not total > 0:
        raise GraphError("total edge weight is zero")
    return g.with_weights(g.weights * (g.number_of_edges() / total))


def _update(g: Graph, kappa: np.ndarray, epsilon: float) -> Graph:
    w = g.weights - epsilon * kappa * g.weights
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("non-finite edge weight produced by the flow")
    w = np.maximum(w, WEIGHT_FLOOR)
    total = w.sum()
    return g.with_weights(w * (len(w) / total))


def flow_step(g: Graph, params: FlowParams = FlowParams()) -> Graph:
    """One batch update: curvature on current weights, ``w -= eps * kappa * w``, renormalize."""
    kappa = curvature_map(g, params.curvature).kappa
    return _update(g, kappa, params.epsilon)


def _record(i: int, kappa: np.ndarray, g: Graph) -> FlowRecord:
    return FlowRecord(i, float(kappa.min()), float(kappa.max()), float(kappa.mean()),
                      float(kappa.std()), g.total_weight())


def ricci_flow(g: Graph, params: FlowParams = FlowParams()) -> tuple[Graph, FlowHistory]:
    """Run the flow from unit weights.

    Iteration ``i`` computes the curvature of the current weights, records
    it, and stops early when no edge's curvature moved by ``tolerance`` or
    more since iteration ``i - 1``; otherwise the weights are updated.  At
    most ``params.iterations`` updates are applied.
    """
    if not g.is_connected():
        raise GraphError("Ricci flow needs a connected graph")
    current = g.unit_weights()
    history = FlowHistory()
    prev = None
    for i in range(params.iterations):
        kappa = curvature_map(current, params.curvature).kappa
        history.records.append(_record(i, kappa, current))
        if prev is not None and np.max(np.abs(kappa - prev)) < params.tolerance:
            history.converged = True
            log.debug("flow converged at iteration %d", i)
            break
        prev = kappa
        current = _update(current, kappa, params.epsilon)
    return current, history


@dataclass
class UniformityReport:
    ratios: dict[tuple[str, str], float]
    iqr: float


def metric_uniformity(g: Graph, params: CurvatureParams = CurvatureParams()) -> UniformityReport:
    """Interquartile range of ``T(x, y) / d(x, y)`` over the edges (linear-interpolated percentiles)."""
    if not g.is_connected():
        raise GraphError("metric uniformity needs a connected graph")
    cm = curvature_map(g, params, DistanceOracle(g))
    r = cm.transport / cm.length
    q75, q25 = np.percentile(r, [75, 25])
    ratios = {(u, v): x for (u, v, _), x in zip(g.edges(), r.tolist())}
    return UniformityReport(ratios, float(max(q75 - q25, 0.0)))
