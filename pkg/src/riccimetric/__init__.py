"""Ollivier-Ricci curvature, discrete Ricci flow metrics, landmark network
alignment and curvature-signature graph comparison."""

from .alignment import (
    AlignmentReport,
    AlignmentResult,
    CoordinateTable,
    SimilarityMatrix,
    accuracy_connected_equivalence,
    align,
    coordinates,
    match_greedy,
    match_hungarian,
    metric_graph,
    select_landmarks,
    similarity_matrix,
    similarity_rank,
    stretch_ratios,
)
from .comparison import CurvatureSignature, DistanceMatrix, curvature_signature, distance_matrix, emd_1d
from .curvature import CurvatureMap, CurvatureParams, curvature_map, edge_curvature, neighbor_measure
from .flow import FlowHistory, FlowParams, metric_uniformity, normalize, ricci_flow
from .generators import GroundTruthMap, generate, gnp, karate_club, kleinberg, perturb, pref_attach, random_regular
from .graph import DistanceOracle, Graph, GraphError, jaccard, load_graph, read_graph, save_graph, shortest_distances
from .transport import TransportError

__version__ = "0.1.0"
