import math

import numpy as np
import pytest
from hypothesis import given

from conftest import connected_graphs, path
from riccimetric import (DistanceOracle, Graph, GraphError, jaccard, load_graph, save_graph,
                         shortest_distances)
from riccimetric.graph import node_key


def floyd_warshall(g):
    n = len(g)
    D = np.full((n, n), math.inf)
    np.fill_diagonal(D, 0)
    for (i, j), w in zip(g.edge_index.tolist(), g.weights.tolist()):
        D[i, j] = D[j, i] = min(D[i, j], w)
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


def test_construction_rejects_bad_edges():
    with pytest.raises(GraphError):
        Graph([("a", "a")])
    with pytest.raises(GraphError):
        Graph([("a", "b"), ("b", "a")])
    for w in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(GraphError):
            Graph([("a", "b", w)])


def test_natural_node_order():
    g = Graph([("10", "2"), ("2", "x"), ("1", "x")])
    assert g.nodes == ("1", "2", "10", "x")
    assert sorted(["b", "3", "a", "20"], key=node_key) == ["3", "20", "a", "b"]


def test_basic_accessors():
    g = Graph([("a", "b", 2.0), ("b", "c")], nodes=["z"])
    assert g.number_of_nodes() == 4 and g.number_of_edges() == 2
    assert g.weight("c", "b") == 1.0
    assert g.degree("b") == 2 and g.degree("z") == 0
    assert list(g.neighbors("b")) == ["a", "c"]
    assert not g.is_connected()
    assert g.total_weight() == 3.0


def test_without_edges_keeps_nodes():
    g = path("a", "b", "c")
    h = g.without(edges=[("a", "b")])
    assert h.nodes == g.nodes and h.number_of_edges() == 1
    h = g.without(nodes=["b"])
    assert h.nodes == ("a", "c") and h.number_of_edges() == 0


def test_edge_list_round_trip():
    text = "# comment\n1 2 0.5\n2\t3\n\n3 1 2.25\n"
    g = load_graph(text)
    assert g.weight("1", "2") == 0.5 and g.weight("2", "3") == 1.0
    assert load_graph(save_graph(g)) == g
    assert save_graph(g) == "1\t2\t0.5\n1\t3\t2.25\n2\t3\t1\n"


@pytest.mark.parametrize("text", ["a\n", "a b c d\n", "a b x\n", "a b 0\n", "a a\n"])
def test_edge_list_errors_carry_line_number(text):
    with pytest.raises(GraphError, match="line 1"):
        load_graph(text)


def test_dijkstra_path_distances():
    g = Graph([("a", "b", 1.0), ("b", "c", 2.0), ("a", "c", 5.0)], nodes=["d"])
    assert shortest_distances(g, "a") == {"a": 0.0, "b": 1.0, "c": 3.0, "d": math.inf}


@given(connected_graphs())
def test_dijkstra_matches_floyd_warshall(g):
    D = floyd_warshall(g)
    assert np.array_equal(DistanceOracle(g).matrix(), D)
    for s in g.nodes[:3]:
        d = shortest_distances(g, s)
        assert [d[t] for t in g.nodes] == D[g.index(s)].tolist()


def test_jaccard():
    g = Graph([("a", "b"), ("a", "c"), ("b", "c"), ("c", "d")])
    assert jaccard(g, "a", "b") == pytest.approx(1 / 3)
    star = Graph([("x", "x1"), ("x", "x2"), ("y", "y1"), ("x", "y")])
    assert jaccard(star, "x", "y") == 0.0


def test_jaccard_worked_examples():
    assert jaccard(Graph([("x", "y"), ("y", "z"), ("x", "z")]), "x", "y") == pytest.approx(1 / 3)
    k4 = Graph([(a, b) for a in "abcd" for b in "abcd" if a < b])
    assert jaccard(k4, "a", "b") == 0.5
    with pytest.raises(GraphError):
        jaccard(k4.without(edges=[("a", "b")]), "a", "b")
