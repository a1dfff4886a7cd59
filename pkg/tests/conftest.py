import pytest
from hypothesis import HealthCheck, settings, strategies as st

from riccimetric import Graph, karate_club

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def connected_graphs(draw, min_nodes=2, max_nodes=8, weighted=True):
    """Random spanning tree plus extra edges; integer weights keep sums exact."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = {(draw(st.integers(0, i - 1)), i) for i in range(1, n)}
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    pairs |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    edges = []
    for a, b in sorted(pairs):
        w = draw(st.integers(1, 9)) if weighted else 1
        edges.append((str(a), str(b), float(w)))
    return Graph(edges)


@pytest.fixture(scope="session")
def karate():
    return karate_club()


def triangle():
    return Graph([("a", "b"), ("b", "c"), ("a", "c")])


def path(*names):
    return Graph(list(zip(names, names[1:])))
