import numpy as np
import pytest
from hypothesis import strategies as st

from signcone.graph import build_graph, gen_sensor_graph, laplacian
from signcone.spectral import Band, band_basis, eigendecompose, random_bandlimited_signal


@st.composite
def connected_graphs(draw, min_n=2, max_n=12):
    """Random spanning tree plus random extra edges, random positive weights."""
    n = draw(st.integers(min_n, max_n))
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[(u, v)] = draw(st.floats(0.1, 5.0))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    for a, b in extra:
        if a != b:
            edges.setdefault((min(a, b), max(a, b)), draw(st.floats(0.1, 5.0)))
    return build_graph(n, [(i, j, w) for (i, j), w in edges.items()])


@pytest.fixture(scope="session")
def sensor_instance():
    """The 40-vertex, band 29..35 setting with a fixed unit-norm band-limited signal."""
    g = gen_sensor_graph(40, 153, seed=1)
    spec = eigendecompose(laplacian(g))
    basis = band_basis(spec, Band(29, 35))
    x = random_bandlimited_signal(basis, seed=1)
    return g, spec, basis, x


def random_unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
