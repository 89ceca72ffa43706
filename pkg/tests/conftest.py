import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from expdecomp.graph import MultiGraph

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def multigraphs(draw, min_n=1, max_n=8, max_m=16, loops=True, connected=False):
    """Small multigraphs; ``connected`` prepends a random spanning tree."""
    n = draw(st.integers(min_n, max_n))
    edges = []
    if connected:
        for v in range(1, n):
            edges.append((draw(st.integers(0, v - 1)), v))
    extra = draw(st.integers(0, max(0, max_m - len(edges))))
    for _ in range(extra):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 1))
        if u == v and not loops:
            continue
        edges.append((u, v))
    return MultiGraph(n, edges)


@st.composite
def graphs_with_cut(draw, **kw):
    """A multigraph with at least two vertices and a proper nonempty cut mask."""
    G = draw(multigraphs(min_n=2, **kw))
    bits = draw(st.lists(st.booleans(), min_size=G.n, max_size=G.n))
    mask = np.array(bits, dtype=bool)
    if mask.all():
        mask[0] = False
    if not mask.any():
        mask[-1] = True
    return G, mask


def k_n(n):
    return MultiGraph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one "criterion N: PASS/FAIL ..." line per acceptance criterion, printed at the end
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
