import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from pencils.flow import Flow
from pencils.netgraph import NetGraph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_graph(seed, n_max=14, max_den=100, p=0.45):
    """Random connected-ish graph with rational capacities; vertex 0 is s, n-1 is t."""
    rng = random.Random(seed)
    n = rng.randint(2, n_max)
    caps = {}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            caps[(i, j)] = Fraction(rng.randint(1, 3 * max_den), rng.randint(1, max_den))
    if not caps:
        caps[(0, n - 1)] = Fraction(1)
    return NetGraph.from_capacities(range(n), caps, 0, n - 1)


def brute_min_cut(graph):
    """Minimum cut by plain subset enumeration, independent of the package oracle."""
    s, t = graph.source, graph.sink
    inner = [v for v in graph.vertices if v not in (s, t)]
    best = None
    for mask in range(2 ** len(inner)):
        S = {s} | {v for k, v in enumerate(inner) if mask >> k & 1}
        c = sum((cap for (i, j), cap in graph.capacity.items() if (i in S) != (j in S)), Fraction(0))
        best = c if best is None or c < best else best
    return best


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_flow_with_cycles(seed, n_max=10):
    """Random s-t path flows plus random circulations on a complete graph."""
    rng = random.Random(seed)
    n = rng.randint(3, n_max)
    caps = {(i, j): 1000 for i, j in itertools.combinations(range(n), 2)}
    g = NetGraph.from_capacities(range(n), caps, 0, n - 1)
    vals = {e: Fraction(0) for e in g.edges}

    def push(a, b, w):
        if a < b:
            vals[(a, b)] += w
        else:
            vals[(b, a)] -= w

    inner = list(range(1, n - 1))
    for _ in range(rng.randint(1, 4)):
        path = [0] + rng.sample(inner, rng.randint(0, len(inner))) + [n - 1]
        w = Fraction(rng.randint(1, 30), rng.randint(1, 10))
        for a, b in zip(path, path[1:]):
            push(a, b, w)
    for _ in range(rng.randint(0, 4)):
        cyc = rng.sample(range(n), rng.randint(3, n))
        w = Fraction(rng.randint(1, 30), rng.randint(1, 10))
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            push(a, b, w)
    return Flow(g, vals)


@pytest.fixture
def line5():
    from pencils.generators import line
    return line(5)
