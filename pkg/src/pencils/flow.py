"""Exact max-flow / min-cut on a :class:`~pencils.netgraph.NetGraph`.

All arithmetic is rational. Capacities are rescaled by the lcm of their
denominators so that the solver itself runs on Python integers.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .exceptions import GraphTooLargeError, InvalidInputError
from .netgraph import NetGraph, cut_capacity

ORACLE_LIMIT = 20


@dataclass(frozen=True, eq=False)
class Flow:
    """Edge function on the canonical orientation; ``f(j, i) = -f(i, j)`` is implied."""

    graph: NetGraph
    values: Mapping

    def __call__(self, x, y) -> Fraction:
        if x < y:
            return self.values.get((x, y), Fraction(0))
        return -self.values.get((y, x), Fraction(0))

    def outflow(self, x) -> Fraction:
        return sum((self(x, y) for y in self.graph.neighbors(x)), Fraction(0))


def zero_flow(graph: NetGraph) -> Flow:
    return Flow(graph, {e: Fraction(0) for e in graph.edges})


def flow_norm(flow: Flow) -> Fraction:
    """Net outflow at the source."""
    return flow.outflow(flow.graph.source)


def flow_across(flow: Flow, S) -> Fraction:
    """``f(S, S^c)``: total flow from S to its complement."""
    S = frozenset(S)
    total = Fraction(0)
    for (i, j), v in flow.values.items():
        if i in S and j not in S:
            total += v
        elif j in S and i not in S:
            total -= v
    return total


class _Residual:
    """Integer residual network. ``res(u -> v) = c - sigma * f`` for edge e."""

    def __init__(self, graph: NetGraph):
        self.graph = graph
        self.index = {v: k for k, v in enumerate(graph.vertices)}
        scale = 1
        for c in graph.capacity.values():
            scale = math.lcm(scale, c.denominator)
        self.scale = scale
        self.cap = [int(graph.capacity[e] * scale) for e in graph.edges]
        self.f = [0] * len(graph.edges)
        self.adj = [[] for _ in graph.vertices]
        for k, (i, j) in enumerate(graph.edges):
            a, b = self.index[i], self.index[j]
            self.adj[a].append((b, k, 1))
            self.adj[b].append((a, k, -1))
        # deterministic exploration order: ascending neighbour id
        for lst in self.adj:
            lst.sort()

    def residual(self, k, sigma) -> int:
        return self.cap[k] - sigma * self.f[k]

    def levels(self, s) -> list:
        level = [-1] * len(self.adj)
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, k, sg in self.adj[u]:
                if level[v] < 0 and self.residual(k, sg) > 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level

    def blocking_flow(self, s, t, level) -> int:
        ptr = [0] * len(self.adj)
        pushed_total = 0
        path = []  # list of (u, k, sigma)
        u = s
        while True:
            if u == t:
                delta = min(self.residual(k, sg) for _, k, sg in path)
                for _, k, sg in path:
                    self.f[k] += sg * delta
                pushed_total += delta
                path.clear()
                u = s
                continue
            edges = self.adj[u]
            while ptr[u] < len(edges):
                v, k, sg = edges[ptr[u]]
                if level[v] == level[u] + 1 and self.residual(k, sg) > 0:
                    break
                ptr[u] += 1
            if ptr[u] < len(edges):
                v, k, sg = edges[ptr[u]]
                path.append((u, k, sg))
                u = v
                continue
            if u == s:
                return pushed_total
            level[u] = -1
            u, _, _ = path.pop()
            ptr[u] += 1

    def solve(self, s, t) -> None:
        while True:
            level = self.levels(s)
            if level[t] < 0:
                return
            self.blocking_flow(s, t, level)

    def reachable(self, s) -> set:
        return {k for k, lv in enumerate(self.levels(s)) if lv >= 0}


def max_flow(graph: NetGraph) -> Flow:
    """Maximum s-t flow by shortest augmenting paths (Dinic's blocking flows).

    Returns the zero flow when t is unreachable from s.
    """
    flow, _ = _solve(graph)
    return flow


def _solve(graph: NetGraph):
    net = _Residual(graph)
    s, t = net.index[graph.source], net.index[graph.sink]
    net.solve(s, t)
    values = {e: Fraction(net.f[k], net.scale) for k, e in enumerate(graph.edges)}
    side = frozenset(graph.vertices[k] for k in net.reachable(s))
    return Flow(graph, values), side


def min_cut(graph: NetGraph, flow: Optional[Flow] = None):
    """Source side of the residual graph after a max flow, and its capacity.

    This is the inclusion-minimal minimum cut. If ``flow`` is given it must be
    a maximum flow on ``graph``.
    """
    if flow is None:
        flow, side = _solve(graph)
    else:
        side = _residual_side(flow)
    return side, cut_capacity(graph, side)


def _residual_side(flow: Flow) -> frozenset:
    g = flow.graph
    seen = {g.source}
    queue = deque([g.source])
    while queue:
        x = queue.popleft()
        for y in g.neighbors(x):
            if y not in seen and flow(x, y) < g.cap(x, y):
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def enumerate_cuts_oracle(graph: NetGraph, limit: int = ORACLE_LIMIT) -> Fraction:
    """Minimum cut capacity by exhaustive enumeration of all s-t cuts.

    Walks the inner vertices in Gray-code order so each step flips one vertex.
    """
    n = len(graph.vertices)
    if n > limit:
        raise GraphTooLargeError(f"{n} vertices exceeds the enumeration limit {limit}")
    s, t = graph.source, graph.sink
    inner = [v for v in graph.vertices if v not in (s, t)]
    denom = 1
    for c in graph.capacity.values():
        denom = denom * c.denominator // math.gcd(denom, c.denominator)
    w = {e: c.numerator * (denom // c.denominator) for e, c in graph.capacity.items()}
    incident = {v: [] for v in graph.vertices}
    for (i, j), c in w.items():
        incident[i].append((j, c))
        incident[j].append((i, c))
    in_s = {v: False for v in graph.vertices}
    in_s[s] = True
    current = sum(c for y, c in incident[s] if not in_s[y])
    best = current
    prev_gray = 0
    for k in range(1, 2 ** len(inner)):
        gray = k ^ (k >> 1)
        v = inner[(gray ^ prev_gray).bit_length() - 1]
        prev_gray = gray
        for y, c in incident[v]:
            # edge v-y crosses now iff it did not cross before
            current += -c if in_s[y] != in_s[v] else c
        in_s[v] = not in_s[v]
        if current < best:
            best = current
    return Fraction(best, denom)


@dataclass(frozen=True)
class FlowReport:
    ok: bool
    axiom: Optional[str] = None
    where: Optional[tuple] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def validate_flow(flow: Flow) -> FlowReport:
    """Check antisymmetry (F1), conservation (F2) and capacity (F3) exactly."""
    g = flow.graph
    edges = set(g.edges)
    for e, v in flow.values.items():
        if e not in edges:
            rev = (e[1], e[0])
            if rev in edges:
                return FlowReport(False, "F1", e, "value stored on a non-canonical orientation")
            return FlowReport(False, "F1", e, "value on a non-edge")
        if not isinstance(v, Fraction):
            return FlowReport(False, "F1", e, "non-rational flow value")
    for x in g.vertices:
        if x in (g.source, g.sink):
            continue
        out = flow.outflow(x)
        if out != 0:
            return FlowReport(False, "F2", (x,), f"net outflow {out} at vertex {x}")
    for e in g.edges:
        v = flow.values.get(e, Fraction(0))
        if abs(v) > g.capacity[e]:
            return FlowReport(False, "F3", e, f"|f| = {abs(v)} exceeds capacity {g.capacity[e]} on edge {e}")
    return FlowReport(True)


def scale_graph(graph: NetGraph, q) -> NetGraph:
    q = Fraction(q)
    if q <= 0:
        raise InvalidInputError("scale factor must be positive")
    return graph.with_capacities({e: c * q for e, c in graph.capacity.items()})


def separated_min_cut(graph: NetGraph, space, margin: float = 2.0):
    """Minimum cut among cuts whose crossing edges avoid the terminals.

    Every crossing edge must have both endpoints at distance >= ``margin * r_n``
    from s and from t. Vertices closer than that, and their neighbours, are
    pinned to the side of their terminal by edges of prohibitive capacity.
    Returns ``(S, capacity)`` in the original graph, or None when no such cut
    exists.
    """
    if graph.scale is None:
        raise InvalidInputError("need a graph built from a space")
    s, t = graph.source, graph.sink
    reach = margin * graph.scale
    pinned = {}
    for term in (s, t):
        near = {x for x in graph.vertices if space.dist[term, x] < reach}
        for x in list(near):
            near.update(graph.neighbors(x))
        for x in near:
            if pinned.setdefault(x, term) != term:
                return None
    big = sum(graph.capacity.values(), Fraction(0)) + 1
    cap = dict(graph.capacity)
    for x, term in pinned.items():
        if x == term:
            continue
        e = (min(x, term), max(x, term))
        cap[e] = big
    aux = NetGraph(graph.vertices, s, t, tuple(sorted(cap)), cap,
                   {e: graph.length.get(e, 0.0) for e in cap}, graph.scale, graph.net)
    _, side = _solve(aux)
    return side, cut_capacity(graph, side)
