"""The net graph: vertices of an r-net, edges between overlapping 2r-balls,
density-ratio capacities, and the partition-of-unity cut functions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional

import numpy as np

from .exceptions import InvalidInputError
from .space import Net, Space, density_profile, domain, lip_field, lipschitz_constant, theta

CAPACITY_DENOMINATOR = 10 ** 6
EDGE_FACTOR = 4  # edge iff d(x, x') < EDGE_FACTOR * r_n, i.e. the open 2r_n balls meet


@dataclass(frozen=True, eq=False)
class NetGraph:
    """Undirected capacitated graph with a designated source and sink.

    Edges are stored once as ``(i, j)`` with ``i < j``. Capacities are
    positive :class:`~fractions.Fraction` values and symmetric by construction.
    ``scale`` and ``net`` are set for graphs built from a space.
    """

    vertices: tuple
    source: int
    sink: int
    edges: tuple
    capacity: Mapping
    length: Mapping
    scale: Optional[float] = None
    net: Optional[Net] = None

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise InvalidInputError("duplicate vertices")
        if self.source not in vs or self.sink not in vs:
            raise InvalidInputError("source and sink must be vertices")
        if self.source == self.sink:
            raise InvalidInputError("source and sink must differ")
        for e in self.edges:
            i, j = e
            if not (i < j and i in vs and j in vs):
                raise InvalidInputError(f"edge {e} is not a canonical pair of vertices")
            c = self.capacity[e]
            if not isinstance(c, Fraction) or c <= 0:
                raise InvalidInputError(f"capacity of {e} must be a positive Fraction")

    @classmethod
    def from_capacities(cls, vertices, capacities: Mapping, source, sink, lengths=None) -> "NetGraph":
        """Build a graph from ``{(x, y): capacity}``; pairs may be given in either order."""
        cap, ln = {}, {}
        for (x, y), c in capacities.items():
            e = (min(x, y), max(x, y))
            if e in cap:
                raise InvalidInputError(f"edge {e} given twice")
            cap[e] = Fraction(c)
            ln[e] = 1.0 if lengths is None else float(lengths[(x, y)])
        return cls(
            vertices=tuple(sorted(vertices)),
            source=source,
            sink=sink,
            edges=tuple(sorted(cap)),
            capacity=cap,
            length=ln,
        )

    @cached_property
    def adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return {v: tuple(sorted(n)) for v, n in adj.items()}

    def neighbors(self, x) -> tuple:
        return self.adjacency[x]

    @property
    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    def cap(self, x, y) -> Fraction:
        return self.capacity[(min(x, y), max(x, y))]

    def with_capacities(self, capacity: Mapping) -> "NetGraph":
        return NetGraph(self.vertices, self.source, self.sink, self.edges, dict(capacity),
                        self.length, self.scale, self.net)


def _round_capacity(value: float) -> Fraction:
    num = round(value * CAPACITY_DENOMINATOR)
    return Fraction(max(num, 1), CAPACITY_DENOMINATOR)


def _capacity_from_profiles(theta_r, prof_s, prof_t, x, y) -> float:
    a, b = min(x, y), max(x, y)
    first = theta_r[a] / prof_s[a] + theta_r[b] / prof_t[b]
    second = theta_r[b] / prof_s[b] + theta_r[a] / prof_t[a]
    return 0.5 * first + 0.5 * second


def capacity(space: Space, net: Net, x: int, y: int) -> Fraction:
    """Capacity of the edge {x, y}.

    Exactly 1 for edges touching s or t. Otherwise the symmetrised density ratio
    ``theta(x, r)/theta(s, d(s, x)) + theta(y, r)/theta(t, d(t, y))`` averaged
    over both orientations, rounded to a multiple of 1e-6 (never below 1e-6).
    """
    if x == y or x not in net or y not in net:
        raise InvalidInputError(f"({x}, {y}) is not a pair of distinct net vertices")
    if not space.dist[x, y] < EDGE_FACTOR * net.scale:
        raise InvalidInputError(f"({x}, {y}) is not an edge")
    s, t = net.source, net.sink
    if {x, y} & {s, t}:
        return Fraction(1)
    r = net.scale
    th = {v: theta(space, v, r) for v in (x, y)}
    ps = {v: theta(space, s, space.dist[s, v]) for v in (x, y)}
    pt = {v: theta(space, t, space.dist[t, v]) for v in (x, y)}
    return _round_capacity(_capacity_from_profiles(th, ps, pt, x, y))


def build_graph(net: Net, space: Space) -> NetGraph:
    """Graph on the net vertices with an edge wherever d(x, x') < 4 r_n."""
    if len(net.vertices) < 2:
        raise InvalidInputError("net needs at least two vertices")
    v = np.asarray(net.vertices, dtype=int)
    r = net.scale
    s, t = net.source, net.sink
    theta_r = np.array([space.weights[space.dist[x] < r].sum() / r for x in range(len(space))])
    prof_s = density_profile(space, s)
    prof_t = density_profile(space, t)
    sub = space.dist[np.ix_(v, v)]
    ii, jj = np.nonzero(np.triu(sub < EDGE_FACTOR * r, k=1))
    cap, ln = {}, {}
    for a, b in zip(ii.tolist(), jj.tolist()):
        x, y = int(v[a]), int(v[b])
        e = (x, y)
        if x in (s, t) or y in (s, t):
            cap[e] = Fraction(1)
        else:
            cap[e] = _round_capacity(_capacity_from_profiles(theta_r, prof_s, prof_t, x, y))
        ln[e] = float(space.dist[x, y])
    return NetGraph(
        vertices=tuple(int(x) for x in v),
        source=s,
        sink=t,
        edges=tuple(sorted(cap)),
        capacity=cap,
        length=ln,
        scale=r,
        net=net,
    )


def _check_cut(graph: NetGraph, S) -> frozenset:
    S = frozenset(S)
    if graph.source not in S or graph.sink in S:
        raise InvalidInputError("a cut must contain the source and not the sink")
    if not S <= set(graph.vertices):
        raise InvalidInputError("cut side contains non-vertices")
    return S


def cut_edges(graph: NetGraph, S) -> list:
    """Edges with exactly one endpoint in S."""
    S = frozenset(S)
    return [e for e in graph.edges if (e[0] in S) != (e[1] in S)]


def cut_capacity(graph: NetGraph, S) -> Fraction:
    return sum((graph.capacity[e] for e in cut_edges(graph, S)), Fraction(0))


def boundary_vertices(graph: NetGraph, S) -> frozenset:
    """Vertices of S with a neighbour outside S."""
    S = frozenset(S)
    return frozenset(x for x in S if any(y not in S for y in graph.neighbors(x)))


def bump_matrix(graph: NetGraph, space: Space) -> np.ndarray:
    """``phi[k, y] = max(0, 2r - d(y, x_k)) / 2r`` for the k-th vertex x_k."""
    two_r = 2 * graph.scale
    v = np.asarray(graph.vertices, dtype=int)
    return np.maximum(0.0, two_r - space.dist[v]) / two_r


def partition_of_unity(graph: NetGraph, space: Space) -> np.ndarray:
    """``psi[k, y] = phi_k(y) / sum_j phi_j(y)``; columns of uncovered points are zero."""
    phi = bump_matrix(graph, space)
    total = phi.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, phi / np.where(total > 0, total, 1.0), 0.0)


@dataclass(frozen=True, eq=False)
class CutFunction:
    cut_side: frozenset
    values: np.ndarray
    covered: np.ndarray  # points where the partition of unity is defined


def cut_function(graph: NetGraph, S: Iterable, space: Space) -> CutFunction:
    """The Lipschitz function ``u = sum_{x in S} psi_x`` attached to a cut.

    Points not covered by any ball ``B(x, 2r_n)`` (outside the domain) get the
    McShane extension of u, clipped to [0, 1].
    """
    if graph.scale is None:
        raise InvalidInputError("cut functions need a graph built from a space")
    S = _check_cut(graph, S)
    phi = bump_matrix(graph, space)
    in_s = np.array([x in S for x in graph.vertices])
    mass_s = phi[in_s].sum(axis=0)
    mass_c = phi[~in_s].sum(axis=0)
    total = mass_s + mass_c
    covered = total > 0
    values = np.zeros(len(space))
    # when no S^c bump touches y this is mass_s / mass_s == 1.0 exactly
    values[covered] = mass_s[covered] / total[covered]
    if not covered.all():
        ids = np.flatnonzero(covered)
        L = lipschitz_constant(space, values, ids)
        ext = (values[ids][None, :] + L * space.dist[:, ids]).min(axis=1)
        values[~covered] = np.clip(ext[~covered], 0.0, 1.0)
    values.setflags(write=False)
    covered.setflags(write=False)
    return CutFunction(cut_side=S, values=values, covered=covered)


def localized_region(graph: NetGraph, S, space: Space, radius_factor: float = 5.0) -> np.ndarray:
    """Mask of domain points within ``radius_factor * r_n`` of some boundary vertex of S."""
    bd = sorted(boundary_vertices(graph, S))
    mask = np.zeros(len(space), dtype=bool)
    if bd:
        mask = (space.dist[bd] < radius_factor * graph.scale).any(axis=0)
    dom = np.zeros(len(space), dtype=bool)
    dom[domain(space, graph.source, graph.net.domain_radius)] = True
    return mask & dom


@dataclass(frozen=True)
class CutFunctionReport:
    u_source: float
    u_sink: float
    in_unit_interval: bool
    dichotomy_ok: bool  # u(y) = 1 / 0 exactly when all nearby vertices lie in S / S^c
    lip_radius: float
    localized_ok: bool  # nonzero Lip only near Bd(S)
    vacuous: bool  # lip_radius too small to see any neighbour
    outside: tuple  # domain points with nonzero Lip away from Bd(S)

    @property
    def endpoints_exact(self) -> bool:
        return self.u_source == 1.0 and self.u_sink == 0.0


def check_cut_function(graph: NetGraph, S, space: Space, lip_radius: float) -> CutFunctionReport:
    """Verify range, the 0/1 dichotomy, and localisation of Lip(u) near Bd(S).

    The Lipschitz radius is capped at ``3 r_n``; beyond that the discrete
    quotient can see across a whole 2 r_n-ball and the 5 r_n localisation no
    longer follows.
    """
    cf = cut_function(graph, S, space)
    u = cf.values
    S = cf.cut_side
    dom = domain(space, graph.source, graph.net.domain_radius)
    v = np.asarray(graph.vertices, dtype=int)
    near = space.dist[np.ix_(v, dom)] < 2 * graph.scale
    in_s = np.array([x in S for x in graph.vertices])
    all_s = ~(near & ~in_s[:, None]).any(axis=0)
    all_c = ~(near & in_s[:, None]).any(axis=0)
    ud = u[dom]
    dichotomy = bool(np.array_equal(ud == 1.0, all_s) and np.array_equal(ud == 0.0, all_c))
    radius = min(lip_radius, 3 * graph.scale)
    lip = lip_field(space, u, radius)
    region = localized_region(graph, S, space)
    mask = np.zeros(len(space), dtype=bool)
    mask[dom] = True
    outside = np.flatnonzero(mask & (lip > 0) & ~region)
    d = space.dist
    vacuous = not bool(((d <= radius) & (d > 0)).any())
    return CutFunctionReport(
        u_source=float(u[graph.source]),
        u_sink=float(u[graph.sink]),
        in_unit_interval=bool(((u >= 0) & (u <= 1)).all()),
        dichotomy_ok=dichotomy,
        lip_radius=float(radius),
        localized_ok=len(outside) == 0,
        vacuous=vacuous,
        outside=tuple(int(y) for y in outside),
    )
