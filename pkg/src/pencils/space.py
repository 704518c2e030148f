"""Finite metric measure spaces and the elementary operations on them.

Points are identified by their integer index ``0 .. n-1``. Balls are open.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .exceptions import InvalidInputError

# Triangle inequality is checked on every triple up to this many points and on
# a random sample of triples above it.
EXHAUSTIVE_TRIANGLE_LIMIT = 200
_TRIANGLE_SAMPLES = 200_000
_METRIC_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Space:
    """A finite metric measure space ``(X, d, mu)``.

    Parameters
    ----------
    dist : (n, n) array
        Symmetric distance matrix with zero diagonal.
    weights : (n,) array
        Strictly positive point masses ``mu({x})``.
    coords : (n, k) array, optional
        Point coordinates. Present exactly when ``metric == "euclidean"``.
    metric : {"euclidean", "matrix"}
    """

    dist: np.ndarray
    weights: np.ndarray
    coords: Optional[np.ndarray] = None
    metric: str = "matrix"
    _resolution: float = field(default=0.0, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "dist", _readonly(self.dist))
        object.__setattr__(self, "weights", _readonly(self.weights))
        if self.coords is not None:
            object.__setattr__(self, "coords", _readonly(self.coords))
        _validate(self)
        n = len(self)
        if n > 1:
            off = self.dist + np.diag(np.full(n, np.inf))
            res = float(off.min(axis=1).max())
        else:
            res = 0.0
        object.__setattr__(self, "_resolution", res)

    @classmethod
    def from_points(cls, points, weights=None) -> "Space":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise InvalidInputError("points must be a non-empty (n, k) array")
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=-1))
        w = np.ones(len(pts)) if weights is None else weights
        return cls(dist=dist, weights=w, coords=pts, metric="euclidean")

    @classmethod
    def from_matrix(cls, dist, weights=None) -> "Space":
        d = np.asarray(dist, dtype=float)
        w = np.ones(len(d)) if weights is None else weights
        return cls(dist=d, weights=w, coords=None, metric="matrix")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def resolution(self) -> float:
        """Largest nearest-neighbour distance; every point has a neighbour this close."""
        return self._resolution

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def check_id(self, x: int) -> int:
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
            raise InvalidInputError(f"point id must be an integer, got {x!r}")
        if not 0 <= x < len(self):
            raise InvalidInputError(f"unknown point id {x}")
        return int(x)

    def measure(self, ids) -> float:
        """mu of a set of point ids."""
        return float(self.weights[np.asarray(list(ids), dtype=int)].sum()) if len(ids) else 0.0


def _validate(space: Space) -> None:
    d, w = space.dist, space.weights
    n = len(w)
    if w.ndim != 1 or n == 0:
        raise InvalidInputError("weights must be a non-empty 1-d array")
    if d.shape != (n, n):
        raise InvalidInputError(f"distance matrix shape {d.shape} does not match {n} weights")
    if not np.all(np.isfinite(d)) or not np.all(np.isfinite(w)):
        raise InvalidInputError("distances and weights must be finite")
    if np.any(w <= 0):
        raise InvalidInputError("weights must be strictly positive")
    if space.metric not in ("euclidean", "matrix"):
        raise InvalidInputError(f"unknown metric {space.metric!r}")
    if space.metric == "euclidean" and space.coords is None:
        raise InvalidInputError("euclidean metric requires coordinates")
    if np.any(np.diag(d) != 0):
        raise InvalidInputError("distance must vanish on the diagonal")
    if not np.array_equal(d, d.T):
        raise InvalidInputError("distance matrix is not symmetric")
    off = d[~np.eye(n, dtype=bool)]
    if np.any(off <= 0):
        raise InvalidInputError("distinct points must be at positive distance")
    scale = _METRIC_TOL * max(1.0, float(d.max()))
    if n <= EXHAUSTIVE_TRIANGLE_LIMIT:
        for z in range(n):
            if np.any(d > d[:, z][:, None] + d[z, :][None, :] + scale):
                raise InvalidInputError("triangle inequality violated")
    else:
        rng = np.random.default_rng(0)
        i, j, k = rng.integers(0, n, size=(3, _TRIANGLE_SAMPLES))
        if np.any(d[i, j] > d[i, k] + d[k, j] + scale):
            raise InvalidInputError("triangle inequality violated")


def metric_closure(space: Space, k: int = 8) -> Space:
    """Replace the metric by shortest-path distances over the k-nearest-neighbour graph.

    Approximates a geodesic metric on the same point set. The result is a
    matrix-metric space with the original weights.
    """
    n = len(space)
    if k < 1:
        raise InvalidInputError("k must be positive")
    k = min(k, n - 1)
    order = np.argsort(space.dist, axis=1, kind="stable")[:, 1:k + 1]
    rows = np.repeat(np.arange(n), k)
    cols = order.ravel()
    vals = space.dist[rows, cols]
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    closed = shortest_path(graph, directed=False)
    if not np.all(np.isfinite(closed)):
        raise InvalidInputError(f"{k}-NN graph is disconnected; increase k")
    closed = np.minimum(closed, closed.T)
    np.fill_diagonal(closed, 0.0)
    return Space.from_matrix(closed, space.weights)


def ball(space: Space, center: int, r: float) -> np.ndarray:
    """Sorted ids of the open ball ``B(center, r)``."""
    c = space.check_id(center)
    if r <= 0:
        raise InvalidInputError("radius must be positive")
    return np.flatnonzero(space.dist[c] < r)


def ball_measure(space: Space, center: int, r: float) -> float:
    c = space.check_id(center)
    return float(space.weights[space.dist[c] < r].sum())


def theta(space: Space, center: int, r: float) -> float:
    """One-dimensional density ``mu(B(center, r)) / r``."""
    if r <= 0:
        raise InvalidInputError("theta needs r > 0")
    return ball_measure(space, center, r) / r


def density_profile(space: Space, center: int) -> np.ndarray:
    """``theta(center, d(center, y))`` for every point y (``inf`` at y = center).

    Vectorised form of :func:`theta` evaluated at every distance from the centre,
    as it appears in the two-pole density bounds.
    """
    c = space.check_id(center)
    row = space.dist[c]
    order = np.argsort(row, kind="stable")
    sorted_d = row[order]
    cum = np.concatenate([[0.0], np.cumsum(space.weights[order])])
    # mass of the open ball of radius d(c, y): all points strictly closer
    below = np.searchsorted(sorted_d, row, side="left")
    mass = cum[below]
    out = np.full(len(space), np.inf)
    pos = row > 0
    out[pos] = mass[pos] / row[pos]
    return out


def two_pole_weight(space: Space, s: int, t: int) -> np.ndarray:
    """``1/theta(s, d(s, y)) + 1/theta(t, d(t, y))`` per point, zero at s and t."""
    ws = 1.0 / density_profile(space, s)
    wt = 1.0 / density_profile(space, t)
    out = ws + wt
    out[[s, t]] = 0.0
    return out


@dataclass(frozen=True)
class Net:
    """An r-net of the domain ball ``B(s, domain_radius)`` containing s and t."""

    scale: float
    vertices: tuple
    source: int
    sink: int
    domain_radius: float

    def __contains__(self, x) -> bool:
        return x in self._vertex_set

    @property
    def _vertex_set(self) -> frozenset:
        return frozenset(self.vertices)


def domain(space: Space, s: int, radius: float) -> np.ndarray:
    return ball(space, s, radius)


def build_net(space: Space, s: int, t: int, r_n: float, domain_radius: float) -> Net:
    """Greedy maximal ``r_n``-separated subset of ``B(s, domain_radius)`` containing s and t.

    Candidates are tried in the order s, t, then ascending id; a candidate is
    accepted iff it is at distance >= r_n from every accepted point.
    """
    s, t = space.check_id(s), space.check_id(t)
    if s == t:
        raise InvalidInputError("source and sink must differ")
    dst = space.dist[s, t]
    if r_n <= 0:
        raise InvalidInputError("net scale must be positive")
    if r_n >= dst:
        raise InvalidInputError(
            f"net scale {r_n:g} must be below d(s, t) = {dst:g}; the net could not hold both endpoints"
        )
    if domain_radius <= 0:
        raise InvalidInputError("domain radius must be positive")
    candidates = [s, t] + [int(x) for x in domain(space, s, domain_radius) if x != s and x != t]
    accepted = []
    min_d = np.full(len(space), np.inf)
    for x in candidates:
        if min_d[x] >= r_n:
            accepted.append(x)
            min_d = np.minimum(min_d, space.dist[x])
    return Net(
        scale=float(r_n),
        vertices=tuple(sorted(accepted)),
        source=s,
        sink=t,
        domain_radius=float(domain_radius),
    )


def check_net(space: Space, net: Net) -> list:
    """Return a list of violated net properties (empty if the net is valid)."""
    problems = []
    v = np.asarray(net.vertices, dtype=int)
    sub = space.dist[np.ix_(v, v)]
    off = sub[~np.eye(len(v), dtype=bool)]
    if off.size and off.min() < net.scale:
        problems.append("separation")
    dom = domain(space, net.source, net.domain_radius)
    if np.any(space.dist[np.ix_(dom, v)].min(axis=1) >= net.scale):
        problems.append("maximality")
    if net.source not in net or net.sink not in net:
        problems.append("endpoints")
    outside = set(net.vertices) - set(dom.tolist()) - {net.sink}
    if outside:
        problems.append("domain")
    return problems


def pointwise_lip(space: Space, u, x: int, radius: float) -> float:
    """Max difference quotient of u at x over points within ``radius`` (closed).

    Finite-resolution stand-in for the upper pointwise Lipschitz constant.
    """
    x = space.check_id(x)
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    u = np.asarray(u, dtype=float)
    row = space.dist[x]
    near = (row <= radius) & (row > 0)
    if not near.any():
        return 0.0
    return float((np.abs(u[near] - u[x]) / row[near]).max())


def lip_field(space: Space, u, radius: float) -> np.ndarray:
    """:func:`pointwise_lip` at every point at once."""
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    u = np.asarray(u, dtype=float)
    d = space.dist
    near = (d <= radius) & (d > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(near, np.abs(u[:, None] - u[None, :]) / np.where(near, d, 1.0), 0.0)
    return q.max(axis=1)


def lipschitz_constant(space: Space, u, ids: Optional[Sequence[int]] = None) -> float:
    """Global Lipschitz constant of u on ``ids`` (all points by default)."""
    u = np.asarray(u, dtype=float)
    idx = np.arange(len(space)) if ids is None else np.asarray(list(ids), dtype=int)
    if len(idx) < 2:
        return 0.0
    d = space.dist[np.ix_(idx, idx)]
    diff = np.abs(u[idx][:, None] - u[idx][None, :])
    off = ~np.eye(len(idx), dtype=bool)
    return float((diff[off] / d[off]).max())


def mcshane_extend(space: Space, values: Mapping[int, float], L: float) -> np.ndarray:
    """Extend an L-Lipschitz partial function to the whole space.

    ``u(x) = min_y values[y] + L d(x, y)``.
    """
    if not values:
        raise InvalidInputError("need at least one assigned value")
    if L < 0:
        raise InvalidInputError("Lipschitz constant must be nonnegative")
    ids = np.array([space.check_id(k) for k in values], dtype=int)
    vals = np.array([float(values[k]) for k in values])
    d = space.dist[np.ix_(ids, ids)]
    slack = L * d * (1 + 1e-12) + 1e-12 - np.abs(vals[:, None] - vals[None, :])
    if np.any(slack < 0):
        raise InvalidInputError(f"assigned values are not {L:g}-Lipschitz")
    u = (vals[None, :] + L * space.dist[:, ids]).min(axis=1)
    u[ids] = vals
    return u


def random_lipschitz(space: Space, rng: np.random.Generator, anchors: int = 6):
    """Random Lipschitz function: uniform values on a few random anchors, McShane-extended.

    Returns ``(u, L)`` with L the Lipschitz constant of the anchor data.
    """
    n = len(space)
    k = min(anchors, n)
    ids = rng.choice(n, size=k, replace=False)
    vals = rng.uniform(-1.0, 1.0, size=k)
    full = np.zeros(n)
    full[ids] = vals
    L = lipschitz_constant(space, full, ids)
    return mcshane_extend(space, dict(zip(ids.tolist(), vals.tolist())), L), L
