"""Built-in test spaces.

``dumbbell`` is the Poincare-failure family: two grids joined by a thin chain
whose point masses set the neck width.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .exceptions import InvalidInputError
from .space import Space


def line(k: int) -> Space:
    """k evenly spaced points on [0, 1], unit weights."""
    k = _count(k, 2)
    return Space.from_points(np.linspace(0.0, 1.0, k)[:, None])


def grid2d(k: int) -> Space:
    """k x k grid on [0, 1]^2 with spacing 1/(k-1); id = row * k + col."""
    k = _count(k, 2)
    xs = np.linspace(0.0, 1.0, k)
    pts = np.array([(x, y) for y in xs for x in xs])
    return Space.from_points(pts)


def circle(k: int) -> Space:
    """k equally spaced points on the unit circle, chordal metric."""
    k = _count(k, 3)
    ang = 2 * np.pi * np.arange(k) / k
    return Space.from_points(np.column_stack([np.cos(ang), np.sin(ang)]))


def dumbbell(k: int, neck_width: float, neck_points: int) -> Space:
    """Two k x k unit grids joined by a horizontal chain of ``neck_points`` points.

    The chain runs at height 1/2 with the grid spacing h = 1/(k-1); each chain
    point has mass ``neck_width``. Ids: left grid, chain (left to right),
    right grid; the last id is the far corner of the right grid.
    """
    k = _count(k, 2)
    m = int(neck_points)
    if m < 1:
        raise InvalidInputError("dumbbell needs at least one neck point")
    if not neck_width > 0:
        raise InvalidInputError("neck width must be positive")
    h = 1.0 / (k - 1)
    xs = np.linspace(0.0, 1.0, k)
    left = [(x, y) for y in xs for x in xs]
    neck = [(1.0 + h * (i + 1), 0.5) for i in range(m)]
    shift = 1.0 + h * (m + 1)
    right = [(x + shift, y) for y in xs for x in xs]
    pts = np.array(left + neck + right)
    w = np.ones(len(pts))
    w[len(left):len(left) + m] = neck_width
    return Space.from_points(pts, w)


def theta_graph(k: int) -> Space:
    """Two poles joined by three branches of lengths 1, 1.5 and 2, each with k
    interior points; intrinsic shortest-path metric, unit weights.

    Id 0 is one pole, the last id the other.
    """
    k = _count(k, 1)
    lengths = (1.0, 1.5, 2.0)
    n = 2 + 3 * k
    a, b = 0, n - 1
    rows, cols, vals = [], [], []
    nxt = 1
    for L in lengths:
        step = L / (k + 1)
        prev = a
        for _ in range(k):
            rows.append(prev)
            cols.append(nxt)
            vals.append(step)
            prev = nxt
            nxt += 1
        rows.append(prev)
        cols.append(b)
        vals.append(step)
    g = csr_matrix((vals, (rows, cols)), shape=(n, n))
    d = shortest_path(g, directed=False)
    # path sums can differ in the last bit between directions
    d = np.minimum(d, d.T)
    return Space.from_matrix(d)


def _int(p) -> int:
    x = float(p)
    if not x.is_integer():
        raise ValueError(f"{p!r} is not an integer")
    return int(x)


GENERATORS = {
    "line": (line, (_int,)),
    "grid2d": (grid2d, (_int,)),
    "circle": (circle, (_int,)),
    "dumbbell": (dumbbell, (_int, float, _int)),
    "theta_graph": (theta_graph, (_int,)),
}


def _count(k, least) -> int:
    if isinstance(k, float) and not k.is_integer():
        raise InvalidInputError(f"point count must be an integer, got {k}")
    k = int(k)
    if k < least:
        raise InvalidInputError(f"point count must be at least {least}")
    return k


def generate(name: str, *params) -> Space:
    try:
        fn, types = GENERATORS[name]
    except KeyError:
        raise InvalidInputError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    if len(params) != len(types):
        raise InvalidInputError(f"{name} takes {len(types)} parameter(s), got {len(params)}")
    try:
        args = [tp(p) for tp, p in zip(types, params)]
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad parameters for {name}: {exc}") from None
    return fn(*args)


def parse_generator(spec: str):
    """Parse ``"gen:name:p1,p2"`` (or ``"name:p1,p2"``) into ``(name, params)``."""
    body = spec[4:] if spec.startswith("gen:") else spec
    name, _, rest = body.partition(":")
    params = [p for p in rest.split(",") if p] if rest else []
    return name, params
