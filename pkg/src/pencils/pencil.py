"""Pencils of curves from flows: cycle cancellation, path stripping, and the
length filter that keeps the short ("good") half of the curves."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DecompositionError, InvalidInputError, NotAcyclicError, RetainedMassError
from .flow import Flow, flow_norm
from .space import Space, two_pole_weight

_LENGTH_TOL = 1e-12


class Curve(NamedTuple):
    path: tuple
    weight: Fraction
    length: float


class Cycle(NamedTuple):
    path: tuple  # v0, ..., vk; the closing arc vk -> v0 is implied
    weight: Fraction


@dataclass(frozen=True, eq=False)
class Pencil:
    curves: tuple
    source: int
    sink: int
    normalized: bool = False

    @property
    def total_weight(self) -> Fraction:
        return sum((c.weight for c in self.curves), Fraction(0))

    def normalize(self) -> "Pencil":
        total = self.total_weight
        if total == 0:
            raise InvalidInputError("cannot normalise an empty pencil")
        curves = tuple(c._replace(weight=c.weight / total) for c in self.curves)
        return Pencil(curves, self.source, self.sink, True)

    @property
    def mean_length(self) -> float:
        total = self.total_weight
        if total == 0:
            return 0.0
        return sum(float(c.weight) * c.length for c in self.curves) / float(total)

    @property
    def max_length(self) -> float:
        return max((c.length for c in self.curves), default=0.0)


def _positive_arcs(values: dict) -> dict:
    out = {}
    for (i, j), v in values.items():
        if v > 0:
            out.setdefault(i, []).append(j)
        elif v < 0:
            out.setdefault(j, []).append(i)
    return {x: sorted(ys) for x, ys in out.items()}


def _get(values, x, y) -> Fraction:
    if x < y:
        return values.get((x, y), Fraction(0))
    return -values.get((y, x), Fraction(0))


def _push(values, x, y, delta) -> None:
    if x < y:
        values[(x, y)] = values.get((x, y), Fraction(0)) + delta
    else:
        values[(y, x)] = values.get((y, x), Fraction(0)) - delta


def find_cycle(values: dict) -> Optional[tuple]:
    """First directed cycle in the positive support, or None.

    Depth-first search from vertices in ascending order, arcs in ascending
    target order.
    """
    arcs = _positive_arcs(values)
    color = {}
    for root in sorted(arcs):
        if color.get(root):
            continue
        color[root] = 1
        stack = [(root, iter(arcs.get(root, ())))]
        trail = [root]
        while stack:
            x, it = stack[-1]
            y = next(it, None)
            if y is None:
                color[x] = 2
                stack.pop()
                trail.pop()
                continue
            c = color.get(y, 0)
            if c == 1:
                return tuple(trail[trail.index(y):])
            if c == 0:
                color[y] = 1
                stack.append((y, iter(arcs.get(y, ()))))
                trail.append(y)
    return None


def acyclic_reduce(flow: Flow):
    """Cancel directed cycles of positive flow until none is left.

    Returns the reduced flow and the removed cycles. Each cycle is subtracted
    along the flow direction, so per edge ``|f'| + sum of cycle weights = |f|``
    and the boundary is unchanged.
    """
    values = {e: v for e, v in flow.values.items()}
    cycles = []
    while True:
        cyc = find_cycle(values)
        if cyc is None:
            break
        arcs = list(zip(cyc, cyc[1:] + cyc[:1]))
        w = min(_get(values, x, y) for x, y in arcs)
        for x, y in arcs:
            _push(values, x, y, -w)
        cycles.append(Cycle(cyc, w))
    return Flow(flow.graph, values), cycles


def decompose(flow: Flow, space: Space) -> Pencil:
    """Strip an acyclic flow into weighted s-t arcs.

    From s, repeatedly follow the positive-flow arc with the smallest target id
    until t, give the path the bottleneck weight, and subtract it. Every round
    zeroes at least one edge.
    """
    g = flow.graph
    s, t = g.source, g.sink
    if find_cycle(dict(flow.values)) is not None:
        raise NotAcyclicError("flow has a directed cycle; run acyclic_reduce first")
    if flow_norm(flow) < 0:
        raise InvalidInputError("flow runs from sink to source")
    values = {e: v for e, v in flow.values.items() if v != 0}
    curves = []
    while True:
        arcs = _positive_arcs(values)
        if s not in arcs:
            break
        path = [s]
        seen = {s}
        x = s
        while x != t:
            nxt = arcs.get(x)
            if not nxt:
                raise DecompositionError(f"path from source got stuck at {x}")
            x = nxt[0]
            if x in seen:
                raise DecompositionError(f"path revisits {x}")
            seen.add(x)
            path.append(x)
        steps = list(zip(path, path[1:]))
        w = min(_get(values, a, b) for a, b in steps)
        for a, b in steps:
            _push(values, a, b, -w)
        values = {e: v for e, v in values.items() if v != 0}
        length = float(sum(space.dist[a, b] for a, b in steps))
        curves.append(Curve(tuple(path), w, length))
    if values:
        raise DecompositionError(f"nonzero residual on {len(values)} edges after stripping")
    return Pencil(tuple(curves), s, t, False)


def reconstruct(curves, cycles=()) -> dict:
    """Signed per-edge sum of curve and cycle weights on canonical orientations."""
    values = {}
    for c in curves:
        for a, b in zip(c.path, c.path[1:]):
            _push(values, a, b, c.weight)
    for cy in cycles:
        p = cy.path
        for a, b in zip(p, p[1:] + p[:1]):
            _push(values, a, b, cy.weight)
    return {e: v for e, v in values.items() if v != 0}


def is_arc(curve: Curve, source, sink) -> bool:
    p = curve.path
    return len(p) >= 2 and p[0] == source and p[-1] == sink and len(set(p)) == len(p)


def markov_c0(pencil: Pencil, space: Space, multiplier: float = 2.0) -> float:
    """Length cap ``multiplier * mean length`` expressed in units of d(s, t)."""
    return multiplier * pencil.mean_length / float(space.dist[pencil.source, pencil.sink])


def retained_fraction(pencil: Pencil, space: Space, c0: float) -> Fraction:
    total = pencil.total_weight
    if total == 0:
        return Fraction(0)
    cap = c0 * space.dist[pencil.source, pencil.sink] * (1 + _LENGTH_TOL)
    return sum((c.weight for c in pencil.curves if c.length <= cap), Fraction(0)) / total


def good_half(pencil: Pencil, space: Space, c0: float) -> Pencil:
    """Keep curves of length <= c0 d(s, t) and renormalise to total weight 1.

    Raises :class:`RetainedMassError` if less than half of the weight survives;
    the error carries the smallest c0 that would keep half.
    """
    dst = float(space.dist[pencil.source, pencil.sink])
    frac = retained_fraction(pencil, space, c0)
    if frac < Fraction(1, 2):
        total = pencil.total_weight
        acc = Fraction(0)
        min_c0 = float("inf")
        for c in sorted(pencil.curves, key=lambda c: c.length):
            acc += c.weight
            if total and acc / total >= Fraction(1, 2):
                min_c0 = c.length / dst
                break
        raise RetainedMassError(
            f"length cap {c0:g} d(s,t) keeps only {float(frac):.3f} of the curve mass; "
            f"need c0 >= {min_c0:.6g}",
            retained=frac,
            min_c0=min_c0,
        )
    cap = c0 * dst * (1 + _LENGTH_TOL)
    kept = Pencil(tuple(c for c in pencil.curves if c.length <= cap), pencil.source, pencil.sink)
    return kept.normalize()


class PencilCheck(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


def verify_pc_inequality(pencil: Pencil, space: Space, g, c0: float) -> PencilCheck:
    """Averaged line integrals of g against the two-pole integral of g.

    ``lhs = sum_curves weight * sum_edges length * (g(x) + g(y))/2`` and
    ``rhs = sum over y in B(s, c0 d(s, t)), y not in {s, t}, of
    mu(y) g(y) [1/theta(s, d(s, y)) + 1/theta(t, d(t, y))]``.
    The ratio is the empirical constant for this g (0 when both sides vanish).
    """
    if not pencil.normalized:
        raise InvalidInputError("pencil must be normalised")
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise InvalidInputError("g must be nonnegative")
    s, t = pencil.source, pencil.sink
    lhs = 0.0
    for c in pencil.curves:
        p = np.asarray(c.path, dtype=int)
        seg = space.dist[p[:-1], p[1:]] * 0.5 * (g[p[:-1]] + g[p[1:]])
        lhs += float(c.weight) * float(seg.sum())
    inside = space.dist[s] < c0 * space.dist[s, t]
    rhs = float((space.weights * g * two_pole_weight(space, s, t))[inside].sum())
    if rhs == 0:
        ratio = 0.0 if lhs == 0 else float("inf")
    else:
        ratio = lhs / rhs
    return PencilCheck(lhs, rhs, ratio)
