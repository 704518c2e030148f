"""Discrete 1-currents: signed weightings of geodesic edge segments.

A segment ``x -> y`` with weight w stands for w times the push-forward of the
interval current along a geodesic from x to y. Each undirected edge appears
once, on its canonical orientation, so a current built from a flow has
boundary ``|f| (delta_t - delta_s)`` without the factor 2 that arises when both
orientations are summed.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import InvalidInputError
from .flow import Flow, flow_norm
from .space import Space, ball_measure, lip_field, lipschitz_constant, two_pole_weight

_REL_TOL = 1e-9


class Segment(NamedTuple):
    tail: int
    head: int
    length: float
    weight: Fraction


@dataclass(frozen=True, eq=False)
class DiscreteCurrent:
    segments: tuple
    source: int
    sink: int
    scale: float
    vertices: tuple = ()

    def scaled(self, q) -> "DiscreteCurrent":
        q = Fraction(q)
        return replace(self, segments=tuple(sg._replace(weight=sg.weight * q) for sg in self.segments))

    def __add__(self, other: "DiscreteCurrent") -> "DiscreteCurrent":
        acc = {}
        for sg in self.segments + other.segments:
            key = (sg.tail, sg.head)
            if key in acc:
                acc[key] = acc[key]._replace(weight=acc[key].weight + sg.weight)
            else:
                acc[key] = sg
        segs = tuple(sg for _, sg in sorted(acc.items()) if sg.weight != 0)
        return replace(self, segments=segs)

    def reversed(self) -> "DiscreteCurrent":
        segs = tuple(Segment(sg.head, sg.tail, sg.length, sg.weight) for sg in self.segments)
        return replace(self, segments=segs)

    @property
    def mass(self) -> float:
        """Total mass ``sum |w| * length``."""
        return float(sum(abs(float(sg.weight)) * sg.length for sg in self.segments))


def build_current(flow: Flow, space: Space) -> DiscreteCurrent:
    """One segment per edge carrying nonzero flow, weighted by the flow value."""
    g = flow.graph
    segs = tuple(
        Segment(i, j, float(space.dist[i, j]), flow.values[(i, j)])
        for (i, j) in g.edges
        if flow.values.get((i, j), 0) != 0
    )
    return DiscreteCurrent(segs, g.source, g.sink, g.scale if g.scale is not None else 0.0, g.vertices)


def normalize(current: DiscreteCurrent, norm) -> DiscreteCurrent:
    norm = Fraction(norm)
    if norm == 0:
        raise InvalidInputError("cannot normalise by a zero flow norm")
    return current.scaled(1 / norm)


def boundary(current: DiscreteCurrent) -> dict:
    """Atoms of the boundary 0-current, ``{vertex: signed weight}``; zero atoms dropped."""
    atoms = {}
    for sg in current.segments:
        atoms[sg.head] = atoms.get(sg.head, Fraction(0)) + sg.weight
        atoms[sg.tail] = atoms.get(sg.tail, Fraction(0)) - sg.weight
    return {v: a for v, a in sorted(atoms.items()) if a != 0}


def boundary_variation(atoms: dict) -> Fraction:
    return sum((abs(a) for a in atoms.values()), Fraction(0))


def _arrays(current: DiscreteCurrent):
    tails = np.array([sg.tail for sg in current.segments], dtype=int)
    heads = np.array([sg.head for sg in current.segments], dtype=int)
    lengths = np.array([sg.length for sg in current.segments], dtype=float)
    weights = np.array([abs(float(sg.weight)) for sg in current.segments], dtype=float)
    return tails, heads, lengths, weights


def segment_overlap(space: Space, tails, heads, center: int, r: float) -> np.ndarray:
    """Length of each segment inside the open ball ``B(center, r)``.

    Exact clipping when the space has coordinates. For matrix metrics the
    distance to the centre is interpolated linearly along the segment, which
    can be off by up to the segment length (< 4 r_n for net edges).
    """
    tails = np.asarray(tails, dtype=int)
    heads = np.asarray(heads, dtype=int)
    lengths = space.dist[tails, heads]
    if len(tails) == 0:
        return np.zeros(0)
    if space.coords is not None:
        c = space.coords[center]
        p = space.coords[tails]
        dvec = space.coords[heads] - p
        a = (dvec ** 2).sum(axis=1)
        b = 2 * (dvec * (p - c)).sum(axis=1)
        cc = ((p - c) ** 2).sum(axis=1) - r * r
        disc = b * b - 4 * a * cc
        out = np.zeros(len(tails))
        hit = (disc > 0) & (a > 0)
        root = np.sqrt(np.where(hit, disc, 0.0))
        aa = np.where(hit, a, 1.0)
        lo = np.clip((-b - root) / (2 * aa), 0.0, 1.0)
        hi = np.clip((-b + root) / (2 * aa), 0.0, 1.0)
        out[hit] = ((hi - lo) * np.sqrt(a))[hit]
        return np.clip(out, 0.0, lengths)
    da = space.dist[center, tails]
    db = space.dist[center, heads]
    near, far = np.minimum(da, db), np.maximum(da, db)
    frac = np.where(
        far < r, 1.0,
        np.where(near >= r, 0.0, (r - near) / np.where(far > near, far - near, 1.0)),
    )
    return np.clip(frac, 0.0, 1.0) * lengths


def mass_on_ball(current: DiscreteCurrent, space: Space, center: int, r: float) -> float:
    """``|T|(B(center, r))``: sum of |weight| times the segment length inside the ball."""
    if r <= 0:
        raise InvalidInputError("radius must be positive")
    center = space.check_id(center)
    if not current.segments:
        return 0.0
    tails, heads, _, weights = _arrays(current)
    return float((weights * segment_overlap(space, tails, heads, center, r)).sum())


@dataclass(frozen=True)
class DensityReport:
    ratios: dict  # vertex -> w(y) / bound(y)
    max_ratio: float
    argmax: Optional[int]
    flagged: tuple  # vertices whose ratio exceeds c0


def density_check(current: DiscreteCurrent, space: Space, c0: float) -> DensityReport:
    """Compare the averaged mass density with the two-pole bound at each net vertex.

    ``w(y) = |T|(B(y, r_n)) / mu(B(y, r_n))`` and
    ``bound(y) = 1/theta(s, d(s, y)) + 1/theta(t, d(t, y))``.
    """
    s, t, r = current.source, current.sink, current.scale
    bound = two_pole_weight(space, s, t)
    ratios = {}
    for y in current.vertices:
        if y in (s, t):
            continue
        w = mass_on_ball(current, space, y, r) / ball_measure(space, y, r)
        ratios[y] = w / bound[y]
    if ratios:
        arg = max(ratios, key=lambda y: (ratios[y], -y))
        mx = ratios[arg]
    else:
        arg, mx = None, 0.0
    flagged = tuple(y for y, q in ratios.items() if q > c0)
    return DensityReport(ratios, float(mx), arg, flagged)


@dataclass(frozen=True)
class SupportReport:
    ok: bool
    max_excess: float  # largest endpoint distance beyond the allowed radius (<= 0 if ok)
    radius: float


def support_check(current: DiscreteCurrent, space: Space, c0: float) -> SupportReport:
    """Every segment endpoint within ``c0 d(s, t) + 5 r_n`` of s."""
    s, t = current.source, current.sink
    radius = c0 * space.dist[s, t] + 5 * current.scale
    ends = {sg.tail for sg in current.segments} | {sg.head for sg in current.segments}
    if not ends:
        return SupportReport(True, -radius, radius)
    excess = max(space.dist[s, x] for x in ends) - radius
    return SupportReport(bool(excess < 0), float(excess), float(radius))


def evaluate(current: DiscreteCurrent, space: Space, f, pi, lip: Optional[float] = None) -> float:
    """``T(f, pi)`` by the midpoint rule on each segment.

    Each segment contributes ``w * (f(x) + f(y))/2 * (pi(y) - pi(x))``. If
    ``lip`` is given, pi must be lip-Lipschitz on the space.
    """
    f = np.asarray(f, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if lip is not None and lipschitz_constant(space, pi) > lip * (1 + _REL_TOL):
        raise InvalidInputError(f"pi is not {lip:g}-Lipschitz")
    total = 0.0
    for sg in current.segments:
        total += float(sg.weight) * 0.5 * (f[sg.tail] + f[sg.head]) * (pi[sg.head] - pi[sg.tail])
    return total


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    passed: bool


def lemma1_check(current: DiscreteCurrent, space: Space, u, lip_radius: float) -> InequalityCheck:
    """``|dT(u)| <= integral of Lip(u) d|T|`` with the Lipschitz proxy max'd over segment ends.

    The inequality is guaranteed when ``lip_radius`` is at least the longest segment.
    """
    u = np.asarray(u, dtype=float)
    atoms = boundary(current)
    lhs = abs(sum(float(a) * u[v] for v, a in atoms.items()))
    if not current.segments:
        return InequalityCheck(lhs, 0.0, lhs <= 0.0)
    lip = lip_field(space, u, lip_radius)
    tails, heads, lengths, weights = _arrays(current)
    rhs = float((weights * lengths * np.maximum(lip[tails], lip[heads])).sum())
    return InequalityCheck(lhs, rhs, bool(lhs <= rhs * (1 + _REL_TOL)))
