"""Discrete weak 1-Poincare checks with the pointwise Lipschitz constant as
upper gradient, and the bridge from cut capacities to the density integral."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .current import InequalityCheck
from .exceptions import InvalidInputError
from .netgraph import NetGraph, cut_capacity, localized_region
from .space import Space, lip_field, random_lipschitz, two_pole_weight


class PIRatio(NamedTuple):
    lhs: float
    rhs: float


def pi_ratio(space: Space, u, center: int, r: float, lam: float = 1.0, lip_radius: float = None) -> PIRatio:
    """Mean oscillation of u on ``B(center, r)`` against ``2r`` times the mean Lip on the dilated ball."""
    center = space.check_id(center)
    if r <= 0:
        raise InvalidInputError("radius must be positive")
    if lam < 1:
        raise InvalidInputError("dilation must be >= 1")
    if lip_radius is None:
        lip_radius = 2 * space.resolution
    u = np.asarray(u, dtype=float)
    row = space.dist[center]
    inner = row < r
    outer = row < lam * r
    if not inner.any():
        raise InvalidInputError("empty ball")
    w = space.weights
    mb = w[inner].sum()
    mean = (w[inner] * u[inner]).sum() / mb
    lhs = float((w[inner] * np.abs(u[inner] - mean)).sum() / mb)
    lip = lip_field(space, u, lip_radius)
    rhs = float(2 * r * (w[outer] * lip[outer]).sum() / w[outer].sum())
    return PIRatio(lhs, rhs)


def pointwise_pi_check(space: Space, u, s: int, t: int, c0: float, lip_radius: float) -> InequalityCheck:
    """``|u(t) - u(s)| <= c0 * sum mu(y) Lip(u, y) [1/theta(s, d(s,y)) + 1/theta(t, d(t,y))]``.

    The sum runs over the domain ball ``B(s, c0 d(s, t))`` minus {s, t}.
    """
    s, t = space.check_id(s), space.check_id(t)
    if s == t:
        raise InvalidInputError("s and t must differ")
    u = np.asarray(u, dtype=float)
    lhs = abs(float(u[t] - u[s]))
    lip = lip_field(space, u, lip_radius)
    inside = space.dist[s] < c0 * space.dist[s, t]
    rhs = float((space.weights * lip * two_pole_weight(space, s, t))[inside].sum())
    return InequalityCheck(lhs, rhs, bool(lhs <= c0 * rhs))


class CutBridge(NamedTuple):
    cut_capacity: float
    localized_integral: float
    ratio: float


def cut_pi_bridge(space: Space, graph: NetGraph, S) -> CutBridge:
    """Cut capacity against ``(1/r_n) * integral over the 5 r_n-neighbourhood of Bd(S)``
    of the two-pole density ``1/theta(s, .) + 1/theta(t, .)``."""
    cap = float(cut_capacity(graph, S))
    region = localized_region(graph, S, space)
    weight = two_pole_weight(space, graph.source, graph.sink)
    integral = float((space.weights * weight)[region].sum() / graph.scale)
    if integral == 0:
        ratio = math.nan if cap == 0 else math.inf
    else:
        ratio = cap / integral
    return CutBridge(cap, integral, ratio)


@dataclass
class BallRecord:
    center: int
    radius: float
    lhs: float
    rhs: float
    ratio: float
    oscillation_bound: float = math.inf  # 2r times the global Lipschitz constant of u


@dataclass
class PIReport:
    lam: float
    lip_radius: float
    records: list = field(default_factory=list)
    scale: float = None
    generator: str = None

    @property
    def worst_ratio(self) -> float:
        finite = [r.ratio for r in self.records if not math.isnan(r.ratio)]
        return max(finite, default=0.0)

    @property
    def flagged(self) -> list:
        """Balls with positive oscillation but zero gradient term."""
        return [r for r in self.records if r.rhs == 0 and r.lhs > 0]

    @property
    def oscillation_violations(self) -> list:
        return [r for r in self.records if r.lhs > r.oscillation_bound * (1 + 1e-9)]


def _ratio(lhs, rhs) -> float:
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.nan


def pi_survey(space: Space, num_tests: int, rng: np.random.Generator, lam: float = 1.0,
              lip_radius: float = None) -> PIReport:
    """Evaluate the Poincare ratio for random Lipschitz functions on random balls."""
    if lip_radius is None:
        lip_radius = 2 * space.resolution
    report = PIReport(lam=lam, lip_radius=lip_radius)
    diam = max(space.diameter, space.resolution)
    for _ in range(num_tests):
        u, L = random_lipschitz(space, rng)
        center = int(rng.integers(len(space)))
        r = float(rng.uniform(space.resolution, diam)) if diam > space.resolution else diam
        lhs, rhs = pi_ratio(space, u, center, r, lam, lip_radius)
        report.records.append(BallRecord(center, r, lhs, rhs, _ratio(lhs, rhs), 2 * r * L))
    return report
