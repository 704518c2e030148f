import itertools
from fractions import Fraction

import numpy as np
import pytest
from conftest import random_flow_with_cycles
from hypothesis import given
from hypothesis import strategies as st

from pencils.current import build_current
from pencils.exceptions import InvalidInputError, NotAcyclicError, RetainedMassError
from pencils.flow import Flow, flow_norm, max_flow, validate_flow, zero_flow
from pencils.generators import grid2d, line
from pencils.netgraph import NetGraph, build_graph
from pencils.pencil import (
    Curve,
    Pencil,
    acyclic_reduce,
    decompose,
    find_cycle,
    good_half,
    is_arc,
    markov_c0,
    reconstruct,
    retained_fraction,
    verify_pc_inequality,
)
from pencils.space import Space, build_net


def _complete(n):
    caps = {(i, j): 1000 for i, j in itertools.combinations(range(n), 2)}
    return NetGraph.from_capacities(range(n), caps, 0, n - 1)


def _push(vals, a, b, w):
    if a < b:
        vals[(a, b)] = vals.get((a, b), Fraction(0)) + w
    else:
        vals[(b, a)] = vals.get((b, a), Fraction(0)) - w


def _line_space(n):
    return Space.from_points(np.arange(n, dtype=float)[:, None])


def test_triangle_circulation_is_removed():
    g = _complete(5)
    vals = {e: Fraction(0) for e in g.edges}
    for a, b in [(0, 4)]:
        _push(vals, a, b, Fraction(1))
    for a, b in [(1, 2), (2, 3), (3, 1)]:
        _push(vals, a, b, Fraction(3, 10))
    reduced, cycles = acyclic_reduce(Flow(g, vals))
    assert len(cycles) == 1 and cycles[0].weight == Fraction(3, 10)
    assert set(cycles[0].path) == {1, 2, 3}
    assert reduced(0, 4) == 1
    assert all(v == 0 for e, v in reduced.values.items() if e != (0, 4))


def test_grid_max_flow_has_no_cycles():
    sp = grid2d(8)
    d = sp.dist[0, 63]
    g = build_graph(build_net(sp, 0, 63, d / 8, 4 * d), sp)
    _, cycles = acyclic_reduce(max_flow(g))
    assert cycles == []


def test_zero_flow_reduces_to_itself():
    g = _complete(4)
    reduced, cycles = acyclic_reduce(zero_flow(g))
    assert cycles == [] and all(v == 0 for v in reduced.values.values())
    assert decompose(reduced, _line_space(4)).curves == ()


def test_single_path_one_curve():
    g = NetGraph.from_capacities(range(3), {(0, 1): 1, (1, 2): 1}, 0, 2)
    p = decompose(max_flow(g), _line_space(3))
    assert len(p.curves) == 1
    assert p.curves[0].path == (0, 1, 2) and p.curves[0].weight == 1
    assert p.curves[0].length == pytest.approx(2.0)


def test_diamond_half_half():
    g = NetGraph.from_capacities(range(4), {(0, 1): 1, (0, 2): 1, (1, 3): 1, (2, 3): 1}, 0, 3)
    vals = {(0, 1): Fraction(1, 2), (0, 2): Fraction(1, 2), (1, 3): Fraction(1, 2), (2, 3): Fraction(1, 2)}
    p = decompose(Flow(g, vals), _line_space(4))
    assert sorted(c.weight for c in p.curves) == [Fraction(1, 2)] * 2
    assert reconstruct(p.curves) == vals


def test_decompose_rejects_cyclic_flow():
    g = _complete(4)
    vals = {e: Fraction(0) for e in g.edges}
    for a, b in [(0, 1), (1, 2), (2, 0)]:
        _push(vals, a, b, Fraction(1))
    with pytest.raises(NotAcyclicError):
        decompose(Flow(g, vals), _line_space(4))


@given(st.integers(0, 10 ** 9))
def test_exact_reconstruction_and_arcs(seed):
    f = random_flow_with_cycles(seed)
    assert validate_flow(f).ok
    reduced, cycles = acyclic_reduce(f)
    assert find_cycle(dict(reduced.values)) is None
    sp = _line_space(len(f.graph.vertices))
    p = decompose(reduced, sp)
    original = {e: v for e, v in f.values.items() if v != 0}
    assert reconstruct(p.curves, cycles) == original
    assert all(is_arc(c, 0, f.graph.sink) for c in p.curves)
    assert p.total_weight == flow_norm(f)
    # sign-consistent removal: per edge |f'| + cycle weight through e = |f|
    through = {}
    for cy in cycles:
        for a, b in zip(cy.path, cy.path[1:] + cy.path[:1]):
            e = (min(a, b), max(a, b))
            through[e] = through.get(e, Fraction(0)) + cy.weight
    for e, v in f.values.items():
        assert abs(reduced.values.get(e, 0)) + through.get(e, 0) == abs(v)


@given(st.integers(0, 10 ** 9))
def test_reduced_mass_plus_cycle_mass_is_total(seed):
    f = random_flow_with_cycles(seed)
    sp = _line_space(len(f.graph.vertices))
    reduced, cycles = acyclic_reduce(f)
    cyc_mass = sum(float(c.weight) * sum(sp.dist[a, b] for a, b in zip(c.path, c.path[1:] + c.path[:1]))
                   for c in cycles)
    total = build_current(f, sp).mass
    assert build_current(reduced, sp).mass + cyc_mass == pytest.approx(total, rel=1e-12)


def test_unit_g_gives_mean_length_equal_to_reduced_mass():
    sp = grid2d(8)
    d = sp.dist[0, 63]
    g = build_graph(build_net(sp, 0, 63, d / 8, 4 * d), sp)
    f = max_flow(g)
    reduced, _ = acyclic_reduce(f)
    p = decompose(reduced, sp).normalize()
    chk = verify_pc_inequality(p, sp, np.ones(len(sp)), 4.0)
    assert chk.lhs == pytest.approx(build_current(reduced, sp).mass / float(flow_norm(f)), rel=1e-12)


def test_zero_g_ratio_is_zero():
    p = Pencil((Curve((0, 1), Fraction(1), 1.0),), 0, 1, True)
    chk = verify_pc_inequality(p, line(3), np.zeros(3), 4.0)
    assert chk == (0.0, 0.0, 0.0)


def test_pc_requires_normalised_and_nonnegative():
    p = Pencil((Curve((0, 2), Fraction(2), 1.0),), 0, 2)
    with pytest.raises(InvalidInputError):
        verify_pc_inequality(p, line(3), np.ones(3), 4.0)
    with pytest.raises(InvalidInputError):
        verify_pc_inequality(p.normalize(), line(3), -np.ones(3), 4.0)


# --- good half -------------------------------------------------------------------

def test_inclusive_threshold():
    sp = line(3)
    p = Pencil((Curve((0, 1, 2), Fraction(1), 2.0),), 0, 2, True)
    kept = good_half(p, sp, 2.0)
    assert len(kept.curves) == 1 and kept.total_weight == 1


def test_good_half_renormalises():
    sp = line(3)
    p = Pencil((Curve((0, 2), Fraction(3, 4), 1.0), Curve((0, 1, 2), Fraction(1, 4), 5.0)), 0, 2, True)
    kept = good_half(p, sp, 2.0)
    assert kept.normalized and kept.total_weight == 1 and len(kept.curves) == 1
    assert retained_fraction(p, sp, 2.0) == Fraction(3, 4)


def test_good_half_reports_minimal_c0():
    sp = line(3)
    p = Pencil((Curve((0, 2), Fraction(1, 4), 1.0), Curve((0, 1, 2), Fraction(3, 4), 3.0)), 0, 2, True)
    with pytest.raises(RetainedMassError) as err:
        good_half(p, sp, 2.0)
    assert err.value.min_c0 == pytest.approx(3.0)
    assert err.value.retained == Fraction(1, 4)
    assert len(good_half(p, sp, err.value.min_c0).curves) == 2


@given(st.lists(st.tuples(st.integers(1, 50), st.floats(1.0, 40.0)), min_size=1, max_size=30))
def test_markov_cap_keeps_at_least_half(items):
    sp = line(2)  # d(s, t) = 1
    curves = tuple(Curve((0, 1), Fraction(w), L) for w, L in items)
    p = Pencil(curves, 0, 1).normalize()
    c0 = markov_c0(p, sp, 2.0)
    assert c0 == pytest.approx(2 * p.mean_length)
    long_mass = sum((c.weight for c in p.curves if c.length > c0 * (1 + 1e-12)), Fraction(0))
    assert long_mass < Fraction(1, 2) or long_mass == 0
    good_half(p, sp, c0)
