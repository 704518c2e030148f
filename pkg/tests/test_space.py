import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pencils.exceptions import InvalidInputError
from pencils.generators import grid2d, line
from pencils.space import (
    Space,
    ball,
    ball_measure,
    build_net,
    check_net,
    density_profile,
    lip_field,
    lipschitz_constant,
    mcshane_extend,
    metric_closure,
    pointwise_lip,
    random_lipschitz,
    theta,
    two_pole_weight,
)

points_2d = st.lists(
    st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=2, max_size=25, unique=True
).map(lambda pts: np.array(pts, dtype=float) / 4)


# --- construction and validation -------------------------------------------------

def test_rejects_asymmetric_matrix():
    with pytest.raises(InvalidInputError, match="symmetric"):
        Space.from_matrix([[0, 1], [2, 0]])


def test_rejects_triangle_violation():
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(InvalidInputError, match="triangle"):
        Space.from_matrix(d)


@pytest.mark.parametrize("w", [[1, 0], [1, -2], [1, float("nan")]])
def test_rejects_bad_weights(w):
    with pytest.raises(InvalidInputError):
        Space.from_matrix([[0, 1], [1, 0]], w)


def test_rejects_duplicate_points():
    with pytest.raises(InvalidInputError, match="positive distance"):
        Space.from_points([[0.0], [0.0]])


def test_arrays_are_read_only(line5):
    with pytest.raises(ValueError):
        line5.dist[0, 1] = 3.0


def test_check_id_rejects_out_of_range_and_non_ints(line5):
    for bad in (-1, 5, 1.0, True):
        with pytest.raises(InvalidInputError):
            line5.check_id(bad)


def test_resolution_is_largest_nearest_neighbour_gap():
    sp = Space.from_points([[0.0], [0.1], [1.0]])
    assert sp.resolution == pytest.approx(0.9)


def test_metric_closure_of_chain_is_path_length():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    closed = metric_closure(Space.from_points(pts), k=1)
    assert closed.dist[0, 2] == pytest.approx(2.0)
    assert closed.metric == "matrix"


# --- balls and theta ----------------------------------------------------------

def test_balls_are_open(line5):
    assert ball(line5, 0, 0.25).tolist() == [0]
    assert ball(line5, 0, 0.2500001).tolist() == [0, 1]


def test_theta_example_line(line5):
    # two unit weights (0 and 0.25) inside radius 0.3
    assert theta(line5, 0, 0.3) == pytest.approx(2 / 0.3)


def test_theta_single_point():
    sp = Space.from_matrix([[0.0]], [2.5])
    assert theta(sp, 0, 1.7) == pytest.approx(2.5 / 1.7)


def test_theta_small_radius_sees_only_centre():
    sp = Space.from_points([[0.0], [1.0], [3.0]], [0.7, 1, 1])
    assert theta(sp, 0, 0.5) == pytest.approx(0.7 / 0.5)


@given(points_2d, st.integers(0, 1000), st.floats(0.05, 10), st.floats(0.01, 5))
def test_theta_monotone_in_weight(pts, seed, r, extra):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 2, len(pts))
    heavier = w.copy()
    heavier[rng.integers(len(pts))] += extra
    a, b = Space.from_points(pts, w), Space.from_points(pts, heavier)
    c = int(rng.integers(len(pts)))
    assert theta(b, c, r) >= theta(a, c, r)


@given(points_2d, st.integers(0, 1000))
def test_density_profile_matches_theta(pts, seed):
    sp = Space.from_points(pts, np.random.default_rng(seed).uniform(0.5, 2, len(pts)))
    prof = density_profile(sp, 0)
    assert np.isinf(prof[0])
    for y in range(1, len(sp)):
        assert prof[y] == pytest.approx(theta(sp, 0, sp.dist[0, y]), rel=1e-12)


def test_two_pole_weight_zero_at_poles(line5):
    w = two_pole_weight(line5, 0, 4)
    assert w[0] == 0 and w[4] == 0
    # y = 0.5: ball B(0, 0.5) holds {0, 0.25} so theta = 4; same from the other end
    assert w[2] == pytest.approx(0.5)


# --- nets --------------------------------------------------------------------

def test_net_example_line(line5):
    net = build_net(line5, 0, 4, 0.3, 10)
    assert net.vertices == (0, 2, 4)
    assert check_net(line5, net) == []


def test_net_small_scale_takes_every_domain_point(line5):
    assert build_net(line5, 0, 4, 0.1, 10).vertices == (0, 1, 2, 3, 4)


def test_net_two_points():
    sp = line(2)
    assert build_net(sp, 0, 1, 0.99, 5).vertices == (0, 1)


@pytest.mark.parametrize("r", [1.0, 2.0, 0.0, -1.0])
def test_net_rejects_inadmissible_scale(line5, r):
    with pytest.raises(InvalidInputError):
        build_net(line5, 0, 4, r, 10)


def test_net_rejects_equal_terminals(line5):
    with pytest.raises(InvalidInputError):
        build_net(line5, 2, 2, 0.1, 10)


def _brute_net_ok(sp, net):
    v = list(net.vertices)
    sep = all(sp.dist[a, b] >= net.scale for a, b in itertools.combinations(v, 2))
    dom = [y for y in range(len(sp)) if sp.dist[net.source, y] < net.domain_radius]
    maximal = all(min(sp.dist[y, x] for x in v) < net.scale for y in dom)
    return sep and maximal and net.source in v and net.sink in v


@given(points_2d, st.floats(0.02, 0.9), st.floats(0.3, 5))
def test_net_separated_and_maximal(pts, frac, dom):
    sp = Space.from_points(pts)
    s, t = 0, len(sp) - 1
    dst = sp.dist[s, t]
    net = build_net(sp, s, t, frac * dst, dom * dst)
    assert _brute_net_ok(sp, net)
    assert check_net(sp, net) == []


def test_check_net_reports_separation_failure(line5):
    from pencils.space import Net
    bad = Net(0.3, (0, 1, 4), 0, 4, 10.0)
    assert "separation" in check_net(line5, bad)


# --- Lipschitz tools -------------------------------------------------------------

def test_pointwise_lip_linear(line5):
    u = np.linspace(0, 1, 5)
    for x in (1, 2, 3):
        assert pointwise_lip(line5, u, x, 0.3) == pytest.approx(1.0)


def test_pointwise_lip_constant_is_zero(line5):
    assert (lip_field(line5, np.full(5, 3.0), 0.3) == 0).all()


def test_pointwise_lip_indicator(line5):
    u = np.array([1.0, 0, 0, 0, 0])
    assert pointwise_lip(line5, u, 0, 0.3) == pytest.approx(4.0)


def test_lip_field_matches_pointwise(line5):
    u = np.array([0.3, -1, 2, 0.5, 0.0])
    field = lip_field(line5, u, 0.6)
    assert field == pytest.approx([pointwise_lip(line5, u, x, 0.6) for x in range(5)])


def test_mcshane_example(line5):
    u = mcshane_extend(line5, {0: 0.0, 4: 1.0}, 1.0)
    assert u[2] == pytest.approx(0.5)


def test_mcshane_identity_on_full_domain(line5):
    vals = {x: 0.1 * x for x in range(5)}
    assert mcshane_extend(line5, vals, 1.0) == pytest.approx([0.1 * x for x in range(5)])


def test_mcshane_zero_constant(line5):
    assert (mcshane_extend(line5, {2: 0.7}, 0.0) == 0.7).all()


def test_mcshane_rejects_non_lipschitz_data(line5):
    with pytest.raises(InvalidInputError):
        mcshane_extend(line5, {0: 0.0, 1: 1.0}, 1.0)


@given(points_2d, st.integers(0, 10_000))
def test_mcshane_output_is_L_lipschitz(pts, seed):
    sp = Space.from_points(pts)
    u, L = random_lipschitz(sp, np.random.default_rng(seed))
    n = len(sp)
    for i, j in itertools.combinations(range(n), 2):
        assert abs(u[i] - u[j]) <= L * sp.dist[i, j] * (1 + 1e-9) + 1e-12
    assert lipschitz_constant(sp, u) <= L * (1 + 1e-9) + 1e-12
    assert (lip_field(sp, u, sp.diameter) <= L + 1e-9).all()


def test_ball_measure_counts_open_ball():
    sp = grid2d(3)
    # centre plus the four axis neighbours at distance 0.5
    assert ball_measure(sp, 4, 0.6) == 5.0
