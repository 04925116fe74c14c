import json
import math

import numpy as np
import pytest

from kleinheat.hyperbolic import Isometry, Point, act, ball_volume, distance_array, origin
from kleinheat.orbits import (
    ORACLE_BUDGET,
    GroupFileError,
    GroupPresentation,
    OrbitEnumerationError,
    bundled_group,
    bundled_group_names,
    critical_exponent_estimate,
    enumerate_orbit,
    load_group,
    orbit_oracle,
    orbital_count,
    orbital_count_oracle,
    orbital_scalar_product,
)
from oracle_support import oracle_word_length, same_point_sets

ALL_GROUPS = bundled_group_names()
O3 = origin(3)


def basepoints(G):
    if G.dimension == 2:
        return origin(2), Point(0.15, 1.3)
    return O3, Point(0.2, -0.1, 1.3)


def test_bundled_groups_present():
    assert {"trivial", "cyclic-1", "parabolic", "schottky-sl2r", "schottky-sl2c"} <= set(ALL_GROUPS)
    with pytest.raises(GroupFileError):
        bundled_group("no-such-group")


def test_generators_are_closed_under_inverse():
    G = bundled_group("cyclic-1")
    assert len(G.generators) == 2
    assert G.inverse_index == [1, 0]
    assert G.is_cyclic
    S = bundled_group("schottky-sl2c")
    assert len(S.generators) == 4
    for i, j in enumerate(S.inverse_index):
        prod = S.generators[i] @ S.generators[j]
        assert prod == Isometry.identity()


def test_identity_generator_is_dropped():
    G = GroupPresentation.from_matrices([np.eye(2)], 3)
    assert G.is_trivial


def test_round_trip_through_json(tmp_path):
    G = bundled_group("schottky-sl2r")
    path = tmp_path / "g.json"
    path.write_text(json.dumps(G.to_json()))
    H = load_group(path)
    assert H.dimension == 2 and len(H.generators) == 4 and H.is_free_hint
    assert np.allclose(H.matrices, G.matrices)


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        "[]",
        '{"dimension": 3}',
        '{"dimension": 4, "generators": []}',
        '{"dimension": 3, "generators": [[[1, 0], [0]]]}',
        '{"dimension": 3, "generators": [[[2, 0], [0, 2]]]}',
        '{"dimension": 2, "generators": [[[[1, 1], 0], [0, [1, -1]]]]}',
        '{"dimension": 3, "generators": [], "pruning_margin": "big"}',
    ],
)
def test_malformed_group_files(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(GroupFileError):
        load_group(path)


def test_determinant_is_renormalized(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"dimension": 3, "generators": [[[1.0000004, 1], [0, 1]]]}))
    G = load_group(path)
    m = G.matrices[0]
    assert abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1) < 1e-14


def test_trivial_group_counts_one():
    G = bundled_group("trivial")
    for rho in (0.0, 1.0, 5.0):
        ball = enumerate_orbit(G, O3, O3, rho)
        assert ball.count == 1 and ball.complete
        assert ball.words == [()]


def test_cyclic_example():
    G = bundled_group("cyclic-1")
    ball = enumerate_orbit(G, O3, O3, 3.5)
    assert ball.count == 7 and ball.complete
    assert np.allclose(ball.distances, [0, 1, 1, 2, 2, 3, 3])
    heights = sorted(p[-1] for p in ball.points)
    assert np.allclose(heights, np.exp(np.arange(-3, 4)))


@pytest.mark.parametrize("name,ell", [("cyclic-0.5", 0.5), ("cyclic-1", 1.0), ("cyclic-2", 2.0)])
def test_cyclic_closed_form(name, ell):
    G = bundled_group(name)
    for rho in np.linspace(0.3, 12.3, 13):
        assert orbital_count(G, O3, O3, rho) == 2 * math.floor(rho / ell) + 1


def test_parabolic_closed_form():
    # d(o, o + n) = 2 asinh(n/2)
    G = bundled_group("parabolic")
    for rho in (0.5, 2.0, 4.0, 7.0):
        nmax = math.floor(2 * math.sinh(rho / 2))
        ball = enumerate_orbit(G, O3, O3, rho)
        assert ball.count == 2 * nmax + 1 and ball.complete


def test_radius_zero_off_orbit():
    G = bundled_group("cyclic-1")
    assert orbital_count(G, O3, Point(0.3, 0.0, 1.0), 0.0) == 0
    assert orbital_count(G, O3, Point(0.0, 0.0, math.e), 0.0) == 1


def test_negative_radius_and_dimension_mismatch():
    G = bundled_group("cyclic-1")
    with pytest.raises(ValueError):
        enumerate_orbit(G, O3, O3, -1.0)
    with pytest.raises(ValueError):
        enumerate_orbit(G, origin(2), origin(2), 1.0)


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_count_is_monotone_in_radius(name):
    G = bundled_group(name)
    x, y = basepoints(G)
    counts = [orbital_count(G, x, y, r) for r in np.linspace(0, 6, 13)]
    assert counts == sorted(counts)


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_within_matches_fresh_enumeration(name):
    G = bundled_group(name)
    x, y = basepoints(G)
    ball = enumerate_orbit(G, x, y, 6.0)
    for r in (1.0, 3.0, 4.5):
        assert ball.within(r) == orbital_count(G, x, y, r)


def oracle_radii(G, x, y, candidates=(2.0, 4.0, 5.0, 8.0)):
    """Candidate radii whose oracle word length fits the 1e7-word budget."""
    k = max(1, len(G.generators))
    return [r for r in candidates if k ** oracle_word_length(G, x, y, r) <= ORACLE_BUDGET]


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_oracle_equivalence(name):
    G = bundled_group(name)
    x, y = basepoints(G)
    radii = oracle_radii(G, x, y)
    assert len(radii) >= 3
    for rho in radii:
        L = oracle_word_length(G, x, y, rho)
        ball = enumerate_orbit(G, x, y, rho)
        ref = orbit_oracle(G, x, y, rho, L)
        assert ball.complete
        assert ball.count == len(ref.distances) == orbital_count_oracle(G, x, y, rho, L)
        assert same_point_sets(ball.points, ref.points)


def test_oracle_budget():
    G = bundled_group("schottky-sl2c")
    with pytest.raises(OrbitEnumerationError):
        orbit_oracle(G, O3, O3, 1.0, 12)


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_points_are_images_of_their_words(name):
    G = bundled_group(name)
    x, y = basepoints(G)
    ball = enumerate_orbit(G, x, y, 5.0)
    for p, dist, w in ball.entries():
        m = np.eye(2, dtype=complex)
        for i in w:
            m = m @ G.matrices[i]
        assert np.allclose(act(m, y.as_array()), p.as_array(), rtol=1e-9, atol=1e-12)
        assert dist == pytest.approx(float(distance_array(p.as_array(), x.as_array())), abs=1e-9)
        assert all(G.inverse_index[a] != b for a, b in zip(w, w[1:]))


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_symmetry(name):
    G = bundled_group(name)
    x, y = basepoints(G)
    for rho in (1.5, 3.0, 5.5):
        assert orbital_count(G, x, y, rho) == orbital_count(G, y, x, rho)


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_gamma_invariance(name):
    G = bundled_group(name)
    if G.is_trivial:
        pytest.skip("no generators")
    x, y = basepoints(G)
    words = [(0,), (1,), (0, 0), (0, 1) if len(G.generators) > 2 else (1, 1)]
    for w in words:
        m = np.eye(2, dtype=complex)
        for i in w:
            m = m @ G.matrices[i]
        gx, gy = Point(*act(m, x.as_array())), Point(*act(m, y.as_array()))
        for rho in (2.0, 5.0):
            assert orbital_count(G, gx, gy, rho) == orbital_count(G, x, y, rho)


def test_pingpong_basepoint_inside_a_half_space():
    # (3, 0, 0.5) lies under the isometric hemisphere centred at 3
    G = bundled_group("schottky-sl2c")
    y = Point(3.0, 0.0, 0.5)
    ball = enumerate_orbit(G, O3, y, 5.0)
    assert ball.complete
    # y is not outside every half-space, so the wall bound does not apply;
    # 10 letters is well past what radius 5 needs with a wall gap near 2.5
    ref = orbit_oracle(G, O3, y, 5.0, 10)
    assert same_point_sets(ball.points, ref.points)
    for p, _, w in ball.entries():
        m = np.eye(2, dtype=complex)
        for i in w:
            m = m @ G.matrices[i]
        assert np.allclose(act(m, y.as_array()), p.as_array(), rtol=1e-9)


def test_uncertified_walk_agrees_on_small_radius():
    S = bundled_group("schottky-sl2c")
    U = GroupPresentation.from_matrices(S.matrices[:2], 3, name="unhinted")
    for rho in (2.0, 4.0, 6.0):
        a = enumerate_orbit(U, O3, O3, rho)
        b = enumerate_orbit(S, O3, O3, rho)
        assert not a.complete and b.complete
        assert a.count == b.count


def test_frontier_cap():
    G = bundled_group("schottky-sl2c")
    with pytest.raises(OrbitEnumerationError):
        enumerate_orbit(G, O3, O3, 20.0, frontier_cap=1000)


@pytest.mark.parametrize("name", ALL_GROUPS)
def test_growth_ceiling(name):
    G = bundled_group(name)
    x, _ = basepoints(G)
    ball = enumerate_orbit(G, x, x, 7.0)
    gap = ball.min_gap()
    if math.isinf(gap):
        assert ball.count == 1
        return
    r = gap / 2
    d = G.dimension
    for rho in (2.0, 4.0, 7.0):
        assert ball.within(rho) <= float(ball_volume(d, rho + r) / ball_volume(d, r))


def test_schottky_deep_enumeration_is_fast():
    G = bundled_group("schottky-sl2r")
    ball = enumerate_orbit(G, origin(2), origin(2), 14.0)
    assert ball.complete and ball.count > 1000


def test_exponent_trivial_and_cyclic():
    G = bundled_group("trivial")
    data = [(r, orbital_count(G, O3, O3, r)) for r in range(1, 9)]
    assert critical_exponent_estimate(data) == 0.0
    C = bundled_group("cyclic-1")
    data = [(r + 0.5, orbital_count(C, O3, O3, r + 0.5)) for r in range(10, 40, 2)]
    assert 0 < critical_exponent_estimate(data) < 0.05


@pytest.mark.parametrize("name", ["schottky-sl2r", "schottky-sl2c"])
def test_exponent_schottky_is_stable(name):
    G = bundled_group(name)
    x = origin(G.dimension)
    ball = enumerate_orbit(G, x, x, 16.0)
    data = [(r, ball.within(r)) for r in np.arange(4.0, 16.01, 0.5)]
    full = critical_exponent_estimate(data)
    early = critical_exponent_estimate(data[: len(data) * 3 // 4])
    assert 0 < full < G.dimension - 1
    assert abs(full - early) < 0.05


def test_exponent_errors():
    with pytest.raises(ValueError):
        critical_exponent_estimate([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        critical_exponent_estimate([(1, 1), (2, 0), (3, 4)])
    with pytest.raises(ValueError):
        critical_exponent_estimate([(1, 1), (1, 2), (3, 4)])


def test_scalar_product_trivial_group():
    G = bundled_group("trivial")
    rho, delta = 2.0, 0.1
    est = orbital_scalar_product(G, O3, O3, delta, rho, mc_samples=500, seed=3)
    target = 1 / float(ball_volume(3, rho))
    assert abs(est.value - target) <= 3 * est.stderr + 1e-15


def test_scalar_product_symmetry():
    G = bundled_group("schottky-sl2c")
    x, y = O3, Point(0.2, -0.1, 1.3)
    a = orbital_scalar_product(G, x, y, 0.3, 4.0, mc_samples=2000, seed=1)
    b = orbital_scalar_product(G, y, x, 0.3, 4.0, mc_samples=2000, seed=2)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.stderr, b.stderr)


def test_scalar_product_sandwich():
    G = bundled_group("cyclic-1")
    x, y = O3, Point(0.2, -0.1, 1.3)
    delta, rho = 0.2, 4.0
    n = orbital_count(G, x, y, rho)
    lo = orbital_scalar_product(G, x, y, delta, rho - 2 * delta, 500, 7)
    hi = orbital_scalar_product(G, x, y, delta, rho + 2 * delta, 500, 7)
    assert lo.value * float(ball_volume(3, rho - 2 * delta)) <= n
    assert n <= hi.value * float(ball_volume(3, rho + 2 * delta))


def test_scalar_product_arguments():
    G = bundled_group("trivial")
    with pytest.raises(ValueError):
        orbital_scalar_product(G, O3, O3, 0.0, 1.0)
    with pytest.raises(ValueError):
        orbital_scalar_product(G, O3, O3, 0.5, 1.0)
