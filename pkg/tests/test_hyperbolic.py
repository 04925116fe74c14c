import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kleinheat.hyperbolic import (
    Isometry,
    Point,
    act,
    apply_isometry,
    ball_volume,
    ball_volume_quadrature,
    canonical_sign,
    carry_origin_to,
    distance_array,
    hyperbolic_distance,
    log_ball_volume,
    log_theta,
    origin,
    sample_ball,
    sample_sphere,
    spectral_param,
    sphere_area,
    theta,
)

# 40-digit reference values (mpmath)
ACOSH_1_5 = 0.9624236501192068949955
THETA_3_2_1 = 0.6006491293494279157
V3_1 = 5.110932705708288976930
V3_20_OVER_E40 = 1.570796326794896085

coord = st.floats(-3, 3, allow_nan=False)
height = st.floats(0.05, 5, allow_nan=False)


@st.composite
def points3(draw):
    return Point(draw(coord), draw(coord), draw(height))


@st.composite
def isometries3(draw):
    a, b, c = (complex(draw(coord), draw(coord)) for _ in range(3))
    # pick d so that ad - bc = 1, keeping a away from zero
    if abs(a) < 0.2:
        a = a + 1
    d = (1 + b * c) / a
    return Isometry(np.array([[a, b], [c, d]]), 3)


def test_point_validation():
    with pytest.raises(ValueError):
        Point(0.0, 0.0)
    with pytest.raises(ValueError):
        Point(1.0, -0.5)
    with pytest.raises(ValueError):
        Point(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Point(float("nan"), 1.0)
    assert Point(np.array([0.5, 2.0])).coords == (0.5, 2.0)


def test_isometry_validation():
    with pytest.raises(ValueError):
        Isometry(np.array([[2.0, 0], [0, 1.0]]))
    with pytest.raises(ValueError):
        Isometry(np.array([[1j, 0], [0, -1j]]), 2)
    g = Isometry(-np.eye(2))
    assert np.allclose(g.matrix, np.eye(2))


def test_canonical_sign_identifies_m_and_minus_m():
    m = np.array([[0.0, -2.0j], [0.5j, 1.0]])
    assert np.allclose(canonical_sign(m), canonical_sign(-m))
    assert np.allclose(canonical_sign(np.stack([m, -m]))[0], canonical_sign(m))


def test_distance_examples():
    o = origin(3)
    assert hyperbolic_distance(o, o) == 0.0
    assert hyperbolic_distance(o, Point(0, 0, math.e)) == pytest.approx(1.0, rel=1e-15)
    assert hyperbolic_distance(o, Point(1, 0, 1)) == pytest.approx(ACOSH_1_5, rel=1e-15)
    assert hyperbolic_distance(origin(2), Point(0, math.exp(2.5))) == pytest.approx(2.5, rel=1e-15)
    with pytest.raises(ValueError):
        hyperbolic_distance(origin(2), origin(3))


def test_distance_near_diagonal_has_no_cancellation():
    p = Point(0.0, 0.0, 1.0)
    q = Point(1e-12, 0.0, 1.0)
    assert hyperbolic_distance(p, q) == pytest.approx(1e-12, rel=1e-10)


def test_action_examples():
    o = origin(3)
    par = Isometry(np.array([[1, 1], [0, 1]]))
    dil = Isometry(np.diag([math.exp(0.5), math.exp(-0.5)]))
    assert np.allclose((par @ o).coords, (1, 0, 1))
    assert np.allclose((dil @ o).coords, (0, 0, math.e))
    inv = Isometry(np.array([[0, -1], [1, 0]]))
    assert np.allclose((inv @ Point(0, 0, 2)).coords, (0, 0, 0.5))


def test_composition_is_action_of_product():
    g = Isometry(np.array([[1 + 1j, 0.5], [0.2j, (1 + 0.1j) / (1 + 1j)]]))
    h = Isometry(np.array([[2, 1j], [0, 0.5]]))
    p = Point(0.3, -0.4, 0.7)
    assert np.allclose(((g @ h) @ p).coords, (g @ (h @ p)).coords)
    assert (g @ g.inverse()) == Isometry.identity()


@settings(max_examples=60, deadline=None)
@given(points3(), points3(), isometries3())
def test_distance_invariant_under_isometries(p, q, g):
    d0 = hyperbolic_distance(p, q)
    d1 = hyperbolic_distance(apply_isometry(g, p), apply_isometry(g, q))
    assert d1 == pytest.approx(d0, rel=1e-8, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(points3(), points3(), points3())
def test_triangle_inequality(p, q, r):
    assert hyperbolic_distance(p, r) <= hyperbolic_distance(p, q) + hyperbolic_distance(q, r) + 1e-12


def test_real_matrices_preserve_vertical_plane_in_h3():
    g = np.array([[2.0, 3.0], [1.0, 2.0]])
    p2 = act(g, np.array([0.4, 1.3]))
    p3 = act(g, np.array([0.4, 0.0, 1.3]))
    assert np.allclose(p3, [p2[0], 0.0, p2[1]])


def test_carry_origin_to():
    c = Point(1.5, -0.5, 2.5)
    assert np.allclose(act(carry_origin_to(c), origin(3).as_array()), c.as_array())


def test_volume_closed_forms():
    assert float(ball_volume(3, 1.0)) == pytest.approx(V3_1, rel=1e-14)
    assert float(ball_volume(2, 1.0)) == pytest.approx(2 * math.pi * (math.cosh(1) - 1), rel=1e-14)
    assert float(ball_volume(3, 20.0)) / math.exp(40) == pytest.approx(V3_20_OVER_E40, rel=1e-13)
    assert float(ball_volume(3, 0.0)) == 0.0


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("rho", [1e-3, 0.1, 1.0, 5.0, 15.0])
def test_volume_matches_quadrature(d, rho):
    assert float(ball_volume(d, rho)) == pytest.approx(ball_volume_quadrature(d, rho), rel=1e-10)


def test_volume_small_radius_is_euclidean():
    rho = 1e-6
    assert float(ball_volume(3, rho)) == pytest.approx(4 / 3 * math.pi * rho**3, rel=1e-9)


def test_log_volume_large_radius():
    lv = float(log_ball_volume(3, 500.0))
    assert math.isfinite(lv)
    assert lv == pytest.approx(math.log(math.pi / 2) + 1000.0, rel=1e-14)
    assert float(log_ball_volume(2, 500.0)) == pytest.approx(math.log(math.pi) + 500.0, rel=1e-14)


def test_sphere_area_is_volume_derivative():
    for d in (2, 3):
        h = 1e-6
        fd = (ball_volume(d, 2.0 + h) - ball_volume(d, 2.0 - h)) / (2 * h)
        assert float(sphere_area(d, 2.0)) == pytest.approx(float(fd), rel=1e-8)


def test_theta_values():
    assert float(theta(3, 2.0, 1.0)) == pytest.approx(THETA_3_2_1, rel=1e-14)
    assert float(theta(3, 2.0, 2.0)) == 0.0
    assert float(theta(3, 2.0, -1.0)) == float(theta(3, 2.0, 1.0))
    with pytest.raises(ValueError):
        theta(3, 1.0, 1.5)


def test_theta_stays_finite_at_large_radius():
    r = np.linspace(-499, 499, 11)
    vals = theta(3, 500.0, r)
    # interior values are within rounding of 1 at this radius
    assert np.all(np.isfinite(vals)) and np.all(vals > 0) and np.all(vals <= 1)
    assert np.all(np.isfinite(log_theta(2, 500.0, r)))


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("lam", [0.0, 1e-12, 0.3, 0.25, 1.0, 3.0, 10.0, 1e4])
def test_spectral_param(d, lam):
    sp = spectral_param(d, lam)
    assert sp.residual < 1e-12 * max(1.0, lam)
    assert sp.s.real <= (d - 1) / 2 + 1e-15
    assert sp.s.imag <= 0


def test_spectral_param_examples():
    sp = spectral_param(3, 3.0)
    assert sp.s == pytest.approx(1 - math.sqrt(2) * 1j, rel=1e-15)
    assert spectral_param(3, 0.0).s == 0
    assert spectral_param(3, 1e-12).s.real == pytest.approx(0.5e-12, rel=1e-10)
    with pytest.raises(ValueError):
        spectral_param(3, -1.0)


@pytest.mark.parametrize("center", [origin(3), Point(1.0, 0.0, 2.0), origin(2), Point(-0.7, 0.3)])
def test_sample_ball_stays_inside_and_is_uniform(center):
    rho = 1.5
    pts = sample_ball(center, rho, seed=11, n=100_000)
    dist = distance_array(pts, center.as_array())
    assert dist.max() <= rho + 1e-9
    d = center.dimension
    # the fraction inside the half-radius ball follows the volume ratio
    p = float(ball_volume(d, rho / 2) / ball_volume(d, rho))
    frac = np.mean(dist <= rho / 2)
    se = math.sqrt(p * (1 - p) / len(pts))
    assert abs(frac - p) < 4 * se


def test_sample_ball_deterministic():
    a = sample_ball(origin(3), 1.0, seed=5, n=10)
    b = sample_ball(origin(3), 1.0, seed=5, n=10)
    assert np.array_equal(a, b)


def test_sample_sphere_radius():
    c = Point(0.5, 0.5, 3.0)
    pts = sample_sphere(c, 2.0, seed=1, n=1000)
    assert np.allclose(distance_array(pts, c.as_array()), 2.0, atol=1e-10)
