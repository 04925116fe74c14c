"""Heat kernel of H^3 and of quotients by discrete groups.

The free kernel is explicit,

    p(rho, t) = (4 pi t)^(-3/2) * rho / sinh(rho) * exp(-t - rho^2 / (4 t)),

and the quotient kernel is its Poincare series over an orbit.  Series are
truncated at a radius ``R`` chosen so that a rigorous bound on the remainder
is below the requested tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .hyperbolic import (
    Point,
    act,
    carry_origin_to,
    distance_array,
    exp_from_origin,
    hyperbolic_distance,
    log_ball_volume,
    log_sinh,
)
from .orbits import GroupPresentation, _inverse_matrix, enumerate_orbit

__all__ = [
    "HeatValue",
    "IncompleteOrbitError",
    "heat_kernel_h3",
    "log_heat_kernel_h3",
    "heat_log_derivative",
    "heat_kernel_quotient",
    "heat_tail_bound",
    "packing_radius",
    "truncation_radius",
    "heat_mass",
    "semigroup_check",
    "monotonicity_check",
    "log_gradient_bound_check",
]


class IncompleteOrbitError(RuntimeError):
    """The orbit walk could not certify that every point was found."""


@dataclass(frozen=True)
class HeatValue:
    """A heat-kernel value with a certified bound on the truncation error."""

    value: float
    tail_bound: float = 0.0
    radius: float = math.inf
    terms: int = 1

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"heat kernel value must be positive, got {self.value}")
        if not self.tail_bound >= 0:
            raise ValueError(f"tail bound must be >= 0, got {self.tail_bound}")

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError(f"t must be positive, got {t}")


def _log_rho_over_sinh(rho: np.ndarray) -> np.ndarray:
    small = rho < 1e-3
    r2 = rho * rho
    safe = np.where(small, 1.0, rho)
    return np.where(small, -r2 / 6 + r2 * r2 / 180, np.log(safe) - log_sinh(safe))


def log_heat_kernel_h3(rho, t):
    """Logarithm of the H^3 heat kernel; finite for any ``rho >= 0``."""
    _check_t(t)
    rho = np.asarray(rho, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be >= 0")
    out = -1.5 * np.log(4 * np.pi * t) + _log_rho_over_sinh(rho) - t - rho * rho / (4 * t)
    return out if out.ndim else float(out)


def heat_kernel_h3(rho, t):
    """Heat kernel ``p(rho, t)`` on H^3 at distance ``rho`` and time ``t``."""
    return np.exp(log_heat_kernel_h3(rho, t))


def heat_log_derivative(rho, t):
    """Exact ``d/d rho log p = 1/rho - coth(rho) - rho / (2t)``."""
    rho = np.asarray(rho, dtype=float)
    small = rho < 1e-4
    safe = np.where(small, 1.0, rho)
    core = np.where(small, -rho / 3 + rho**3 / 45, 1 / safe - 1 / np.tanh(safe))
    out = core - rho / (2 * t)
    return out if out.ndim else float(out)


def heat_mass(t: float, *, upper: float | None = None) -> float:
    """``int_0^inf p(r, t) 4 pi sinh^2 r dr``, which equals 1 (stochastic completeness)."""
    from scipy.integrate import quad

    _check_t(t)
    if upper is None:
        upper = 2 * t + 40 * math.sqrt(t) + 10

    def f(r):
        return math.exp(
            float(log_heat_kernel_h3(r, t)) + math.log(4 * math.pi) + 2 * float(log_sinh(r))
        ) if r > 0 else 0.0

    peak = 2 * t
    pts = [p for p in (peak - 4 * math.sqrt(t), peak, peak + 4 * math.sqrt(t)) if 0 < p < upper]
    val, _ = quad(f, 0, upper, points=pts or None, limit=400, epsabs=0, epsrel=1e-13)
    return val


# ---------------------------------------------------------------------------
# truncation


def heat_tail_bound(R: float, t: float, eta: float) -> float:
    """Upper bound on ``sum p(d(x, gamma y), t)`` over orbit points beyond ``R``.

    ``eta`` is a packing radius: open balls of radius ``eta`` about the
    orbit points are pairwise disjoint.  Since ``p`` is decreasing, each term
    is at most the average of ``p(d(x, w) - eta)`` over its ball, so the tail
    is at most ``V(eta)^-1 int_{R-eta}^inf 4 pi sinh^2(r) p(r - eta) dr``.
    Bounding ``sinh^2(s + eta) s / sinh(s)`` by ``e^(2 eta) (2s + 1) e^s / 4``
    leaves a Gaussian integral in ``u = (s - 2t) / (2 sqrt t)``.
    """
    if not (R > 0 and t > 0 and eta > 0):
        raise ValueError(f"need R, t, eta > 0, got R={R}, t={t}, eta={eta}")
    a = R - 2 * eta
    extra = 0.0
    if a < 0:
        # shells with r < eta are bounded by p(0) times their volume <= V(eta)
        extra = float(heat_kernel_h3(0.0, t))
        a = 0.0
    u = (a - 2 * t) / (2 * math.sqrt(t))
    gauss = math.sqrt(math.pi * t) * (4 * t + 1) * erfc(u) + 4 * t * math.exp(-u * u)
    log_pref = (
        math.log(math.pi) + 2 * eta - 1.5 * math.log(4 * math.pi * t) - float(log_ball_volume(3, eta))
    )
    return float(math.exp(log_pref) * gauss + extra)


def truncation_radius(t: float, eta: float, eps: float, *, r_max: float = 1e4) -> float:
    """``max(3t, R_eps)`` with ``R_eps`` the smallest radius whose tail bound is ``<= eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    lo = 3 * t
    if heat_tail_bound(lo, t, eta) <= eps:
        return lo
    hi = max(2 * lo, 1.0)
    while heat_tail_bound(hi, t, eta) > eps:
        hi *= 2
        if hi > r_max:
            raise ValueError(f"tolerance {eps} unreachable below radius {r_max}")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if heat_tail_bound(mid, t, eta) > eps:
            lo = mid
        else:
            hi = mid
    return hi


def packing_radius(G: GroupPresentation, y: Point) -> float:
    """Half of ``min_{gamma != e} d(y, gamma y)``, the smallest gap in the orbit of ``y``."""
    if G.is_trivial:
        return math.inf
    r = G.default_margin(y) + 1e-9
    ball = enumerate_orbit(G, y, y, r)
    gap = ball.min_gap()
    if not math.isfinite(gap):
        raise IncompleteOrbitError("no non-trivial orbit point found near y")
    if not ball.complete:
        raise IncompleteOrbitError("orbit of y is not certified complete near y")
    return 0.5 * gap


def heat_kernel_quotient(
    G: GroupPresentation,
    x: Point,
    y: Point,
    t: float,
    eps: float = 1e-12,
    *,
    require_complete: bool = True,
    **enum_kwargs,
) -> HeatValue:
    """``p_Gamma(x, y, t) = sum_gamma p(d(x, gamma y), t)`` with a certified tail.

    With ``require_complete=False`` an uncertified orbit walk is accepted and
    the result is a lower bound, reported with an infinite tail.
    """
    if G.dimension != 3:
        raise ValueError("the quotient heat kernel is implemented for dimension 3 only")
    _check_t(t)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if G.is_trivial:
        return HeatValue(float(heat_kernel_h3(hyperbolic_distance(x, y), t)), 0.0, math.inf, 1)
    try:
        eta = packing_radius(G, y)
        R = truncation_radius(t, eta, eps)
    except IncompleteOrbitError:
        if require_complete:
            raise
        eta, R = None, 3 * t
    ball = enumerate_orbit(G, x, y, R, **enum_kwargs)
    if not ball.complete and require_complete:
        raise IncompleteOrbitError(
            f"orbit enumeration for group {G.name!r} is not certified complete"
        )
    terms = np.sort(heat_kernel_h3(ball.distances, t))
    tail = heat_tail_bound(R, t, eta) if ball.complete and eta is not None else math.inf
    return HeatValue(math.fsum(terms.tolist()), tail, R, len(terms))


# ---------------------------------------------------------------------------
# checks


def semigroup_check(
    x: Point, y: Point, t1: float, t2: float, *, radial_nodes: int = 400, angular_nodes: int = 200
) -> tuple[float, float]:
    """Return ``(int p(x, w, t1) p(w, y, t2) dw, p(x, y, t1 + t2))``.

    The integral runs over geodesic polar coordinates about ``x``: Gauss-Legendre
    in the radius on a window around the bulk of ``p(., t1)``, and in the
    cosine of the angle to the axis through ``y``.  The points ``w`` are
    actually constructed in the upper half-space, so the check also exercises
    the distance function and the isometry carrying the origin to ``x``.
    """
    _check_t(t1)
    _check_t(t2)
    D = hyperbolic_distance(x, y)
    r_hi = 2 * max(t1, t2) + 14 * math.sqrt(max(t1, t2)) + D + 4
    gr, wr = np.polynomial.legendre.leggauss(radial_nodes)
    r = 0.5 * r_hi * (gr + 1)
    wr = 0.5 * r_hi * wr
    gc, wc = np.polynomial.legendre.leggauss(angular_nodes)
    # polar axis: the unit tangent at the origin pointing toward g^-1 y
    g = carry_origin_to(x.as_array())
    yo = act(_inverse_matrix(g), y.as_array())
    axis = np.array([0.0, 0.0, 1.0]) if D < 1e-12 else _unit_tangent_toward(yo)
    perp = np.cross(axis, [1.0, 0.0, 0.0])
    if np.linalg.norm(perp) < 1e-6:
        perp = np.cross(axis, [0.0, 1.0, 0.0])
    perp /= np.linalg.norm(perp)
    dirs = gc[:, None] * axis + np.sqrt(1 - gc * gc)[:, None] * perp
    R, C = np.meshgrid(r, np.arange(angular_nodes), indexing="ij")
    w0 = exp_from_origin(dirs[C.ravel()], R.ravel())
    w = act(g, w0)
    dx = R.ravel()
    dy = distance_array(w, y.as_array())
    f = np.exp(
        log_heat_kernel_h3(dx, t1)
        + log_heat_kernel_h3(dy, t2)
        + math.log(2 * math.pi)
        + 2 * log_sinh(np.maximum(dx, 1e-300))
    ).reshape(R.shape)
    lhs = float(wr @ f @ wc)
    return lhs, float(heat_kernel_h3(D, t1 + t2))


def _unit_tangent_toward(p: np.ndarray) -> np.ndarray:
    """Unit tangent vector at the origin ``(0, 0, 1)`` of the geodesic toward ``p``."""
    # exp map from origin: y = 1/(cosh r - u_y sinh r), h = u_h sinh r * y
    r = float(distance_array(p, np.array([0.0, 0.0, 1.0])))
    sh, ch = math.sinh(r), math.cosh(r)
    uy = (ch - 1.0 / p[2]) / sh
    uh = p[:2] / (p[2] * sh)
    u = np.array([uh[0], uh[1], uy])
    return u / np.linalg.norm(u)


@dataclass
class MonotonicityReport:
    times: list[float]
    values: list[float]
    tails: list[float]
    violations: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def monotonicity_check(
    G: GroupPresentation, x: Point, t_grid: Sequence[float], eps: float = 1e-12
) -> MonotonicityReport:
    """Check ``t -> p_Gamma(x, x, t)`` is non-increasing up to the certified tails."""
    ts = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_grid must be strictly increasing")
    hv = [heat_kernel_quotient(G, x, x, t, eps) for t in ts]
    rep = MonotonicityReport(ts, [h.value for h in hv], [h.tail_bound for h in hv])
    for i in range(len(ts) - 1):
        if hv[i].value + hv[i].tail_bound < hv[i + 1].value - hv[i + 1].tail_bound:
            rep.violations.append(i)
    return rep


@dataclass
class GradientReport:
    samples: list[tuple[float, float]]
    exact: np.ndarray
    finite_difference: np.ndarray
    bounds: np.ndarray
    C1: float
    C2: float

    @property
    def max_fd_error(self) -> float:
        scale = np.maximum(np.abs(self.exact), 1e-300)
        return float(np.max(np.abs(self.finite_difference - self.exact) / scale))

    @property
    def ok(self) -> bool:
        return bool(np.all(np.abs(self.exact) <= self.bounds))


def log_gradient_bound_check(
    samples: Sequence[tuple[float, float]],
    C1: float = 1 + 1e-3,
    C2: float = 1 + 1e-3,
    h: float = 1e-5,
) -> GradientReport:
    """Check ``|d/d rho log p| <= C1 + C2 rho / (2t)`` on samples ``(rho, t)``.

    The derivative is taken both exactly and by central differences.
    """
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    rho, t = arr[:, 0], arr[:, 1]
    exact = heat_log_derivative(rho, t)
    lo = np.maximum(rho - h, 0.0)
    fd = (log_heat_kernel_h3(rho + h, t) - log_heat_kernel_h3(lo, t)) / (rho + h - lo)
    bounds = C1 + C2 * rho / (2 * t)
    return GradientReport([tuple(s) for s in arr], np.atleast_1d(exact), np.atleast_1d(fd), bounds, C1, C2)
