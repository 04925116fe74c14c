"""The Selberg transform ``nu_rho(lam)`` of the normalized ball indicator.

``nu_rho(lam)`` is the ball average of any eigenfunction with eigenvalue
``lam`` normalized to 1 at the centre.  Taking ``y^s`` at the point
``o = (0, ..., 0, 1)`` with ``s (d - 1 - s) = lam`` gives three routes:

``nu_direct``
    slab integral over heights ``y = e^r`` of the ball ``B(o, rho)``, with the
    extra substitution ``r = rho sin(phi)`` that smooths the endpoints;
``nu_theta``
    the same integral in the variable ``u = r + rho`` written through the
    kernel ``theta``, with QUADPACK's algebraic-endpoint and oscillatory weights;
``nu_ode``
    the ball average ``V(rho)^-1 int_0^rho V'(t) S(lam, t) dt`` of the
    radial eigenfunction.

All three are evaluated with log-space prefactors, so they stay finite for
``rho`` up to several hundred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .hyperbolic import (
    log_ball_volume,
    log_sphere_area,
    log_theta,
    spectral_param,
    unit_ball_volume,
)
from .radial import radial_ode_solve

__all__ = [
    "SelbergValue",
    "QuadratureError",
    "nu_direct",
    "nu_theta",
    "nu_theta_scaled",
    "theta_integral",
    "nu_ode",
    "nu",
    "SpectralBoundReport",
    "spectral_bound_report",
    "TwoRegimeReport",
    "two_regime_check",
]

QUAD_RTOL = 1e-11
QUAD_ATOL = 1e-15
IMAG_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its tolerance."""


@dataclass(frozen=True)
class SelbergValue:
    """A value of ``nu_rho(lam)`` with the route that produced it."""

    nu: float
    route: str
    quadrature_error: float = 0.0
    imag: float = 0.0

    def __post_init__(self):
        if self.route not in ("direct", "theta_form", "radial_ode"):
            raise ValueError(f"unknown route {self.route!r}")
        if not self.quadrature_error >= 0:
            raise ValueError("quadrature_error must be >= 0")

    def __float__(self) -> float:
        return float(self.nu)


def _check(d, lam, rho):
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")


def _quad(f, a, b, **kw):
    kw.setdefault("limit", 2000)
    kw.setdefault("epsabs", QUAD_ATOL)
    kw.setdefault("epsrel", QUAD_RTOL)
    val, err, *rest = quad(f, a, b, full_output=1, **kw)
    # integrands are normalized so that |nu| <= 1; an absolute floor is meaningful
    if len(rest) >= 2 and rest[1] and err > max(1e-7 * abs(val), 1e-10):
        raise QuadratureError(f"quadrature did not converge: {rest[1]}")
    return val, err


def _realize(re, im, err, route):
    if abs(im) >= IMAG_TOL * max(1.0, abs(re)):
        raise QuadratureError(f"imaginary part {im:.3e} too large for a real lambda ({route})")
    return SelbergValue(float(re), route, float(abs(err)), float(im))


def _exponent(d, lam, other_root):
    sp = spectral_param(d, lam)
    s = sp.s
    if other_root:
        s = (d - 1) - s if sp.is_real else s.conjugate()
    return complex(s)


def nu_direct(d: int, lam: float, rho: float, *, other_root: bool = False) -> SelbergValue:
    """``nu_rho(lam)`` from the slab integral over the heights of ``B(o, rho)``.

    The horizontal slice of ``B(o, rho)`` at height ``y = e^r`` is a ball of
    squared euclidean radius ``2 e^r (cosh rho - cosh r)``, so

        V nu = c_{d-1} int_{-rho}^{rho} e^{r (s - h)} (2 (cosh rho - cosh r))^h dr

    with ``h = (d - 1)/2`` and ``c_{d-1}`` the unit-ball volume in R^(d-1).
    """
    _check(d, lam, rho)
    s = _exponent(d, lam, other_root)
    h = (d - 1) / 2
    log_c = math.log(unit_ball_volume(d - 1)) - float(log_ball_volume(d, rho))

    def log_mag(phi):
        r = rho * math.sin(phi)
        # 2 (cosh rho - cosh r) = 4 sinh((rho + r)/2) sinh((rho - r)/2)
        a, b = (rho + r) / 2, (rho - r) / 2
        if a <= 0 or b <= 0:
            return -math.inf
        ls = _log_sinh1(a) + _log_sinh1(b) + math.log(4.0)
        return log_c + r * (s.real - h) + h * ls + math.log(rho * math.cos(phi))

    def f_re(phi):
        lm = log_mag(phi)
        return math.exp(lm) * math.cos(s.imag * rho * math.sin(phi)) if lm > -math.inf else 0.0

    def f_im(phi):
        lm = log_mag(phi)
        return math.exp(lm) * math.sin(s.imag * rho * math.sin(phi)) if lm > -math.inf else 0.0

    re, err = _quad(f_re, -math.pi / 2, math.pi / 2)
    im = 0.0
    if s.imag != 0:
        im, err2 = _quad(f_im, -math.pi / 2, math.pi / 2)
        err += err2
    return _realize(re, im, err, "direct")


def _log_sinh1(x: float) -> float:
    if x > 20:
        return x - math.log(2.0) + math.log1p(-math.exp(-2 * x))
    return math.log(math.sinh(x))


def theta_integral(d: int, s: complex, rho: float, *, scale_log: float = 0.0) -> tuple[complex, float]:
    """``e^{scale_log} I(s, rho)`` with ``I = int_0^{2 rho} e^{u (s - h)} theta(rho, u - rho) du``.

    Returns the value and the absolute quadrature error estimate.
    """
    h = (d - 1) / 2
    s = complex(s)
    alpha = s.real - h
    # theta(rho, u - rho) = [(1 - e^-u)(1 - e^{u - 2 rho})]^h, with the endpoint zeros
    # u^h (2 rho - u)^h carried by the weight function
    two = 2 * rho

    def smooth_log(u):
        v = two - u
        lu = math.log(-math.expm1(-u) / u) if u > 0 else 0.0
        lv = math.log(-math.expm1(-v) / v) if v > 0 else 0.0
        return h * (lu + lv) + alpha * u + scale_log

    if s.imag == 0:
        val, err = _quad(lambda u: math.exp(smooth_log(u)), 0.0, two, weight="alg", wvar=(h, h))
        return complex(val), err

    # oscillatory part cos/sin(Im(s) u) handled by the weight; endpoint zeros by theta itself
    def g(u):
        return math.exp(float(log_theta(d, rho, u - rho)) + alpha * u + scale_log) if 0 < u < two else 0.0

    re, e1 = _quad(g, 0.0, two, weight="cos", wvar=s.imag)
    im, e2 = _quad(g, 0.0, two, weight="sin", wvar=s.imag)
    return complex(re, im), e1 + e2


def _log_theta_prefactor(d, rho):
    """``log(c_{d-1} e^{(d-1) rho} / V_d(rho))``."""
    return math.log(unit_ball_volume(d - 1)) + (d - 1) * rho - float(log_ball_volume(d, rho))


def nu_theta(d: int, lam: float, rho: float, *, other_root: bool = False) -> SelbergValue:
    """``nu_rho(lam) = c_{d-1} e^{(d-1) rho - s rho} I(s, rho) / V_d(rho)``."""
    _check(d, lam, rho)
    s = _exponent(d, lam, other_root)
    logp = _log_theta_prefactor(d, rho) - s.real * rho
    val, err = theta_integral(d, s, rho, scale_log=logp)
    val = val * complex(math.cos(s.imag * rho), -math.sin(s.imag * rho))
    return _realize(val.real, val.imag, err, "theta_form")


def nu_theta_scaled(d: int, lam: float, rho: float) -> float:
    """``nu_rho(lam) e^{s rho}`` for real ``s``, computed without forming ``nu``."""
    _check(d, lam, rho)
    s = _exponent(d, lam, False)
    if s.imag != 0:
        raise ValueError("scaled form needs lambda <= (d-1)^2/4")
    val, _ = theta_integral(d, s, rho, scale_log=_log_theta_prefactor(d, rho))
    return val.real


def nu_ode(d: int, lam: float, rho: float, *, solution=None) -> SelbergValue:
    """``V_d(rho)^-1 int_0^rho V_d'(t) S(lam, t) dt`` with ``S`` from the radial ODE."""
    _check(d, lam, rho)
    sol = solution if solution is not None else radial_ode_solve(d, lam, rho)
    if lam == 0:
        return SelbergValue(1.0, "radial_ode", 0.0)
    lv = float(log_ball_volume(d, rho))

    def f(t):
        return math.exp(float(log_sphere_area(d, t)) - lv) * sol(t) if t > 0 else 0.0

    # the weight concentrates within a few units of rho
    cuts = [c for c in (rho - 8.0, rho - 2.0) if c > 0]
    val, err = _quad(f, 0.0, rho, points=cuts or None)
    return SelbergValue(float(val), "radial_ode", float(err))


ROUTES = {"direct": nu_direct, "theta_form": nu_theta, "radial_ode": nu_ode}


def nu(d: int, lam: float, rho: float, route: str = "theta_form") -> SelbergValue:
    try:
        fn = ROUTES[route]
    except KeyError:
        raise ValueError(f"route must be one of {sorted(ROUTES)}") from None
    return fn(d, lam, rho)


# ---------------------------------------------------------------------------
# the two-regime bounds


@dataclass
class SpectralBoundReport:
    """Grid statistics for the small- and large-eigenvalue regimes.

    ``item1[i]`` is ``sup |nu e^{lam rho/(d-1)} - 1|`` over ``lam <= beta ln(rho)/rho``
    and ``envelope[i]`` the reference curve ``C4 ln^2(rho)/rho``;
    ``item2[i]`` is ``sup |nu| rho^{beta/(d-1)}`` over ``[beta ln(rho)/rho, lam_max]``.
    """

    dimension: int
    beta: float
    rhos: list[float]
    item1: list[float]
    item1_argmax: list[float]
    envelope: list[float]
    item2: list[float]
    item2_argmax: list[float]
    lam_max: float
    C4: float

    @property
    def item1_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.item1, self.item1[1:]))

    @property
    def item1_under_envelope(self) -> bool:
        return all(v < e for v, e in zip(self.item1, self.envelope))

    @property
    def item2_spread(self) -> float:
        return max(self.item2) / min(self.item2)


def spectral_bound_report(
    d: int,
    beta: float,
    rho_grid: Sequence[float],
    lambda_resolution: int = 200,
    *,
    lam_max: float | None = None,
    C4: float = 3.0,
    route: str = "theta_form",
) -> SpectralBoundReport:
    """Evaluate both regimes on ``rho_grid`` with ``lambda_resolution`` points per regime."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    rhos = [float(r) for r in rho_grid]
    if any(b <= a for a, b in zip(rhos, rhos[1:])) or rhos[-1] > 500 or rhos[0] <= 1:
        raise ValueError("rho_grid must be increasing inside (1, 500]")
    if lam_max is None:
        lam_max = (d - 1) ** 2 / 4 + 25
    fn = ROUTES[route]
    rep = SpectralBoundReport(d, beta, rhos, [], [], [], [], [], lam_max, C4)
    for rho in rhos:
        cut = beta * math.log(rho) / rho
        lams = np.linspace(0.0, cut, lambda_resolution)
        err1 = [abs(fn(d, lam, rho).nu * math.exp(lam * rho / (d - 1)) - 1) for lam in lams]
        i1 = int(np.argmax(err1))
        rep.item1.append(float(err1[i1]))
        rep.item1_argmax.append(float(lams[i1]))
        rep.envelope.append(C4 * math.log(rho) ** 2 / rho)
        lams2 = np.geomspace(cut, lam_max, lambda_resolution)
        st = [abs(fn(d, lam, rho).nu) * rho ** (beta / (d - 1)) for lam in lams2]
        i2 = int(np.argmax(st))
        rep.item2.append(float(st[i2]))
        rep.item2_argmax.append(float(lams2[i2]))
    return rep


@dataclass
class TwoRegimeReport:
    """Fitted constants for the two regimes at each radius.

    ``C_small[i] = max |nu e^{s rho} - 1| / s`` over ``0 < lam <= lam0`` and
    ``C_large[i] = max |nu| e^{rho s(lam0)} / rho`` over ``lam >= lam0``.
    """

    dimension: int
    lam0: float
    rhos: list[float]
    C_small: list[float]
    C_large: list[float]
    slopes: list[float] = field(default_factory=list)

    @staticmethod
    def _stable(cs):
        mid = cs[len(cs) // 2]
        return all(math.isfinite(c) for c in cs) and cs[-1] <= 2 * mid

    @property
    def ok(self) -> bool:
        return self._stable(self.C_small) and self._stable(self.C_large)


def two_regime_check(
    d: int,
    lam0: float,
    rho_grid: Sequence[float],
    *,
    n_lambda: int = 40,
    lam_max: float | None = None,
) -> TwoRegimeReport:
    """Fit the constants of ``|nu e^{s rho} - 1| <= C s`` and ``|nu| <= C rho e^{-rho s(lam0)}``."""
    h2 = (d - 1) ** 2 / 4
    if not 0 < lam0 < h2:
        raise ValueError(f"need 0 < lam0 < {h2}")
    if lam_max is None:
        lam_max = h2 + 25
    rhos = [float(r) for r in rho_grid]
    s0 = spectral_param(d, lam0).s.real
    rep = TwoRegimeReport(d, lam0, rhos, [], [])
    small = np.linspace(lam0 / n_lambda, lam0, n_lambda)
    large = np.concatenate([np.linspace(lam0, h2, n_lambda // 2), np.geomspace(h2 + 0.01, lam_max, n_lambda // 2)])
    for rho in rhos:
        r1 = []
        for lam in small:
            s = spectral_param(d, lam).s.real
            r1.append(abs(nu_theta_scaled(d, lam, rho) - 1) / s)
        rep.C_small.append(max(r1))
        rep.slopes.append(r1[0])
        r2 = [
            abs(nu_theta(d, lam, rho).nu) * math.exp(rho * s0) / rho for lam in large
        ]
        rep.C_large.append(max(r2))
    return rep
