"""Radial eigenfunctions of the Laplacian on H^d.

``S(lam, rho)`` is the spherical mean of any eigenfunction with eigenvalue
``lam`` that takes the value 1 at the centre.  As a function of the radius
it solves

    y'' + (d - 1) coth(rho) y' + lam y = 0,    y(0) = 1, y'(0) = 0,

which has a regular singular point at 0.  The solver starts from the even
power series and hands over to an explicit Runge-Kutta integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = ["RadialSolution", "radial_ode_solve", "radial_closed_form_h3", "series_coefficients"]

RTOL = 1e-10


def series_coefficients(d: int, lam: float) -> tuple[float, float, float]:
    """Coefficients of ``1 + a2 r^2 + a4 r^4 + a6 r^6`` at the regular singular point.

    Substituting ``coth r = 1/r + r/3 - r^3/45 + ...`` and matching powers.
    """
    a2 = -lam / (2 * d)
    a4 = lam * (lam + 2 * (d - 1) / 3) / (8 * d * (d + 2))
    # r^4 terms: 30 a6 + (d-1)(6 a6 + 4 a4/3 - 2 a2/45) + lam a4 = 0
    a6 = -(lam * a4 + (d - 1) * (4 * a4 / 3 - 2 * a2 / 45)) / (30 + 6 * (d - 1))
    return a2, a4, a6


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """Numerical ``S(lam, .)`` on ``[0, rho_max]``."""

    lam: float
    dimension: int
    rho_max: float
    series_radius: float
    _dense: object = None

    def _series(self, r):
        a2, a4, _ = series_coefficients(self.dimension, self.lam)
        r2 = r * r
        return 1 + a2 * r2 + a4 * r2 * r2, 2 * a2 * r + 4 * a4 * r2 * r

    def _both(self, rho):
        rho = np.abs(np.asarray(rho, dtype=float))
        if np.any(rho > self.rho_max * (1 + 1e-12)):
            raise ValueError(f"radius beyond the solved range {self.rho_max}")
        y, dy = self._series(rho)
        if self._dense is not None:
            far = rho > self.series_radius
            if np.any(far):
                vals = self._dense(np.minimum(rho[far], self.rho_max))
                y = np.where(far, 0.0, y)
                dy = np.where(far, 0.0, dy)
                y[far] = vals[0]
                dy[far] = vals[1]
        return y, dy

    def evaluate(self, rho):
        """``S(lam, rho)``; even in ``rho``."""
        y, _ = self._both(rho)
        return y if y.ndim else float(y)

    __call__ = evaluate

    def derivative(self, rho):
        _, dy = self._both(rho)
        return dy if dy.ndim else float(dy)

    def residual(self, rho, h: float = 1e-5):
        """``y'' + (d-1) coth(rho) y' + lam y`` with ``y''`` by central differences of ``y'``."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho - h <= 0) or np.any(rho + h > self.rho_max):
            raise ValueError("residual points must lie inside (h, rho_max - h)")
        d2 = (self.derivative(rho + h) - self.derivative(rho - h)) / (2 * h)
        return d2 + (self.dimension - 1) / np.tanh(rho) * self.derivative(rho) + self.lam * self.evaluate(rho)


def radial_ode_solve(d: int, lam: float, rho_max: float) -> RadialSolution:
    """Solve for ``S(lam, .)`` on ``[0, rho_max]``."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if not rho_max > 0:
        raise ValueError("rho_max must be positive")
    if d < 2:
        raise ValueError("dimension must be >= 2")
    # keep the neglected r^6 term below ~1e-12
    r0 = min(1e-2, 0.05 / math.sqrt(1 + lam))
    if lam == 0 or rho_max <= r0:
        return RadialSolution(float(lam), d, float(rho_max), max(r0, rho_max) if lam else math.inf)
    a2, a4, a6 = series_coefficients(d, lam)
    y0 = 1 + a2 * r0**2 + a4 * r0**4 + a6 * r0**6
    dy0 = 2 * a2 * r0 + 4 * a4 * r0**3 + 6 * a6 * r0**5

    def rhs(r, u):
        return [u[1], -(d - 1) / math.tanh(r) * u[1] - lam * u[0]]

    sol = solve_ivp(
        rhs,
        (r0, rho_max),
        [y0, dy0],
        method="DOP853",
        rtol=RTOL,
        atol=1e-14 * math.exp(-((d - 1) / 2) * rho_max),
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"radial ODE integration failed: {sol.message}")
    return RadialSolution(float(lam), d, float(rho_max), r0, sol.sol)


def radial_closed_form_h3(lam: float, rho):
    """``sin(k rho) / (k sinh rho)`` with ``k = sqrt(lam - 1)``; the d = 3 solution.

    For ``lam < 1`` the sine becomes ``sinh`` with ``k = sqrt(1 - lam)`` and at
    ``lam = 1`` the ratio tends to ``rho / sinh(rho)``.
    """
    rho = np.asarray(rho, dtype=float)
    small = rho < 1e-8
    safe = np.where(small, 1.0, rho)
    if lam > 1:
        k = math.sqrt(lam - 1)
        out = np.sin(k * safe) / (k * np.sinh(safe))
    elif lam < 1:
        k = math.sqrt(1 - lam)
        # sinh(k r) / sinh(r) without overflow
        out = np.exp(k * safe - safe) * (-np.expm1(-2 * k * safe)) / (-np.expm1(-2 * safe)) / k
    else:
        out = safe / np.sinh(safe)
    out = np.where(small, 1 - lam * rho * rho / 6, out)
    return out if out.ndim else float(out)
