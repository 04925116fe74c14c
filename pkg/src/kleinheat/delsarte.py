"""Monte Carlo checks of the mean-value identities for ``Psi_s(p) = y^s``.

``y^s`` is an eigenfunction of the Laplacian with eigenvalue
``lam = s (d - 1 - s)``.  Its mean over a sphere ``S(x, rho)`` is
``S(lam, rho) Psi_s(x)`` and its mean over a ball ``B(x, rho)`` is
``nu_rho(lam) Psi_s(x)``; both are checked here by sampling, and the
eigenfunction property itself by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hyperbolic import Point, sample_ball, sample_sphere, spectral_param
from .montecarlo import batched_mean, z_score
from .radial import RadialSolution, radial_ode_solve
from .selberg import nu_direct

__all__ = [
    "RadialSolution",
    "radial_ode_solve",
    "eigenfunction",
    "MeanCheck",
    "spherical_mean_check",
    "delsarte_ball_check",
    "LaplacianCheck",
    "laplacian",
    "laplacian_check",
]


def eigenfunction(s: complex, points: np.ndarray) -> np.ndarray:
    """``Psi_s = y^s`` evaluated at points (last coordinate ``y``)."""
    y = np.asarray(points, dtype=float)[..., -1]
    return np.exp(complex(s) * np.log(y))


@dataclass(frozen=True)
class MeanCheck:
    """Sample mean against its predicted value; real and imaginary parts separately."""

    mean: complex
    stderr: complex
    target: complex
    samples: int

    @property
    def z_real(self) -> float:
        return z_score(self.mean.real, self.stderr.real, self.target.real)

    @property
    def z_imag(self) -> float:
        return z_score(self.mean.imag, self.stderr.imag, self.target.imag)

    @property
    def z(self) -> float:
        """The larger of the two |z|-scores."""
        return max(abs(self.z_real), abs(self.z_imag))

    def passes(self, threshold: float = 4.0) -> bool:
        return self.z < threshold


def _mean_of_eigenfunction(sampler, s, n, seed, threads):
    def draw(bseed, m):
        v = eigenfunction(s, sampler(bseed, m))
        return np.stack([v.real, v.imag], axis=1)

    res = batched_mean(draw, n, seed, threads=threads)
    return complex(*res.mean), complex(*res.stderr)


def spherical_mean_check(
    d: int,
    lam: float,
    x: Point,
    rho: float,
    n_mc: int = 1_000_000,
    seed: int = 0,
    *,
    threads: int = 1,
    solution: RadialSolution | None = None,
) -> MeanCheck:
    """Mean of ``y^s`` over ``S(x, rho)`` against ``S(lam, rho) x_y^s``."""
    if x.dimension != d:
        raise ValueError("point dimension does not match d")
    if not rho > 0:
        raise ValueError("rho must be positive")
    s = spectral_param(d, lam).s
    sol = solution or radial_ode_solve(d, lam, rho)
    target = complex(sol(rho)) * complex(eigenfunction(s, x.as_array()))
    mean, err = _mean_of_eigenfunction(
        lambda b, m: sample_sphere(x, rho, b, m), s, n_mc, seed, threads
    )
    return MeanCheck(mean, err, target, n_mc)


def delsarte_ball_check(
    d: int,
    lam: float,
    x: Point,
    rho: float,
    n_mc: int = 1_000_000,
    seed: int = 0,
    *,
    threads: int = 1,
) -> MeanCheck:
    """Mean of ``y^s`` over ``B(x, rho)`` against ``nu_rho(lam) x_y^s``."""
    if x.dimension != d:
        raise ValueError("point dimension does not match d")
    if not rho > 0:
        raise ValueError("rho must be positive")
    s = spectral_param(d, lam).s
    target = nu_direct(d, lam, rho).nu * complex(eigenfunction(s, x.as_array()))
    mean, err = _mean_of_eigenfunction(
        lambda b, m: sample_ball(x, rho, b, m), s, n_mc, seed, threads
    )
    return MeanCheck(mean, err, target, n_mc)


def laplacian(f, p: np.ndarray, h: float) -> complex:
    """Central-difference ``-y^2 sum_i d_i^2 f + (d - 2) y d_y f`` at ``p``."""
    p = np.asarray(p, dtype=float)
    d = p.shape[0]
    y = p[-1]
    f0 = f(p)
    lap = 0.0
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        lap = lap + (f(p + e) - 2 * f0 + f(p - e)) / (h * h)
    e = np.zeros(d)
    e[-1] = h
    dy = (f(p + e) - f(p - e)) / (2 * h)
    return complex(-y * y * lap + (d - 2) * y * dy)


@dataclass(frozen=True)
class LaplacianCheck:
    steps: tuple[float, ...]
    errors: tuple[float, ...]
    extrapolated_error: float
    scale: float

    @property
    def observed_order(self) -> float:
        e = self.errors
        return float(np.log2(e[-2] / e[-1]))


def laplacian_check(d: int, lam: float, point: Point, h: float = 1e-2, levels: int = 3) -> LaplacianCheck:
    """Compare the finite-difference Laplacian of ``y^s`` with ``lam y^s``.

    The error should fall by 4 per halving of the mesh; Richardson
    extrapolation of the two finest levels removes the ``h^2`` term.
    """
    s = spectral_param(d, lam).s
    p = point.as_array()
    target = lam * complex(eigenfunction(s, p))

    def f(q):
        return complex(eigenfunction(s, q))

    steps = tuple(h / 2**k for k in range(levels))
    vals = [laplacian(f, p, hk) for hk in steps]
    errs = tuple(abs(v - target) for v in vals)
    rich = (4 * vals[-1] - vals[-2]) / 3
    return LaplacianCheck(steps, errs, abs(rich - target), max(1.0, abs(target)))
