"""Upper half-space geometry for H^2 and H^3.

Points are stored as ``(x_1, ..., x_{d-1}, y)`` with ``y > 0``.  Isometries are
unit-determinant 2x2 matrices acting by Mobius transformations (``d = 2``,
real entries) or by the quaternionic extension ``w -> (aw + b)(cw + d)^-1``
with ``w = x_1 + x_2 i + y j`` (``d = 3``, complex entries).

Most routines come in two flavours: a scalar API on :class:`Point` /
:class:`Isometry`, and array kernels (``distance_array``, ``act``) working on
stacked coordinates of shape ``(..., d)``.  The orbit enumerator and the Monte
Carlo code only use the array kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "Point",
    "Isometry",
    "SpectralParam",
    "origin",
    "hyperbolic_distance",
    "distance_array",
    "apply_isometry",
    "act",
    "canonical_sign",
    "carry_origin_to",
    "log_sinh",
    "unit_sphere_area",
    "unit_ball_volume",
    "ball_volume",
    "log_ball_volume",
    "sphere_area",
    "log_sphere_area",
    "ball_volume_quadrature",
    "theta",
    "log_theta",
    "spectral_param",
    "exp_from_origin",
    "sample_directions",
    "sample_ball",
    "sample_sphere",
]

DET_TOL = 1e-12
SIGN_TOL = 1e-9


@dataclass(frozen=True)
class Point:
    """A point of the upper half-space model of H^d, d in {2, 3}."""

    coords: tuple[float, ...]

    def __init__(self, *coords):
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            coords = tuple(coords[0])
        values = tuple(float(c) for c in coords)
        if len(values) not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {len(values)}")
        if not all(math.isfinite(c) for c in values):
            raise ValueError("coordinates must be finite")
        if values[-1] <= 0.0:
            raise ValueError(f"last coordinate must be positive, got {values[-1]}")
        object.__setattr__(self, "coords", values)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def height(self) -> float:
        return self.coords[-1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        inner = ", ".join(f"{c:.12g}" for c in self.coords)
        return f"Point({inner})"


def origin(d: int = 3) -> Point:
    """The base point ``o = (0, ..., 0, 1)``."""
    return Point(*([0.0] * (d - 1) + [1.0]))


def canonical_sign(m: np.ndarray) -> np.ndarray:
    """Pick the representative of ``{m, -m}`` used for hashing and comparison.

    The first entry (row-major) with modulus above ``1e-9`` is made to have
    argument in ``(-pi/2, pi/2]``.  Works on a single matrix or a stack of
    shape ``(n, 2, 2)``.
    """
    m = np.asarray(m, dtype=complex)
    flat = m.reshape(-1, 4)
    significant = np.abs(flat) > SIGN_TOL
    first = np.argmax(significant, axis=1)
    lead = flat[np.arange(flat.shape[0]), first]
    re, im = lead.real, lead.imag
    # arg in (-pi/2, pi/2]  <=>  re > 0, or re == 0 and im > 0
    keep = (re > 0) | ((re == 0) & (im > 0))
    sign = np.where(keep, 1.0, -1.0)
    return (flat * sign[:, None]).reshape(m.shape)


@dataclass(frozen=True, eq=False)
class Isometry:
    """Orientation-preserving isometry given by a matrix in SL(2, R) or SL(2, C).

    The matrix is stored in canonical sign (see :func:`canonical_sign`).
    """

    matrix: np.ndarray
    dimension: int = 3

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dimension}")
        m = np.array(self.matrix, dtype=complex).reshape(2, 2)
        if self.dimension == 2 and np.any(np.abs(m.imag) > 0):
            raise ValueError("d = 2 isometries need real matrix entries")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1) > DET_TOL:
            raise ValueError(f"determinant must be 1 (got {det})")
        m = canonical_sign(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dimension: int = 3) -> "Isometry":
        return cls(np.eye(2), dimension)

    def inverse(self) -> "Isometry":
        (a, b), (c, d) = self.matrix
        return Isometry(np.array([[d, -b], [-c, a]]), self.dimension)

    def __matmul__(self, other):
        if isinstance(other, Isometry):
            if other.dimension != self.dimension:
                raise ValueError("dimension mismatch")
            m = self.matrix @ other.matrix
            # products of large matrices drift off det = 1 by rounding
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            return Isometry(m / np.sqrt(det), self.dimension)
        if isinstance(other, Point):
            return apply_isometry(self, other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Isometry):
            return NotImplemented
        return self.dimension == other.dimension and np.allclose(
            self.matrix, other.matrix, rtol=0, atol=SIGN_TOL
        )

    __hash__ = None

    @property
    def trace(self) -> complex:
        return complex(self.matrix[0, 0] + self.matrix[1, 1])


def _check_dims(*points: Point) -> int:
    dims = {p.dimension for p in points}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def distance_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hyperbolic distance between stacked points (broadcast over leading axes).

    Uses ``rho = 2 asinh(|p - q| / (2 sqrt(p_y q_y)))``, which is the
    ``cosh rho = 1 + |p - q|^2 / (2 p_y q_y)`` formula without the cancellation
    near the diagonal.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    diff = np.linalg.norm(p - q, axis=-1)
    return 2.0 * np.arcsinh(diff / (2.0 * np.sqrt(p[..., -1] * q[..., -1])))


def hyperbolic_distance(p: Point, q: Point) -> float:
    _check_dims(p, q)
    return float(distance_array(p.as_array(), q.as_array()))


def act(matrices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply 2x2 matrices to points of H^d, vectorized.

    ``matrices`` has shape ``(..., 2, 2)`` and ``points`` shape ``(..., d)``;
    leading axes broadcast.  The dimension is read from the points.
    """
    m = np.asarray(matrices, dtype=complex)
    pts = np.asarray(points, dtype=float)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    dim = pts.shape[-1]
    if dim == 2:
        z = pts[..., 0] + 1j * pts[..., 1]
        w = (a * z + b) / (c * z + d)
        return np.stack(np.broadcast_arrays(w.real, w.imag), axis=-1)
    if dim == 3:
        z = pts[..., 0] + 1j * pts[..., 1]
        t = pts[..., 2]
        czd = c * z + d
        denom = np.abs(czd) ** 2 + np.abs(c) ** 2 * t**2
        zz = ((a * z + b) * np.conj(czd) + a * np.conj(c) * t**2) / denom
        tt = t / denom
        return np.stack(np.broadcast_arrays(zz.real, zz.imag, tt), axis=-1)
    raise ValueError(f"points must have 2 or 3 coordinates, got {dim}")


def apply_isometry(g: Isometry, p: Point) -> Point:
    if g.dimension != p.dimension:
        raise ValueError(
            f"dimension mismatch: isometry d={g.dimension}, point d={p.dimension}"
        )
    return Point(*act(g.matrix, p.as_array()))


def carry_origin_to(center) -> np.ndarray:
    """Matrix of the translation-dilation taking ``o`` to ``center``.

    This is ``[[sqrt(y), (x_1 + i x_2)/sqrt(y)], [0, 1/sqrt(y)]]``; its axis
    through ``o`` stays vertical, which fixes the frame used for sampling.
    """
    c = center.as_array() if isinstance(center, Point) else np.asarray(center, float)
    sy = math.sqrt(c[-1])
    shift = c[0] + (1j * c[1] if c.shape[0] == 3 else 0.0)
    return np.array([[sy, shift / sy], [0.0, 1.0 / sy]], dtype=complex)


# ---------------------------------------------------------------------------
# volumes


def log_sinh(x):
    """``log(sinh(x))`` for ``x >= 0``, accurate for tiny and huge ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x > 20.0
    small = ~big
    with np.errstate(divide="ignore"):
        out[small] = np.log(np.sinh(x[small]))
    xb = x[big]
    out[big] = xb - math.log(2.0) + np.log1p(-np.exp(-2.0 * xb))
    return out if out.ndim else out[()]


def unit_sphere_area(d: int) -> float:
    """Area of the unit sphere S^{d-1} in R^d (2*pi for d=2, 4*pi for d=3)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def unit_ball_volume(k: int) -> float:
    """Volume of the euclidean unit ball in R^k."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def _check_dim_rho(d, rho):
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(~np.isfinite(rho)):
        raise ValueError("radius must be finite and non-negative")
    return rho


def _log_sinh_minus_x(x: np.ndarray) -> np.ndarray:
    """``log(sinh(x) - x)`` for ``x > 0``."""
    out = np.empty_like(x)
    tiny = x < 0.1
    mid = (x >= 0.1) & (x < 30.0)
    big = x >= 30.0
    xt = x[tiny]
    x2 = xt * xt
    series = xt**3 / 6.0 * (
        1 + x2 / 20.0 * (1 + x2 / 42.0 * (1 + x2 / 72.0 * (1 + x2 / 110.0)))
    )
    out[tiny] = np.log(series)
    out[mid] = np.log(np.sinh(x[mid]) - x[mid])
    xb = x[big]
    out[big] = xb - math.log(2.0) + np.log1p(-np.exp(-2 * xb) - 2 * xb * np.exp(-xb))
    return out


def _log_volume_quadrature(d: int, rho: float) -> float:
    # integral of exp((d-1)(log sinh t - rho)) on [0, rho], then shift back
    if rho == 0:
        return -math.inf
    f = lambda t: math.exp((d - 1) * (float(log_sinh(t)) - rho))
    val, _ = integrate.quad(f, 0.0, rho, epsabs=0.0, epsrel=1e-13, limit=200)
    return math.log(unit_sphere_area(d)) + (d - 1) * rho + math.log(val)


def log_ball_volume(d: int, rho):
    """Natural log of the volume of a hyperbolic ball of radius ``rho`` in H^d.

    Closed forms for d = 2, 3; quadrature otherwise.  Finite for rho up to
    the float range of ``rho`` itself (no overflow at rho ~ 500).
    """
    rho = _check_dim_rho(d, rho)
    out = np.full(rho.shape, -np.inf)
    pos = rho > 0
    r = rho[pos]
    if d == 2:
        # 2 pi (cosh r - 1) = 4 pi sinh^2(r/2)
        out[pos] = math.log(4 * math.pi) + 2.0 * log_sinh(r / 2.0)
    elif d == 3:
        # pi (sinh 2r - 2r)
        out[pos] = math.log(math.pi) + _log_sinh_minus_x(2.0 * r)
    else:
        out[pos] = [_log_volume_quadrature(d, float(v)) for v in np.atleast_1d(r)]
    return out if out.ndim else out[()]


def ball_volume(d: int, rho):
    """Volume ``V_d(rho) = omega_{d-1} * int_0^rho sinh^{d-1}(t) dt``."""
    return np.exp(log_ball_volume(d, rho))


def log_sphere_area(d: int, rho):
    rho = _check_dim_rho(d, rho)
    with np.errstate(divide="ignore"):
        return math.log(unit_sphere_area(d)) + (d - 1) * log_sinh(rho)


def sphere_area(d: int, rho):
    """Area of the hyperbolic sphere of radius ``rho``, i.e. ``V_d'(rho)``."""
    return np.exp(log_sphere_area(d, rho))


def ball_volume_quadrature(d: int, rho: float) -> float:
    """Reference value of ``V_d(rho)`` by adaptive quadrature of the integrand.

    Deliberately naive (no closed form, no log-space); meant as a check.
    """
    val, _ = integrate.quad(
        lambda t: math.sinh(t) ** (d - 1), 0.0, rho, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return unit_sphere_area(d) * val


# ---------------------------------------------------------------------------
# theta kernel and spectral parameter


def log_theta(d: int, rho: float, r):
    """Log of ``theta(rho, r) = (2 (cosh rho - cosh r) / e^rho)^((d-1)/2)``.

    Uses ``cosh rho - cosh r = 2 sinh((rho+r)/2) sinh((rho-r)/2)``.
    Returns ``-inf`` at ``|r| = rho``.
    """
    r = np.asarray(r, dtype=float)
    rho = float(rho)
    gap = rho - np.abs(r)
    if np.any(gap < -1e-12 * max(1.0, rho)):
        raise ValueError("theta needs rho > |r|")
    gap = np.maximum(gap, 0.0)
    plus = (rho + np.abs(r)) / 2.0
    with np.errstate(divide="ignore"):
        inner = math.log(4.0) + log_sinh(plus) + log_sinh(gap / 2.0) - rho
    return 0.5 * (d - 1) * inner


def theta(d: int, rho: float, r):
    """The kernel ``theta(rho, r)``; values lie in ``[0, 1)``."""
    return np.exp(log_theta(d, rho, r))


@dataclass(frozen=True)
class SpectralParam:
    """A Laplace eigenvalue ``lam`` with its root ``s`` of ``s(d-1-s) = lam``."""

    lam: float
    s: complex
    dimension: int

    @property
    def half(self) -> float:
        return (self.dimension - 1) / 2.0

    @property
    def residual(self) -> float:
        s = self.s
        return abs(s * (self.dimension - 1 - s) - self.lam)

    @property
    def is_real(self) -> bool:
        return self.s.imag == 0.0


def spectral_param(d: int, lam: float) -> SpectralParam:
    """Root ``s`` of ``s(d-1-s) = lam`` with ``Re(s) <= (d-1)/2``.

    ``s = (d-1)/2 - sqrt((d-1)^2/4 - lam)`` with the principal square root, so
    ``Im(s) <= 0`` above the bottom of the spectrum.  Below it the rationalized
    form ``lam / ((d-1)/2 + sqrt(...))`` avoids cancellation for small ``lam``.
    """
    lam = float(lam)
    if not lam >= 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    half = (d - 1) / 2.0
    disc = half * half - lam
    if disc >= 0:
        root = math.sqrt(disc)
        s = complex(lam / (half + root)) if half + root > 0 else complex(half)
    else:
        s = complex(half, -math.sqrt(-disc))
    return SpectralParam(lam=lam, s=s, dimension=d)


# ---------------------------------------------------------------------------
# sampling


def exp_from_origin(directions: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Exponential map at ``o``: the point at distance ``r`` along ``directions``.

    ``directions`` are unit vectors in the tangent space at ``o`` (which is
    euclidean there), laid out as ``(u_1, ..., u_{d-1}, u_y)``.
    """
    u = np.asarray(directions, dtype=float)
    r = np.asarray(r, dtype=float)
    ch, sh = np.cosh(r), np.sinh(r)
    denom = ch - u[..., -1] * sh
    horiz = u[..., :-1] * (sh / denom)[..., None]
    return np.concatenate([horiz, (1.0 / denom)[..., None]], axis=-1)


def sample_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _radius_inverse_cdf(d: int, rho: float, u: np.ndarray) -> np.ndarray:
    if d == 2:
        # (cosh r - 1) = u (cosh rho - 1)  <=>  sinh(r/2) = sqrt(u) sinh(rho/2)
        return 2.0 * np.arcsinh(np.sqrt(u) * math.sinh(rho / 2.0))
    log_total = float(log_ball_volume(d, rho))
    target = np.log(u) + log_total
    lo = np.zeros_like(u)
    hi = np.full_like(u, rho)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = log_ball_volume(d, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _as_center(center) -> np.ndarray:
    if isinstance(center, Point):
        return center.as_array()
    return np.asarray(center, dtype=float)


def sample_ball(center, rho: float, seed: int, n: int) -> np.ndarray:
    """Draw ``n`` points uniformly (hyperbolic measure) from ``B(center, rho)``.

    Returns an array of shape ``(n, d)``.  Radii follow the density
    ``sinh^{d-1}(t)`` on ``[0, rho]`` via the inverse of ``V_d(t) / V_d(rho)``,
    directions are uniform on the unit tangent sphere at ``o``, and the result
    is moved to ``center`` by :func:`carry_origin_to`.  Same seed, same output.
    """
    if not rho > 0:
        raise ValueError(f"radius must be positive, got {rho}")
    if n < 1:
        raise ValueError("n must be >= 1")
    c = _as_center(center)
    d = c.shape[0]
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    r = _radius_inverse_cdf(d, float(rho), u)
    dirs = sample_directions(rng, n, d)
    return act(carry_origin_to(c), exp_from_origin(dirs, r))


def sample_sphere(center, rho: float, seed: int, n: int) -> np.ndarray:
    """Draw ``n`` points uniformly from the hyperbolic sphere ``S(center, rho)``."""
    if not rho > 0:
        raise ValueError(f"radius must be positive, got {rho}")
    c = _as_center(center)
    d = c.shape[0]
    rng = np.random.default_rng(seed)
    dirs = sample_directions(rng, n, d)
    return act(carry_origin_to(c), exp_from_origin(dirs, np.full(n, float(rho))))
