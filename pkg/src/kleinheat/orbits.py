"""Orbit enumeration and the orbital counting function ``N(x, y, rho)``.

The enumerator walks reduced words in the generators breadth first.  How a
branch is cut depends on what is known about the group:

* trivial group: nothing to walk;
* cyclic loxodromic or parabolic group: ``d(y, g^n y)`` has an explicit lower
  bound in ``n`` (translation length, or the exact parabolic growth), so the
  powers ``g^n`` are listed directly up to where that bound exceeds the radius;
* Schottky group whose isometric circles are pairwise disjoint (checked when
  ``is_free_hint`` is set): every extension of ``u . v_1`` sends ``y`` into
  the half-space ``u H_{v_1}``, whose distance to ``x`` is a lower bound;
* anything else: a word is extended while ``d(x, w y) <= rho + margin``.

The first three are exhaustive and the result is flagged ``complete``; the
last one is a lower bound.  Discreteness of the input group is trusted, not
checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .hyperbolic import (
    Isometry,
    Point,
    act,
    ball_volume,
    canonical_sign,
    distance_array,
    sample_ball,
)

__all__ = [
    "GroupPresentation",
    "GroupFileError",
    "OrbitBall",
    "OrbitEnumerationError",
    "MCEstimate",
    "load_group",
    "bundled_group",
    "bundled_group_names",
    "enumerate_orbit",
    "orbital_count",
    "orbit_oracle",
    "orbital_count_oracle",
    "critical_exponent_estimate",
    "orbital_scalar_product",
    "DEFAULT_FRONTIER_CAP",
]

DEFAULT_FRONTIER_CAP = 50_000_000
ORACLE_BUDGET = 10_000_000
RADIUS_TOL = 1e-9
MATRIX_TOL = 1e-9
RENORMALIZE_TOL = 1e-6


class GroupFileError(ValueError):
    """A group file could not be parsed or describes an invalid group."""


class OrbitEnumerationError(RuntimeError):
    """Raised when the walk exceeds its frontier budget."""


def _inverse_matrix(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out


def _same_element(m1: np.ndarray, m2: np.ndarray, tol: float = MATRIX_TOL) -> bool:
    return bool(np.allclose(m1, m2, rtol=0, atol=tol) or np.allclose(m1, -m2, rtol=0, atol=tol))


@dataclass
class GroupPresentation:
    """A finite symmetric generating set of a discrete group of isometries.

    ``generators`` is closed under inversion; ``inverse_index[i]`` is the
    position of the inverse of generator ``i``.
    """

    dimension: int
    generators: list[Isometry]
    name: str = ""
    pruning_margin: float | None = None
    is_free_hint: bool = False
    inverse_index: list[int] = field(init=False)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise GroupFileError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.pruning_margin is not None and self.pruning_margin < 0:
            raise GroupFileError("pruning_margin must be >= 0")
        gens = list(self.generators)
        for g in gens:
            if g.dimension != self.dimension:
                raise GroupFileError("generator dimension does not match the group")
        closed: list[Isometry] = []
        for g in gens:
            if _is_identity(g.matrix):
                continue
            if not any(_same_element(g.matrix, h.matrix) for h in closed):
                closed.append(g)
        for g in list(closed):
            ginv = g.inverse()
            if not any(_same_element(ginv.matrix, h.matrix) for h in closed):
                closed.append(ginv)
        inv = []
        for g in closed:
            ginv = g.inverse().matrix
            j = next(k for k, h in enumerate(closed) if _same_element(ginv, h.matrix))
            inv.append(j)
        self.generators = closed
        self.inverse_index = inv

    @classmethod
    def from_matrices(cls, matrices, dimension: int, **kwargs) -> "GroupPresentation":
        gens = [Isometry(_renormalize(np.asarray(m, dtype=complex)), dimension) for m in matrices]
        return cls(dimension=dimension, generators=gens, **kwargs)

    @property
    def matrices(self) -> np.ndarray:
        if not self.generators:
            return np.zeros((0, 2, 2), dtype=complex)
        return np.stack([g.matrix for g in self.generators])

    @property
    def is_trivial(self) -> bool:
        return not self.generators

    @property
    def is_cyclic(self) -> bool:
        return len(self.generators) == 2 and self.inverse_index == [1, 0]

    def default_margin(self, y: Point) -> float:
        """``max_g d(y, g y)``: how far a single letter can move the orbit point."""
        if self.is_trivial:
            return 0.0
        pts = act(self.matrices, y.as_array())
        return float(np.max(distance_array(pts, y.as_array())))

    def margin(self, y: Point) -> float:
        if self.pruning_margin is not None:
            return float(self.pruning_margin)
        return self.default_margin(y)

    def to_json(self) -> dict:
        """Serialize in the group-file format (inverses are included)."""
        gens = [
            [[[float(v.real), float(v.imag)] for v in row] for row in g.matrix]
            for g in self.generators
        ]
        return {
            "name": self.name,
            "dimension": self.dimension,
            "generators": gens,
            "is_free_hint": self.is_free_hint,
            "pruning_margin": self.pruning_margin,
        }


def _is_identity(m: np.ndarray) -> bool:
    return _same_element(m, np.eye(2))


def _renormalize(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1) > RENORMALIZE_TOL:
        raise GroupFileError(f"generator determinant {det} is not 1 (tolerance 1e-6)")
    return m / np.sqrt(det)


def _parse_entry(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise GroupFileError(f"matrix entry must be [re, im], got {v!r}")


def _parse_group(data, source: str) -> GroupPresentation:
    if not isinstance(data, dict):
        raise GroupFileError(f"{source}: top level must be an object")
    try:
        dim = data["dimension"]
        raw = data["generators"]
    except KeyError as exc:
        raise GroupFileError(f"{source}: missing field {exc}") from None
    if dim not in (2, 3):
        raise GroupFileError(f"{source}: dimension must be 2 or 3, got {dim!r}")
    if not isinstance(raw, list):
        raise GroupFileError(f"{source}: generators must be a list")
    mats = []
    for k, g in enumerate(raw):
        if not (isinstance(g, list) and len(g) == 2 and all(isinstance(r, list) and len(r) == 2 for r in g)):
            raise GroupFileError(f"{source}: generator {k} must be a 2x2 matrix")
        m = np.array([[_parse_entry(v) for v in row] for row in g], dtype=complex)
        if dim == 2 and np.any(m.imag != 0):
            raise GroupFileError(f"{source}: generator {k} has imaginary parts but dimension is 2")
        mats.append(m)
    margin = data.get("pruning_margin")
    if margin is not None and not isinstance(margin, (int, float)):
        raise GroupFileError(f"{source}: pruning_margin must be a number or null")
    try:
        return GroupPresentation.from_matrices(
            mats,
            dim,
            name=str(data.get("name", "")),
            pruning_margin=None if margin is None else float(margin),
            is_free_hint=bool(data.get("is_free_hint", False)),
        )
    except ValueError as exc:
        raise GroupFileError(f"{source}: {exc}") from None


def load_group(path) -> GroupPresentation:
    """Read a group file (JSON).  Inverses are added, determinants renormalized."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise GroupFileError(f"{path}: invalid JSON ({exc})") from None
    return _parse_group(data, str(path))


def bundled_group_names() -> list[str]:
    files = resources.files("kleinheat") / "data"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def bundled_group(name: str) -> GroupPresentation:
    """Load one of the example groups shipped with the package."""
    ref = resources.files("kleinheat") / "data" / f"{name}.json"
    if not ref.is_file():
        raise GroupFileError(
            f"no bundled group {name!r}; available: {', '.join(bundled_group_names())}"
        )
    return _parse_group(json.loads(ref.read_text()), name)


# ---------------------------------------------------------------------------
# certified pruning


def _halfspace_distance(points: np.ndarray, center: complex, radius: float) -> np.ndarray:
    """Distance from points to the closed half-space under the hemisphere ``|w - center| = radius``."""
    z = points[..., 0] + (1j * points[..., 1] if points.shape[-1] == 3 else 0.0)
    t = points[..., -1]
    q = np.abs(z - center) ** 2 + t * t - radius * radius
    return np.where(q <= 0, 0.0, np.arcsinh(q / (2.0 * radius * t)))


class _PingPong:
    """Disjoint isometric-circle configuration of a classical Schottky group.

    Letter ``g = [[a, b], [c, d]]`` maps the outside of its isometric circle
    ``|cz + d| = 1`` into the disk ``|z - a/c| < 1/|c|``; that disk bounds the
    half-space ``H_g``.
    """

    def __init__(self, group: GroupPresentation):
        mats = group.matrices
        c = mats[:, 1, 0]
        self.centers = mats[:, 0, 0] / c
        self.radii = 1.0 / np.abs(c)

    @classmethod
    def verify(cls, group: GroupPresentation) -> "_PingPong | None":
        """The configuration, if every pair of half-spaces is separated."""
        if not group.is_free_hint or group.is_trivial:
            return None
        mats = group.matrices
        if np.any(np.abs(mats[:, 1, 0]) < 1e-12):
            return None
        pp = cls(group)
        k = len(pp.radii)
        for i in range(k):
            for j in range(i + 1, k):
                gap = abs(pp.centers[i] - pp.centers[j]) - pp.radii[i] - pp.radii[j]
                if gap <= 1e-9:
                    return None
        return pp

    def containing(self, p: np.ndarray) -> int | None:
        """Index of a half-space containing ``p`` (closed), or None."""
        for i in range(len(self.radii)):
            if _halfspace_distance(p, self.centers[i], self.radii[i]) <= 0.0:
                return i
        return None

    def reduce(self, group: GroupPresentation, y: np.ndarray, max_steps: int = 10_000):
        """Move ``y`` outside every half-space by inverse letters.

        Returns ``(y', letters)`` with ``y = g_1 ... g_k y'``.  Each step maps a
        point of ``H_g`` by ``g^-1`` to the outside of ``H_{g^-1}``.
        """
        letters: list[int] = []
        mats = group.matrices
        for _ in range(max_steps):
            i = self.containing(y)
            if i is None:
                return y, letters
            y = act(mats[group.inverse_index[i]], y)
            letters.append(i)
        return None, letters

    def child_bounds(self, inv_x: np.ndarray, letter: int) -> np.ndarray:
        """Lower bound on ``d(x, u g w y)`` for all reduced ``u g w`` (``inv_x = u^-1 x``)."""
        return _halfspace_distance(inv_x, self.centers[letter], self.radii[letter])


class _Cyclic:
    """Lower bounds ``d(x, g^n y) >= D(n) - d(x, y)`` for a cyclic group."""

    def __init__(self, kind: str, value: float, dxy: float):
        self.kind = kind
        self.value = value
        self.dxy = dxy

    @classmethod
    def verify(cls, group: GroupPresentation, x: Point, y: Point) -> "_Cyclic | None":
        if not group.is_cyclic:
            return None
        g = group.matrices[0]
        tr = complex(g[0, 0] + g[1, 1])
        dxy = float(distance_array(x.as_array(), y.as_array()))
        if abs(tr.imag) < 1e-12 and abs(abs(tr.real) - 2.0) < 1e-12:
            gy = act(g, y.as_array())
            step = float(distance_array(gy, y.as_array()))
            return cls("parabolic", math.cosh(step) - 1.0, dxy)
        if abs(tr.imag) < 1e-12 and abs(tr.real) < 2.0:
            return None  # elliptic
        disc = np.sqrt(complex(tr * tr - 4))
        ev = max(abs((tr + disc) / 2), abs((tr - disc) / 2))
        return cls("loxodromic", 2.0 * math.log(ev), dxy)

    def bound(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.kind == "loxodromic":
            disp = n * self.value
        else:
            disp = np.arccosh(1.0 + n * n * self.value)
        return np.maximum(disp - self.dxy, 0.0)


# ---------------------------------------------------------------------------
# dedup


class _MatrixSet:
    """Tolerance-based set of group elements, modulo sign.

    Stored as a few KD-trees of geometrically decreasing size; a new batch
    is merged with the smaller trees like a carry in a binary counter, so
    inserting n elements one level at a time costs O(n log^2 n) overall.
    """

    def __init__(self):
        self._trees: list[cKDTree] = []

    @staticmethod
    def _vectors(mats: np.ndarray) -> np.ndarray:
        m = canonical_sign(mats).reshape(-1, 4)
        scale = np.maximum(1.0, np.abs(m).max(axis=1))
        return (m / scale[:, None]).view(float).reshape(-1, 8)

    def _contains(self, v: np.ndarray) -> np.ndarray:
        hit = np.zeros(len(v), dtype=bool)
        for tree in self._trees:
            d1, _ = tree.query(v, distance_upper_bound=MATRIX_TOL)
            d2, _ = tree.query(-v, distance_upper_bound=MATRIX_TOL)
            hit |= np.isfinite(d1) | np.isfinite(d2)
        return hit

    def add(self, mats: np.ndarray) -> np.ndarray:
        """Insert a batch; return the mask of entries that were not present."""
        v = self._vectors(mats)
        n = v.shape[0]
        fresh = np.ones(n, dtype=bool)
        if n == 0:
            return fresh
        tree = cKDTree(v)
        for i, j in tree.query_pairs(MATRIX_TOL):
            fresh[max(i, j)] = False
        for i, hits in enumerate(tree.query_ball_point(-v, MATRIX_TOL)):
            for j in hits:
                if j > i:
                    fresh[j] = False
        fresh &= ~self._contains(v)
        data = v[fresh]
        while self._trees and self._trees[-1].n <= 2 * len(data):
            data = np.concatenate([self._trees.pop().data, data])
        if len(data):
            self._trees.append(cKDTree(data))
        return fresh


# ---------------------------------------------------------------------------
# enumeration


@dataclass
class OrbitBall:
    """Orbit points ``gamma y`` inside ``B(x, radius)``, sorted by (distance, word)."""

    basepoint_x: Point
    basepoint_y: Point
    radius: float
    points: np.ndarray
    distances: np.ndarray
    words: Sequence[tuple[int, ...]]
    matrices: np.ndarray
    complete: bool
    explored: int = 0

    def __len__(self) -> int:
        return len(self.words)

    @property
    def count(self) -> int:
        return len(self.words)

    def entries(self):
        """Yield ``(Point, distance, word)`` triples."""
        for p, dist, w in zip(self.points, self.distances, self.words):
            yield Point(*p), float(dist), w

    def within(self, rho: float) -> int:
        """Number of listed points at distance ``<= rho`` (for ``rho <= radius``)."""
        return int(np.count_nonzero(self.distances <= rho + RADIUS_TOL))

    def min_gap(self) -> float:
        """Smallest nonzero distance from ``x`` to a listed point (``inf`` if none)."""
        nz = self.distances[self.distances > 1e-9]
        return float(nz.min()) if nz.size else math.inf


def _word(parents: list[int], letters: list[int], idx: int) -> tuple[int, ...]:
    out = []
    while idx > 0:
        out.append(letters[idx])
        idx = parents[idx]
    return tuple(reversed(out))


def _free_reduce(word: tuple[int, ...], inverse: list[int]) -> tuple[int, ...]:
    out: list[int] = []
    for a in word:
        if out and inverse[out[-1]] == a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def _check_points(G: GroupPresentation, *pts: Point):
    for p in pts:
        if p.dimension != G.dimension:
            raise ValueError(
                f"point of dimension {p.dimension} for a group of dimension {G.dimension}"
            )


def enumerate_orbit(
    G: GroupPresentation,
    x: Point,
    y: Point,
    rho: float,
    *,
    frontier_cap: int = DEFAULT_FRONTIER_CAP,
) -> OrbitBall:
    """All orbit points ``gamma y`` with ``d(x, gamma y) <= rho`` reachable by the walk.

    Raises :class:`OrbitEnumerationError` once more than ``frontier_cap``
    words have been generated.
    """
    if not rho >= 0:
        raise ValueError(f"radius must be >= 0, got {rho}")
    _check_points(G, x, y)
    xa, ya = x.as_array(), y.as_array()
    gens = G.matrices
    k = len(gens)
    inv = np.asarray(G.inverse_index, dtype=int)

    cyclic = _Cyclic.verify(G, x, y)
    pingpong = None if cyclic else _PingPong.verify(G)
    shift: list[int] = []
    if pingpong is not None:
        # enumerate the orbit of a representative outside all half-spaces
        y_red, shift = pingpong.reduce(G, ya)
        if y_red is None:
            pingpong = None
            shift = []
        else:
            ya = y_red
    if cyclic is not None:
        return _enumerate_cyclic(G, x, y, rho, cyclic, frontier_cap)
    complete = G.is_trivial or cyclic is not None or pingpong is not None
    margin = 0.0 if complete else G.margin(y)
    cut = rho + RADIUS_TOL

    seen = _MatrixSet()
    seen.add(np.eye(2, dtype=complex)[None])
    parents, letters = [0], [-1]
    kept_idx, kept_pts, kept_dist, kept_mats = [], [], [], []

    d0 = float(distance_array(xa, ya))
    if d0 <= cut:
        kept_idx.append(0)
        kept_pts.append(ya[None])
        kept_dist.append(np.array([d0]))
        kept_mats.append(np.eye(2, dtype=complex)[None])

    f_mats = np.eye(2, dtype=complex)[None]
    f_last = np.array([-1])
    f_idx = np.array([0])
    depth = 0
    if not complete and d0 > rho + margin + RADIUS_TOL:
        f_mats = f_mats[:0]
    explored = 1

    while len(f_mats) and k:
        depth += 1
        child_mats, child_last, child_parent = [], [], []
        inv_x = act(_inverse_matrix(f_mats), xa) if pingpong is not None else None
        for j in range(k):
            ok = f_last != inv[j]
            if pingpong is not None:
                ok &= pingpong.child_bounds(inv_x, j) <= cut
            elif cyclic is not None:
                ok &= bool(cyclic.bound(depth) <= cut)
            if not np.any(ok):
                continue
            child_mats.append(f_mats[ok] @ gens[j])
            child_last.append(np.full(int(ok.sum()), j))
            child_parent.append(f_idx[ok])
        if not child_mats:
            break
        mats = np.concatenate(child_mats)
        last = np.concatenate(child_last)
        par = np.concatenate(child_parent)
        explored += len(mats)
        if explored > frontier_cap:
            raise OrbitEnumerationError(
                f"more than {frontier_cap} words generated at depth {depth}; radius {rho} too large"
            )
        fresh = seen.add(mats)
        mats, last, par = mats[fresh], last[fresh], par[fresh]
        pts = act(mats, ya)
        dist = distance_array(pts, xa)
        start = len(parents)
        parents.extend(par.tolist())
        letters.extend(last.tolist())
        idx = np.arange(start, start + len(mats))

        inside = dist <= cut
        if np.any(inside):
            kept_idx.extend(idx[inside].tolist())
            kept_pts.append(pts[inside])
            kept_dist.append(dist[inside])
            kept_mats.append(mats[inside])

        grow = np.ones(len(mats), dtype=bool) if complete else dist <= rho + margin + RADIUS_TOL
        f_mats, f_last, f_idx = mats[grow], last[grow], idx[grow]

    words = [_word(parents, letters, i) for i in kept_idx]
    pts = np.concatenate(kept_pts) if kept_pts else np.zeros((0, G.dimension))
    dist = np.concatenate(kept_dist) if kept_dist else np.zeros(0)
    mats = np.concatenate(kept_mats) if kept_mats else np.zeros((0, 2, 2), dtype=complex)
    if shift:
        # gamma' y' = (gamma' u^-1) y with y = u y'
        tail = tuple(G.inverse_index[i] for i in reversed(shift))
        u_inv = np.eye(2, dtype=complex)
        for i in tail:
            u_inv = u_inv @ gens[i]
        words = [_free_reduce(w + tail, G.inverse_index) for w in words]
        mats = canonical_sign(mats @ u_inv)
    order = sorted(range(len(words)), key=lambda i: (float(dist[i]), words[i]))
    return OrbitBall(
        basepoint_x=x,
        basepoint_y=y,
        radius=float(rho),
        points=pts[order],
        distances=dist[order],
        words=[words[i] for i in order],
        matrices=mats[order],
        complete=complete,
        explored=explored,
    )


def _powers(g: np.ndarray, n: int) -> np.ndarray:
    """``g^0, ..., g^n`` by doubling."""
    out = np.empty((n + 1, 2, 2), dtype=complex)
    out[0] = np.eye(2)
    m, step = 1, g.copy()
    out[1:2] = g
    while m < n + 1:
        k = min(m, n + 1 - m)
        out[m : m + k] = out[:k] @ step
        m += k
        step = step @ step
    return out


class PowerWords(Sequence):
    """Words ``g^n`` of a cyclic group, stored as signed exponents.

    Item ``i`` is ``(0,) * n`` for ``n >= 0`` and ``(1,) * -n`` otherwise,
    built on access; listing long parabolic orbits as tuples would take
    memory quadratic in the radius.
    """

    def __init__(self, exponents):
        self.exponents = np.asarray(exponents, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.exponents)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        n = int(self.exponents[i])
        return (0,) * n if n >= 0 else (1,) * -n

    def __eq__(self, other) -> bool:
        if isinstance(other, PowerWords):
            return bool(np.array_equal(self.exponents, other.exponents))
        if isinstance(other, (list, tuple)):
            return len(other) == len(self) and all(a == b for a, b in zip(self, other))
        return NotImplemented

    def __repr__(self) -> str:
        return f"PowerWords({self.exponents.tolist()!r})"


def _enumerate_cyclic(G, x, y, rho, cyclic: _Cyclic, frontier_cap: int) -> OrbitBall:
    # the walk would visit one power per level; list the powers directly
    cut = rho + RADIUS_TOL
    n_max = 1
    while cyclic.bound(n_max) <= cut:
        n_max *= 2
        if 2 * n_max + 1 > frontier_cap:
            raise OrbitEnumerationError(
                f"more than {frontier_cap} powers needed; radius {rho} too large"
            )
    pos = _powers(G.matrices[0], n_max)
    neg = _powers(G.matrices[1], n_max)[1:]
    mats = canonical_sign(np.concatenate([pos, neg]))
    exps = np.concatenate([np.arange(n_max + 1), -np.arange(1, n_max + 1)])
    pts = act(mats, y.as_array())
    dist = distance_array(pts, x.as_array())
    keep = np.flatnonzero(dist <= cut)
    # same order as sorting by (distance, word tuple)
    order = keep[np.lexsort((np.abs(exps[keep]), exps[keep] < 0, dist[keep]))]
    return OrbitBall(
        basepoint_x=x,
        basepoint_y=y,
        radius=float(rho),
        points=pts[order],
        distances=dist[order],
        words=PowerWords(exps[order]),
        matrices=mats[order],
        complete=True,
        explored=len(mats),
    )


def orbital_count(G: GroupPresentation, x: Point, y: Point, rho: float, **kwargs) -> int:
    """``N(x, y, rho)``: the number of orbit points of ``y`` in ``B(x, rho)``."""
    return enumerate_orbit(G, x, y, rho, **kwargs).count


# ---------------------------------------------------------------------------
# brute-force oracle


class OraclePoints(NamedTuple):
    points: np.ndarray
    distances: np.ndarray
    matrices: np.ndarray


def _grid_keys(mats: np.ndarray, digits: int = 7):
    m = canonical_sign(mats).reshape(-1, 4)
    scale = np.maximum(1.0, np.abs(m).max(axis=1))
    v = (m / scale[:, None]).view(float).reshape(-1, 8) * 10.0**digits
    a = np.round(v).astype(np.int64)
    b = np.round(v + 0.5).astype(np.int64)
    return [tuple(r) for r in a], [tuple(r) for r in b]


def orbit_oracle(
    G: GroupPresentation, x: Point, y: Point, rho: float, max_word_length: int
) -> OraclePoints:
    """Orbit points within ``rho`` among ALL words of length ``<= max_word_length``.

    No distance pruning, no reduced-word logic; duplicates are merged by
    rounding canonical matrices on two staggered grids.
    """
    _check_points(G, x, y)
    k = len(G.generators)
    if k and k**max_word_length > ORACLE_BUDGET:
        raise OrbitEnumerationError(
            f"{k}^{max_word_length} words exceed the oracle budget of {ORACLE_BUDGET}"
        )
    gens = G.matrices
    seen_a: set = set()
    seen_b: set = set()
    level = np.eye(2, dtype=complex)[None]
    ka, kb = _grid_keys(level)
    seen_a.update(ka)
    seen_b.update(kb)
    found = [level]
    for _ in range(max_word_length):
        if not k or not len(level):
            break
        cand = (level[:, None] @ gens[None]).reshape(-1, 2, 2)
        ka, kb = _grid_keys(cand)
        keep = []
        for i, (a, b) in enumerate(zip(ka, kb)):
            if a in seen_a or b in seen_b:
                continue
            seen_a.add(a)
            seen_b.add(b)
            keep.append(i)
        level = cand[keep]
        found.append(level)
    mats = np.concatenate(found)
    pts = act(mats, y.as_array())
    dist = distance_array(pts, x.as_array())
    inside = dist <= rho + RADIUS_TOL
    return OraclePoints(pts[inside], dist[inside], mats[inside])


def orbital_count_oracle(
    G: GroupPresentation, x: Point, y: Point, rho: float, max_word_length: int
) -> int:
    return len(orbit_oracle(G, x, y, rho, max_word_length).distances)


# ---------------------------------------------------------------------------
# derived quantities


def critical_exponent_estimate(counts: Sequence[tuple[float, int]]) -> float:
    """Slope of ``log N`` against ``rho`` over the upper half of the samples."""
    data = sorted((float(r), int(n)) for r, n in counts)
    if len(data) < 3:
        raise ValueError("need at least 3 (rho, N) samples")
    rhos = np.array([r for r, _ in data])
    ns = np.array([n for _, n in data], dtype=float)
    if np.any(ns < 1):
        raise ValueError("all counts must be >= 1")
    if np.any(np.diff(rhos) <= 0):
        raise ValueError("radii must be strictly increasing")
    tail = slice(len(data) // 2, None)
    slope, _ = np.polyfit(rhos[tail], np.log(ns[tail]), 1)
    return float(slope)


class MCEstimate(NamedTuple):
    value: float
    stderr: float
    samples: int
    complete: bool = True


def orbital_scalar_product(
    G: GroupPresentation,
    x: Point,
    y: Point,
    delta: float,
    rho: float,
    mc_samples: int = 2000,
    seed: int = 0,
    *,
    chunk: int = 512,
) -> MCEstimate:
    """Monte Carlo estimate of ``<O^rho(X_delta), Y_delta>``.

    This is the mean of ``N(w, z, rho) / V_d(rho)`` for ``w`` and ``z`` uniform
    in ``B(x, delta)`` and ``B(y, delta)``.  Group elements are enumerated
    once at radius ``rho + 2 delta`` around ``(x, y)``, which contains every
    element that can contribute.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not rho > 2 * delta:
        raise ValueError("need rho > 2 delta")
    ball = enumerate_orbit(G, x, y, rho + 2 * delta)
    ss = np.random.SeedSequence(seed)
    sw, sz = ss.spawn(2)
    w = sample_ball(x, delta, int(sw.generate_state(1)[0]), mc_samples)
    z = sample_ball(y, delta, int(sz.generate_state(1)[0]), mc_samples)
    counts = np.empty(mc_samples)
    for lo in range(0, mc_samples, chunk):
        hi = min(lo + chunk, mc_samples)
        moved = act(ball.matrices[:, None], z[None, lo:hi])
        dist = distance_array(moved, w[None, lo:hi])
        counts[lo:hi] = np.count_nonzero(dist <= rho + RADIUS_TOL, axis=0)
    vol = float(ball_volume(G.dimension, rho))
    err = counts.std(ddof=1) / math.sqrt(mc_samples) if mc_samples > 1 else math.inf
    return MCEstimate(counts.mean() / vol, err / vol, mc_samples, ball.complete)
