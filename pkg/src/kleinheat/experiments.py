"""Experiments combining orbit counts, heat kernels and volumes.

``main_theorem_table`` tabulates ``N(x, x, rho) / (p_Gamma(x, x, rho/2) V_3(rho))``.
The asymptotic equivalence behind this ratio is only expected for groups whose
heat kernel decays polynomially in time, which none of the bundled examples
do (they are geometrically finite with critical exponent below 2).  The table
is a report; nothing here asserts that the ratio converges.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .heat import heat_kernel_quotient
from .hyperbolic import Point, ball_volume, sample_ball
from .orbits import (
    GroupPresentation,
    critical_exponent_estimate,
    enumerate_orbit,
    orbital_count,
    orbital_scalar_product,
)

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "ExperimentRow",
    "main_theorem_table",
    "SandwichReport",
    "sandwich_suite",
    "ExponentReport",
    "exponent_sweep",
    "rows_to_csv",
    "to_json",
]

SCHEMA_VERSION = 1
CSV_COLUMNS = ("rho", "N", "p", "p_tail", "V", "ratio", "complete")
HYPOTHESIS_NOTE = (
    "polynomial lower bound on the heat kernel is assumed, not verified; "
    "bundled groups are geometrically finite with critical exponent < 2"
)


@dataclass
class ExperimentRow:
    """One radius of the counting table."""

    rho: float
    count_N: int
    heat_p: float
    heat_tail: float
    volume_V: float
    ratio: float
    complete: bool
    flags: dict = field(default_factory=dict)
    reference: dict = field(default_factory=dict)

    def csv_record(self) -> list:
        return [
            repr(self.rho),
            str(self.count_N),
            repr(self.heat_p),
            repr(self.heat_tail),
            repr(self.volume_V),
            repr(self.ratio),
            "true" if self.complete else "false",
        ]


def main_theorem_table(
    G: GroupPresentation,
    x: Point,
    rho_grid: Sequence[float],
    eps: float = 1e-12,
    *,
    alpha: float | None = None,
) -> list[ExperimentRow]:
    """Rows ``(rho, N, p, V, N/(p V))`` with ``t = rho/2`` and completeness flags.

    ``alpha`` is the exponent of the assumed lower bound ``p >= t^-alpha``; it
    is recorded in the flags only.
    """
    if G.dimension != 3:
        raise ValueError("the counting table is defined in dimension 3")
    rhos = sorted(float(r) for r in rho_grid)
    rows = []
    for rho in rhos:
        ball = enumerate_orbit(G, x, x, rho)
        hv = heat_kernel_quotient(G, x, x, rho / 2, eps, require_complete=False)
        V = float(ball_volume(3, rho))
        n = ball.count
        complete = ball.complete and math.isfinite(hv.tail_bound)
        rows.append(
            ExperimentRow(
                rho=rho,
                count_N=n,
                heat_p=hv.value,
                heat_tail=hv.tail_bound,
                volume_V=V,
                ratio=n / (hv.value * V),
                complete=complete,
                flags={
                    "orbit_complete": ball.complete,
                    "tail_certified": math.isfinite(hv.tail_bound),
                    "hypothesis_verified": False,
                    "alpha": alpha,
                    "note": HYPOTHESIS_NOTE,
                },
                reference={
                    "exp2rho_over_sqrt_rho": math.exp(2 * rho) / math.sqrt(rho),
                    "exp2rho_over_rho_1.5": math.exp(2 * rho) / rho**1.5,
                },
            )
        )
    return rows


# ---------------------------------------------------------------------------
# sandwich


@dataclass
class SandwichReport:
    configs: int
    violations: list[dict] = field(default_factory=list)
    averaged: list[dict] = field(default_factory=list)
    complete: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations and all(a["ok"] for a in self.averaged)


def sandwich_suite(
    G: GroupPresentation,
    x: Point,
    y: Point,
    delta_grid: Sequence[float],
    rho_grid: Sequence[float],
    *,
    n_configs: int = 1000,
    seed: int = 0,
    spread: float = 1.0,
    mc_samples: int = 200,
) -> SandwichReport:
    """Check ``N(x, z, rho - delta) <= N(x, w, rho) <= N(x, z, rho + delta)``.

    Each configuration draws ``delta`` and ``rho`` from the grids, ``z``
    uniformly in ``B(y, spread)`` and ``w`` uniformly in ``B(z, delta)``.  The
    averaged chain ``V(rho - 2 delta) <O^{rho - 2 delta}> <= N(x, y, rho)
    <= V(rho + 2 delta) <O^{rho + 2 delta}>`` is checked as well for every
    grid pair with ``rho - 2 delta > 2 delta``; both averages use the same
    samples, so the chain holds exactly rather than up to Monte Carlo error.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    rhos = np.asarray(rho_grid, dtype=float)
    if np.any(deltas <= 0) or np.any(rhos <= deltas.max()):
        raise ValueError("need delta > 0 and rho > max delta")
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**62, size=(n_configs, 2))
    rep = SandwichReport(n_configs)
    for k in range(n_configs):
        delta = float(deltas[rng.integers(len(deltas))])
        rho = float(rhos[rng.integers(len(rhos))])
        z = Point(*sample_ball(y, spread, int(seeds[k, 0]), 1)[0])
        w = Point(*sample_ball(z, delta, int(seeds[k, 1]), 1)[0])
        lo_ball = enumerate_orbit(G, x, z, rho + delta)
        lo = lo_ball.within(rho - delta)
        hi = lo_ball.count
        mid_ball = enumerate_orbit(G, x, w, rho)
        mid = mid_ball.count
        rep.complete &= lo_ball.complete and mid_ball.complete
        if not lo <= mid <= hi:
            rep.violations.append(
                {"rho": rho, "delta": delta, "z": list(z.coords), "w": list(w.coords),
                 "lower": lo, "middle": mid, "upper": hi}
            )
    for delta in deltas:
        for rho in rhos:
            if rho - 2 * delta <= 2 * delta:
                continue
            n = orbital_count(G, x, y, rho)
            lo = orbital_scalar_product(G, x, y, delta, rho - 2 * delta, mc_samples, seed)
            hi = orbital_scalar_product(G, x, y, delta, rho + 2 * delta, mc_samples, seed)
            vlo = float(ball_volume(G.dimension, rho - 2 * delta))
            vhi = float(ball_volume(G.dimension, rho + 2 * delta))
            a, b = lo.value * vlo, hi.value * vhi
            rep.averaged.append(
                {"rho": float(rho), "delta": float(delta), "lower": a, "N": n, "upper": b,
                 "ok": a <= n * (1 + 1e-12) and n <= b * (1 + 1e-12)}
            )
    return rep


# ---------------------------------------------------------------------------
# exponent


@dataclass
class ExponentReport:
    rhos: list[float]
    counts: list[int]
    estimate: float
    window_estimates: list[float]
    complete: bool

    @property
    def spread(self) -> float:
        return max(self.window_estimates) - min(self.window_estimates)


def exponent_sweep(G: GroupPresentation, x: Point, rho_grid: Sequence[float]) -> ExponentReport:
    """Growth rate of ``N(x, x, rho)`` on the grid, with a two-window stability check.

    The windows are the full grid and the grid without its last quarter; the
    estimator itself fits the upper half of whatever it is given.
    """
    rhos = sorted(float(r) for r in rho_grid)
    if len(rhos) < 4:
        raise ValueError("need at least 4 radii")
    ball = enumerate_orbit(G, x, x, rhos[-1])
    counts = [ball.within(r) for r in rhos]
    data = list(zip(rhos, counts))
    cut = len(data) - max(1, len(data) // 4)
    windows = [critical_exponent_estimate(data), critical_exponent_estimate(data[:cut])]
    return ExponentReport(rhos, counts, windows[0], windows, ball.complete)


# ---------------------------------------------------------------------------
# output


def rows_to_csv(rows: Sequence[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_record())
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(payload, **meta) -> str:
    """Serialize a report (dataclass, list of dataclasses or dict) with ``schema_version``."""
    if isinstance(payload, list):
        body = [asdict(p) if hasattr(p, "__dataclass_fields__") else p for p in payload]
    elif hasattr(payload, "__dataclass_fields__"):
        body = asdict(payload)
    else:
        body = payload
    doc = {"schema_version": SCHEMA_VERSION, **meta, "results": body}
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
