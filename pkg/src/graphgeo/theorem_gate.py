"""Hypothesis gate and dichotomy classification for the rigidity statement.

The gate sweeps a sample grid, measures per-point geometry (singular values,
trace of the deficit tensor, second-fundamental-form norms, sectional
curvature ranges), evaluates every hypothesis with explicit worst-case
margins, and classifies the map against the constant / totally-geodesic
dichotomy.  All maxima are taken over the sample grid of the chart box, so
every verdict is box-local; no global claim is made.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chart_manifold import ChartPoint, sectional_from_data
from .errors import DegeneratePlaneError
from .extrinsic import MINIMAL_TOL
from .graph_map import SmoothMap
from .identities import PointData

Array = np.ndarray

#: Margin required for numerically strict inequalities.
STRICT_MARGIN = 1e-9

DEFAULT_TOLERANCES: dict[str, float] = {
    "minimality": MINIMAL_TOL,
    "gate_slack": 1e-9,            # slack allowed on non-strict gate inequalities
    "classify_constant": 1e-8,     # max singular value for the constant verdict
    "classify_isometric": 1e-8,    # |lambda - 1| and |A| for the geodesic verdict
    "sec_witness": 1e-6,           # curvature witnesses for conclusion checks
    "induced_metric_factor": 1e-8, # |g - 2 g_M| residual in the geodesic verdict
}


@dataclass(frozen=True)
class PointGeometry:
    """Measured graph geometry at one grid point."""

    coords: Array
    lambdas: Array
    rank: int
    trace_s: float
    a_norm_sq: float
    h_norm: float
    sec_m_min: float
    sec_m_max: float
    sec_n_min: float | None
    sec_n_max: float | None


@dataclass(frozen=True)
class GridSweep:
    rows: tuple[PointGeometry, ...]

    @property
    def lambda0_sq(self) -> float:
        return max(float(r.lambdas[-1] ** 2) for r in self.rows)

    @property
    def max_lambda(self) -> float:
        return max(float(r.lambdas[-1]) for r in self.rows)

    @property
    def max_h_norm(self) -> float:
        return max(r.h_norm for r in self.rows)

    @property
    def max_a_norm_sq(self) -> float:
        return max(r.a_norm_sq for r in self.rows)

    @property
    def min_trace_s(self) -> float:
        return min(r.trace_s for r in self.rows)


def _point_geometry(f: SmoothMap, p: ChartPoint, seed_seq: np.random.SeedSequence,
                    planes: int) -> PointGeometry:
    rng = np.random.default_rng(seed_seq)
    d = PointData(f, p)
    lam = d.frames.lambdas
    m, n = d.m, d.n
    gm = d.gm_jet.g
    gn = d.gn_jet.g

    sec_m_vals = []
    sec_n_vals = []
    for _ in range(planes):
        u, v = rng.normal(size=m), rng.normal(size=m)
        try:
            sec_m_vals.append(sectional_from_data(d.riem_m, gm, u, v))
        except DegeneratePlaneError:
            continue
        if n >= 2 and d.frames.rank >= 2:
            du, dv = d.fjet.d1 @ u, d.fjet.d1 @ v
            try:
                sec_n_vals.append(sectional_from_data(d.riem_n, gn, du, dv))
            except DegeneratePlaneError:
                pass

    return PointGeometry(
        coords=p.coords,
        lambdas=lam,
        rank=d.frames.rank,
        trace_s=d.trace_s,
        a_norm_sq=d.ext.a_norm_sq,
        h_norm=d.ext.h_norm,
        sec_m_min=min(sec_m_vals),
        sec_m_max=max(sec_m_vals),
        sec_n_min=min(sec_n_vals) if sec_n_vals else None,
        sec_n_max=max(sec_n_vals) if sec_n_vals else None,
    )


def sweep_geometry(f: SmoothMap, grid: list[ChartPoint], seed: int = 0,
                   planes: int = 4, threads: int = 1) -> GridSweep:
    """Measure the per-point geometry table over ``grid``.

    Plane samples are drawn from per-point spawned seeds, so the result is
    independent of evaluation order and of the thread count.
    """
    seqs = np.random.SeedSequence(seed).spawn(len(grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda args: _point_geometry(f, *args, planes),
                                 zip(grid, seqs)))
    else:
        rows = [_point_geometry(f, p, s, planes) for p, s in zip(grid, seqs)]
    return GridSweep(tuple(rows))


# ---------------------------------------------------------------------------
# Individual hypothesis checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PinchingMargins:
    domain_margin: float          # min (sec_M - sigma)
    target_margin: float | None   # min (sigma - sec_N), None when vacuous
    ok: bool


def curvature_pinching_check(sweep: GridSweep, sigma: float,
                             slack: float = STRICT_MARGIN) -> PinchingMargins:
    """Worst margins of the curvature separation over the sweep.

    Target planes are sampled inside the image of the differential; points
    where the image is less than two-dimensional contribute vacuously.
    """
    dom = min(r.sec_m_min - sigma for r in sweep.rows)
    tgt_vals = [sigma - r.sec_n_max for r in sweep.rows if r.sec_n_max is not None]
    tgt = min(tgt_vals) if tgt_vals else None
    ok = dom >= -slack and (tgt is None or tgt >= -slack)
    return PinchingMargins(dom, tgt, ok)


def trace_condition_check(sweep: GridSweep) -> float:
    """Worst value of the trace condition; pass means margin >= -slack."""
    return sweep.min_trace_s


def kappa_estimate(sweep: GridSweep, margin: float = 0.01) -> float:
    """A valid strict bound ``kappa^2`` for the pullback metric.

    Returns ``max(1 + margin, (1 + margin) * lambda0^2)`` and re-verifies the
    strict pointwise inequality against the sweep.
    """
    kappa_sq = max(1.0 + margin, (1.0 + margin) * sweep.lambda0_sq)
    worst = min(kappa_sq - float(r.lambdas[-1] ** 2) for r in sweep.rows)
    if worst < STRICT_MARGIN:
        raise ValueError(
            f"kappa^2 = {kappa_sq} is not strictly above the pullback bound")
    return kappa_sq


def second_fundamental_bound_check(sweep: GridSweep, sigma: float,
                                   kappa_sq: float) -> float:
    """Worst margin of the second-fundamental-form bound.

    The bound compares ``|A|^2`` against ``kappa^2 sigma / (kappa^4 - 1)``
    times the trace of the deficit tensor, pointwise.
    """
    if kappa_sq <= 1.0:
        raise ValueError("the bound needs kappa^2 > 1")
    coeff = kappa_sq * sigma / (kappa_sq ** 2 - 1.0)
    return min(coeff * r.trace_s - r.a_norm_sq for r in sweep.rows)


@dataclass(frozen=True)
class TraceChainReport:
    """Pointwise trace chain for the half-dimension reduction."""

    min_trace_margin: float       # min over points of tr(s) - (m - n - r)
    dims_margin: int              # m - 2n
    rank_margin: int              # min over points of n - r  (>= 0 always)
    strict_positive: bool         # tr(s) > 0 held strictly where required
    ok: bool


def trace_rank_chain_check(f: SmoothMap, sweep: GridSweep) -> TraceChainReport:
    """Check the chain ``tr(s) > m - n - r`` at every sweep point.

    When the target has at most half the domain dimension the chain
    continues ``>= m - 2n >= 0``, so the trace is additionally required to
    be strictly positive in that case.
    """
    m, n = f.domain.dim, f.target.dim
    trace_margin = min(r.trace_s - (m - n - r.rank) for r in sweep.rows)
    rank_margin = min(n - r.rank for r in sweep.rows)
    dims_margin = m - 2 * n
    strict = sweep.min_trace_s > STRICT_MARGIN if dims_margin >= 0 else True
    ok = trace_margin > STRICT_MARGIN and rank_margin >= 0 and strict
    return TraceChainReport(trace_margin, dims_margin, rank_margin, strict, ok)


# ---------------------------------------------------------------------------
# Hypothesis report and classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisReport:
    sigma: float
    kappa_sq: float
    lambda0_sq: float
    minimal_ok: bool
    pinching_ok: bool
    trace_ok: bool
    kappa_ok: bool
    condition4_ok: bool
    margins: dict[str, float | None] = field(default_factory=dict)
    scope: str = "box-local"

    @property
    def all_ok(self) -> bool:
        return (self.minimal_ok and self.pinching_ok and self.trace_ok
                and self.kappa_ok and self.condition4_ok)

    def failing(self) -> list[str]:
        return [name for name, ok in [
            ("minimal", self.minimal_ok), ("pinching", self.pinching_ok),
            ("trace", self.trace_ok), ("kappa", self.kappa_ok),
            ("condition4", self.condition4_ok)] if not ok]


def evaluate_hypotheses(f: SmoothMap, sweep: GridSweep, sigma: float,
                        kappa_margin: float = 0.01,
                        tolerances: dict[str, float] | None = None) -> HypothesisReport:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    slack = tol["gate_slack"]

    pinch = curvature_pinching_check(sweep, sigma, slack)
    trace_margin = trace_condition_check(sweep)
    kappa_sq = max(1.0 + kappa_margin, (1.0 + kappa_margin) * sweep.lambda0_sq)
    kappa_worst = min(kappa_sq - float(r.lambdas[-1] ** 2) for r in sweep.rows)
    kappa_ok = kappa_sq > 1.0 + STRICT_MARGIN and kappa_worst >= STRICT_MARGIN
    cond4_margin = second_fundamental_bound_check(sweep, sigma, kappa_sq)
    h_max = sweep.max_h_norm

    return HypothesisReport(
        sigma=sigma,
        kappa_sq=kappa_sq,
        lambda0_sq=sweep.lambda0_sq,
        minimal_ok=h_max < tol["minimality"],
        pinching_ok=pinch.ok,
        trace_ok=trace_margin >= -slack,
        kappa_ok=kappa_ok,
        condition4_ok=cond4_margin >= -slack,
        margins={
            "max_h_norm": h_max,
            "pinching_domain": pinch.domain_margin,
            "pinching_target": pinch.target_margin,
            "trace": trace_margin,
            "kappa_strict": kappa_worst,
            "condition4": cond4_margin,
        })


@dataclass(frozen=True)
class Classification:
    verdict: str                   # constant | totally-geodesic-isometric-immersion
    evidence: dict[str, object]    # | hypothesis-violated | indeterminate
    scope: str = "box-local"


def classify(f: SmoothMap, grid: list[ChartPoint], sigma: float,
             kappa_margin: float = 0.01,
             tolerances: dict[str, float] | None = None,
             seed: int = 0, sweep: GridSweep | None = None,
             hypotheses: HypothesisReport | None = None) -> Classification:
    """Classify the map against the rigidity dichotomy on the sample grid.

    A failed hypothesis wins over everything else; with all hypotheses in
    place the verdict is ``constant`` when every singular value vanishes,
    ``totally-geodesic-isometric-immersion`` when all singular values equal
    one and the second fundamental form vanishes (with the induced-metric
    and curvature-witness conclusions re-checked), and ``indeterminate``
    otherwise.
    """
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    if sweep is None:
        sweep = sweep_geometry(f, grid, seed=seed)
    hyp = hypotheses or evaluate_hypotheses(f, sweep, sigma, kappa_margin, tol)

    if not hyp.all_ok:
        return Classification("hypothesis-violated", {
            "failing": hyp.failing(),
            "margins": {k: hyp.margins[k] for k in hyp.margins}})

    if sweep.max_lambda < tol["classify_constant"]:
        return Classification("constant", {"max_lambda": sweep.max_lambda})

    dev_one = max(float(np.abs(r.lambdas - 1.0).max()) for r in sweep.rows)
    max_a = float(np.sqrt(sweep.max_a_norm_sq))
    if dev_one < tol["classify_isometric"] and max_a < tol["classify_isometric"]:
        evidence: dict[str, object] = {
            "max_lambda_deviation": dev_one, "max_a_norm": max_a}

        # conclusion re-checks: induced metric doubles the domain metric,
        # and both curvature witnesses sit at the pinching level
        factor_res = 0.0
        for p in grid[:: max(1, len(grid) // 10)]:
            d = PointData(f, p)
            factor_res = max(factor_res, float(
                np.abs(d.g - 2.0 * d.gm_jet.g).max()))
        evidence["induced_metric_factor_residual"] = factor_res

        sec_m_dev = max(max(abs(r.sec_m_min - sigma), abs(r.sec_m_max - sigma))
                        for r in sweep.rows)
        sec_n_vals = [(r.sec_n_min, r.sec_n_max) for r in sweep.rows
                      if r.sec_n_min is not None]
        sec_n_dev = max((max(abs(lo - sigma), abs(hi - sigma))
                         for lo, hi in sec_n_vals), default=0.0)
        evidence["sec_m_witness_deviation"] = sec_m_dev
        evidence["sec_n_witness_deviation"] = sec_n_dev

        ok = (factor_res < tol["induced_metric_factor"]
              and sec_m_dev < tol["sec_witness"]
              and sec_n_dev < tol["sec_witness"])
        if ok:
            return Classification("totally-geodesic-isometric-immersion", evidence)
        evidence["conclusion_check_failed"] = True
        return Classification("indeterminate", evidence)

    return Classification("indeterminate", {
        "max_lambda": sweep.max_lambda,
        "max_lambda_deviation": dev_one,
        "max_a_norm_sq": sweep.max_a_norm_sq,
        "margins": dict(hyp.margins)})
