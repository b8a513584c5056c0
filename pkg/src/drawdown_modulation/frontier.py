"""Risk-return curves and the drawdown-constrained return maximisation.

The Markowitz curve sweeps the gain K. The modulated attainable set is
explored over a (gamma, d_max) grid; for a target expected drawdown the best
grid pair inside a tolerance band around the target is selected. All grid
points share the same sampled paths (common random numbers).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, InfeasibleTargetError
from .expectation import Backend, RiskReturnEstimate, estimate, estimate_many
from .returns import ReturnDistribution
from .simulator import SimulationConfig, fmt
from .strategy import MarkowitzStrategy, ModulatedStrategy, check_admissible, gain_interval

log = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-10
MC_TOLERANCE = 1e-3
# d_max of the replication pair (gamma = K, d_max -> 1) always added when certifying
REPLICATION_DMAX = 1.0 - 1e-12
STRICT_SIGMAS = 4.0


def default_dmax_grid() -> tuple[float, ...]:
    return tuple(round(0.01 * i, 2) for i in range(1, 100))


def gamma_range(dist: ReturnDistribution, d_max: float, cash_financed: bool) -> tuple[float, float]:
    lo, hi = gain_interval(dist)
    if cash_financed:
        lo, hi = max(lo, -1.0 / d_max), min(hi, 1.0 / d_max)
    return lo, hi


def default_gamma_grid(dist: ReturnDistribution, d_max: float, cash_financed: bool = True,
                       count: int = 101) -> tuple[float, ...]:
    """``count`` points spanning the admissible gamma interval at this d_max."""
    lo, hi = gamma_range(dist, d_max, cash_financed)
    return tuple(float(g) for g in np.linspace(lo, hi, count))


@dataclass(frozen=True)
class FrontierQuery:
    """Target expected drawdown plus the search grid and estimator settings.

    ``gamma_grid=None`` spans the admissible interval separately at each d_max
    (101 points); ``dmax_grid=None`` is {0.01, ..., 0.99}. ``tolerance=None``
    picks the backend default: 1e-10 for enumeration, ``MC_TOLERANCE`` for
    Monte-Carlo.
    """

    target_drawdown: float
    tolerance: Optional[float] = None
    gamma_grid: Optional[tuple[float, ...]] = None
    dmax_grid: Optional[tuple[float, ...]] = None
    backend: Backend = field(default_factory=lambda: Backend("monte_carlo"))
    cash_financed: bool = True

    def __post_init__(self):
        if not 0.0 <= self.target_drawdown < 1.0:
            raise ConfigError(f"target drawdown must lie in [0, 1), got {self.target_drawdown}")
        if self.tolerance is not None and not self.tolerance > 0.0:
            raise ConfigError("tolerance must be > 0")
        for name in ("gamma_grid", "dmax_grid"):
            grid = getattr(self, name)
            if grid is not None:
                grid = tuple(float(g) for g in grid)
                object.__setattr__(self, name, grid)
                if not grid:
                    raise ConfigError(f"{name} must not be empty")
        if self.dmax_grid is not None and not all(0.0 < d < 1.0 for d in self.dmax_grid):
            raise ConfigError("dmax_grid values must lie in (0, 1)")

    @property
    def band(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return EXACT_TOLERANCE if self.backend.exact else MC_TOLERANCE


@dataclass(frozen=True)
class FrontierPoint:
    strategy: object
    estimate: RiskReturnEstimate
    feasible: bool = True

    def params(self) -> dict:
        s = self.strategy
        if isinstance(s, MarkowitzStrategy):
            return {"K": s.k_gain}
        return {"gamma": s.gamma, "d_max": s.d_max}

    def to_dict(self) -> dict:
        return {**self.params(), **self.estimate.to_dict(), "feasible": self.feasible}


@dataclass
class FrontierResult:
    target_drawdown: float
    tolerance: float
    points: list[FrontierPoint]
    best: Optional[FrontierPoint]
    nearest_miss: Optional[FrontierPoint] = None

    @property
    def feasible(self) -> bool:
        return self.best is not None

    def summary(self) -> dict:
        out = {"target_drawdown": self.target_drawdown, "tolerance": self.tolerance,
               "feasible": self.feasible, "evaluated": len(self.points)}
        if self.best is not None:
            out["best"] = self.best.to_dict()
        if self.nearest_miss is not None:
            out["nearest_miss"] = self.nearest_miss.to_dict()
            out["nearest_miss_distance"] = abs(
                self.nearest_miss.estimate.mean_max_drawdown - self.target_drawdown)
        return out


def candidate_pairs(query: FrontierQuery, dist: ReturnDistribution) -> list[ModulatedStrategy]:
    """Admissible (gamma, d_max) pairs of the query grid.

    Explicit gamma values outside the survival interval are a configuration
    error; pairs that only break the cash-financing bound |gamma| d_max <= 1
    are skipped, since a rectangular grid naturally contains them.
    """
    dmaxes = query.dmax_grid if query.dmax_grid is not None else default_dmax_grid()
    lo, hi = gain_interval(dist)
    if query.gamma_grid is not None:
        bad = [g for g in query.gamma_grid if g < lo - 1e-12 or g > hi + 1e-12]
        if bad:
            raise ConfigError(f"gamma values {bad} outside admissible interval [{lo}, {hi}]")
    pairs = []
    for d_max in dmaxes:
        gammas = (query.gamma_grid if query.gamma_grid is not None
                  else default_gamma_grid(dist, d_max, query.cash_financed))
        for g in gammas:
            s = ModulatedStrategy(g, d_max, query.cash_financed)
            if check_admissible(s, dist).ok:
                pairs.append(s)
    if not pairs:
        raise ConfigError("query grid contains no admissible (gamma, d_max) pair")
    return pairs


def evaluate_grid(strategies: Sequence, dist: ReturnDistribution, cfg: SimulationConfig,
                  backend: Backend) -> list[FrontierPoint]:
    """Estimate every strategy on common paths; feasibility is decided later."""
    log.info("evaluating %d grid points (%s)", len(strategies), backend.method)
    estimates = estimate_many(list(strategies), dist, cfg, backend)
    return [FrontierPoint(s, e) for s, e in zip(strategies, estimates)]


def _rank_key(point: FrontierPoint):
    # larger return first, then smaller d_max, then smaller |gamma|
    s = point.strategy
    return (-point.estimate.mean_return, s.d_max, abs(s.gamma))


def select_best(points: Sequence[FrontierPoint], target: float, tolerance: float) -> FrontierResult:
    marked = [replace(p, feasible=abs(p.estimate.mean_max_drawdown - target) <= tolerance)
              for p in points]
    feasible = [p for p in marked if p.feasible]
    best = min(feasible, key=_rank_key) if feasible else None
    miss = None
    if best is None and marked:
        miss = min(marked, key=lambda p: (abs(p.estimate.mean_max_drawdown - target),
                                          _rank_key(p)))
    return FrontierResult(target, tolerance, marked, best, miss)


def maximize_modulated_return(query: FrontierQuery, dist: ReturnDistribution,
                              cfg: SimulationConfig,
                              evaluated: Optional[Sequence[FrontierPoint]] = None) -> FrontierResult:
    """Best modulator with expected drawdown within the band around the target.

    Pass ``evaluated`` (from :func:`evaluate_grid`) to reuse one grid
    evaluation across several targets. An empty feasible set gives a result
    with ``best=None`` and the closest miss.
    """
    if evaluated is None:
        evaluated = evaluate_grid(candidate_pairs(query, dist), dist, cfg, query.backend)
    return select_best(evaluated, query.target_drawdown, query.band)


def markowitz_curve(dist: ReturnDistribution, cfg: SimulationConfig, k_grid: Sequence[float],
                    backend: Backend, cash_financed: bool = True) -> list[FrontierPoint]:
    """One (expected return, expected max drawdown) point per K."""
    if not len(k_grid):
        raise ConfigError("K grid must not be empty")
    strategies = [MarkowitzStrategy(float(k), cash_financed) for k in k_grid]
    for s in strategies:
        check_admissible(s, dist).raise_if_invalid()
    return evaluate_grid(strategies, dist, cfg, backend)


@dataclass
class DominationReport:
    k_gain: float
    markowitz: RiskReturnEstimate
    modulated: FrontierPoint
    target_drawdown: float
    tolerance: float
    gap: float
    gap_std_error: float
    strict: bool
    evaluated: int

    def to_dict(self) -> dict:
        return {
            "K": self.k_gain,
            "markowitz": self.markowitz.to_dict(),
            "modulated": self.modulated.to_dict(),
            "target_drawdown": self.target_drawdown,
            "tolerance": self.tolerance,
            "matched_drawdowns": [self.markowitz.mean_max_drawdown,
                                  self.modulated.estimate.mean_max_drawdown],
            "gap": self.gap,
            "gap_std_error": self.gap_std_error,
            "strict": self.strict,
            "evaluated": self.evaluated,
        }


def certify_domination(k_gain: float, dist: ReturnDistribution, cfg: SimulationConfig,
                       template: FrontierQuery,
                       evaluated: Optional[Sequence[FrontierPoint]] = None) -> DominationReport:
    """Match the Markowitz expected drawdown with a modulator and compare returns.

    The replication pair (gamma=K, d_max -> 1) is always evaluated, so a
    feasible point exists. The gap is strict when it exceeds 4 combined
    standard errors (Monte-Carlo) or 1e-10 (exact).
    """
    backend = template.backend
    markowitz = MarkowitzStrategy(k_gain, template.cash_financed)
    check_admissible(markowitz, dist).raise_if_invalid()
    mk = estimate(markowitz, dist, cfg, backend)
    query = replace(template, target_drawdown=mk.mean_max_drawdown)
    if evaluated is None:
        evaluated = evaluate_grid(candidate_pairs(query, dist), dist, cfg, backend)
    fallback = ModulatedStrategy(k_gain, REPLICATION_DMAX, template.cash_financed)
    points = list(evaluated) + evaluate_grid([fallback], dist, cfg, backend)
    result = select_best(points, query.target_drawdown, query.band)
    if result.best is None:
        raise InfeasibleTargetError(
            f"no modulator within {query.band} of expected drawdown {mk.mean_max_drawdown}")
    best = result.best
    gap = float(best.estimate.mean_return - mk.mean_return)
    se = math.hypot(best.estimate.std_error_return, mk.std_error_return)
    threshold = EXACT_TOLERANCE if backend.exact else STRICT_SIGMAS * se
    return DominationReport(k_gain, mk, best, query.target_drawdown, query.band, gap, se,
                            bool(gap > threshold), len(points))


FRONTIER_COLUMNS = ("gamma", "d_max", "K", "mean_return", "mean_max_drawdown",
                    "std_error_return", "std_error_drawdown", "feasible")


def write_frontier_csv(path, points: Sequence[FrontierPoint], header_comment: str = "") -> None:
    with open(path, "w", newline="") as fh:
        for line in header_comment.splitlines():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FRONTIER_COLUMNS)
        for p in points:
            params = p.params()
            e = p.estimate
            writer.writerow([
                fmt(params["gamma"]) if "gamma" in params else "",
                fmt(params["d_max"]) if "d_max" in params else "",
                fmt(params["K"]) if "K" in params else "",
                fmt(e.mean_return), fmt(e.mean_max_drawdown),
                fmt(e.std_error_return), fmt(e.std_error_drawdown),
                int(p.feasible),
            ])
