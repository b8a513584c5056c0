"""Expected return and expected maximum percentage drawdown.

Three interchangeable routes: closed forms (where they exist), exact
enumeration over every path for small horizons, and Monte-Carlo.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import engine
from .errors import BankruptcyError, ConfigError
from .returns import DEFAULT_ENUMERATION_CAP, ReturnDistribution
from .simulator import SimulationConfig
from .strategy import MarkowitzStrategy, Strategy, check_admissible

METHODS = ("closed_form", "enumeration", "monte_carlo")


@dataclass(frozen=True)
class RiskReturnEstimate:
    mean_return: float
    mean_max_drawdown: float
    method: str
    paths: int = 0
    seed: Optional[int] = None
    std_error_return: float = 0.0
    std_error_drawdown: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown estimation method {self.method!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Backend:
    """How to estimate: ``enumeration`` (exact) or ``monte_carlo``."""

    method: str = "enumeration"
    paths: int = 100_000
    seed: int = 0
    workers: int = 1
    cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        if self.method not in ("enumeration", "monte_carlo"):
            raise ConfigError(f"backend method must be 'enumeration' or 'monte_carlo', "
                              f"got {self.method!r}")
        if self.method == "monte_carlo" and self.paths < 1:
            raise ConfigError("Monte-Carlo backend needs paths >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def exact(self) -> bool:
        return self.method == "enumeration"


# -- closed forms ----------------------------------------------------------------

def markowitz_expected_return(k_gain: float, mu: float, n: int) -> float:
    """(1 + K mu)^N - 1: the terminal value is a product of independent factors."""
    return (1.0 + k_gain * mu) ** n - 1.0


def markowitz_worst_case_drawdown(k_gain: float, dist: ReturnDistribution, n: int) -> float:
    """Drawdown after losing every one of the N bets.

    A long position (K > 0) loses K|x_min| of the account per stage, a short one
    loses |K| x_max. For a support symmetric about zero both reduce to
    1 - (1 - |K| max(|x_min|, x_max))^N.
    """
    per_stage = k_gain * abs(dist.x_min) if k_gain >= 0 else -k_gain * dist.x_max
    return 1.0 - (1.0 - per_stage) ** n


def n2_markowitz_closed_form(k_gain: float, p: float) -> tuple[float, float]:
    """(expected return, expected max drawdown) for N=2 on the even-money coin."""
    r = (1.0 + k_gain * (2.0 * p - 1.0)) ** 2 - 1.0
    d = k_gain * (1.0 - p) * (2.0 - k_gain + k_gain * p)
    return r, d


def n2_modulated_closed_form(gamma: float, d_max: float, p: float) -> tuple[float, float]:
    """(expected return, expected max drawdown) for a modulator at N=2, even-money coin."""
    a = gamma * d_max
    r = a * (2.0 * p - 1.0) * (a * p + gamma * p - gamma + 2.0)
    d = a * (1.0 - p) * (2.0 - gamma + gamma * p)
    return r, d


def matching_dmax(k_gain: float, p: float) -> float:
    """d_max at which a gamma=1 modulator has the same N=2 expected drawdown as gain K."""
    return k_gain * (2.0 - k_gain + k_gain * p) / (1.0 + p)


def n2_domination_gap(k_gain: float, p: float) -> float:
    """Expected-return advantage of the matched gamma=1 modulator over gain K, N=2."""
    k = k_gain
    num = k * k * (1.0 - k) * (1.0 - p) * p * (2.0 * p - 1.0) * (3.0 + p + k * p - k)
    return num / (1.0 + p) ** 2


# -- estimators -------------------------------------------------------------------

def _require_admissible(strategies: Sequence[Strategy], dist: ReturnDistribution) -> None:
    for s in strategies:
        check_admissible(s, dist).raise_if_invalid()


def exact_estimate(strategy: Strategy, dist: ReturnDistribution, cfg: SimulationConfig,
                   cap: int = DEFAULT_ENUMERATION_CAP) -> RiskReturnEstimate:
    """Probability-weighted sums over all |outcomes|^N paths."""
    _require_admissible([strategy], dist)
    probs, wealth, dstar = engine.exact_path_arrays(strategy, dist, cfg.n, cap)
    r = math.fsum((probs * (wealth - 1.0)).tolist())
    d = math.fsum((probs * dstar).tolist())
    return RiskReturnEstimate(r, d, "enumeration")


def monte_carlo_estimate(strategy: Strategy, dist: ReturnDistribution, cfg: SimulationConfig,
                         paths: int, seed: int, workers: int = 1) -> RiskReturnEstimate:
    return monte_carlo_estimates([strategy], dist, cfg, paths, seed, workers)[0]


def monte_carlo_estimates(strategies: Sequence[Strategy], dist: ReturnDistribution,
                          cfg: SimulationConfig, paths: int, seed: int,
                          workers: int = 1) -> list[RiskReturnEstimate]:
    """Monte-Carlo estimates for several strategies on the same sampled paths."""
    _require_admissible(strategies, dist)
    moments = engine.monte_carlo_moments(strategies, dist, cfg.n, paths, seed, workers)
    return [RiskReturnEstimate(m.mean_return, m.mean_max_drawdown, "monte_carlo", paths, seed,
                               m.std_error_return, m.std_error_drawdown)
            for m in moments]


def estimate_many(strategies: Sequence[Strategy], dist: ReturnDistribution,
                  cfg: SimulationConfig, backend: Backend) -> list[RiskReturnEstimate]:
    if backend.exact:
        return [exact_estimate(s, dist, cfg, backend.cap) for s in strategies]
    return monte_carlo_estimates(strategies, dist, cfg, backend.paths, backend.seed,
                                 backend.workers)


def estimate(strategy: Strategy, dist: ReturnDistribution, cfg: SimulationConfig,
             backend: Backend) -> RiskReturnEstimate:
    return estimate_many([strategy], dist, cfg, backend)[0]


def closed_form_estimate(strategy: MarkowitzStrategy, dist: ReturnDistribution,
                         cfg: SimulationConfig) -> RiskReturnEstimate:
    """Closed-form point for the two-stage even-money coin (the only case with both moments)."""
    values = sorted(v for v, _ in dist.outcomes)
    if cfg.n != 2 or values != [-1.0, 1.0]:
        raise ConfigError("closed-form drawdown is only available for N=2 on the +-1 coin")
    p = dict((v, q) for v, q in dist.outcomes)[1.0]
    r, d = n2_markowitz_closed_form(strategy.k_gain, p)
    return RiskReturnEstimate(r, d, "closed_form")


def expected_log_growth(strategy: Strategy, dist: ReturnDistribution, cfg: SimulationConfig,
                        backend: Backend = Backend()) -> float:
    """E[log(V(N)/V(0))], exactly or by Monte-Carlo.

    Raises :class:`BankruptcyError` if any reachable path ends at zero wealth.
    """
    _require_admissible([strategy], dist)
    if backend.exact:
        probs, wealth, _ = engine.exact_path_arrays(strategy, dist, cfg.n, backend.cap)
        if np.any(wealth <= 0.0):
            raise BankruptcyError("a reachable path ends at zero wealth; log growth is -inf")
        return math.fsum((probs * np.log(wealth)).tolist())
    wealth, _ = engine.sampled_path_arrays(strategy, dist, cfg.n, backend.paths, backend.seed)
    if np.any(wealth <= 0.0):
        raise BankruptcyError("a sampled path ends at zero wealth; log growth is -inf")
    return math.fsum(np.log(wealth).tolist()) / backend.paths
