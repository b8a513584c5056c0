"""Investment feedback laws: proportional (Markowitz-style) and drawdown-modulated.

A Markowitz strategy bets ``I(k) = K V(k)``. A modulated strategy bets
``I(k) = gamma * M(k) * V(k)`` with the modulation factor

    M(k) = (d_max - d(k)) / (1 - d(k)),

which shrinks the bet as the drawdown to date approaches the cap ``d_max``
and keeps ``d(k) <= d_max`` on every path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

from .errors import ConfigError, DrawdownBreachError
from .returns import ReturnDistribution

DRAWDOWN_TOL = 1e-12


@dataclass(frozen=True)
class MarkowitzStrategy:
    k_gain: float
    cash_financed: bool = False

    def __post_init__(self):
        if not math.isfinite(self.k_gain):
            raise ConfigError("K must be finite")

    def to_dict(self) -> dict:
        return {"markowitz": {"K": self.k_gain, "cash_financed": self.cash_financed}}


@dataclass(frozen=True)
class ModulatedStrategy:
    gamma: float
    d_max: float
    cash_financed: bool = False

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise ConfigError("gamma must be finite")
        if not 0.0 < self.d_max < 1.0:
            raise ConfigError(f"d_max must lie in (0, 1), got {self.d_max}")

    def to_dict(self) -> dict:
        return {"modulated": {"gamma": self.gamma, "d_max": self.d_max,
                              "cash_financed": self.cash_financed}}


Strategy = Union[MarkowitzStrategy, ModulatedStrategy]


@dataclass(frozen=True)
class AccountState:
    """Account value, running peak and percentage drawdown to date."""

    v: float
    v_max: float
    d: float

    def __post_init__(self):
        if self.v < 0.0 or not self.v_max > 0.0:
            raise ConfigError(f"invalid account state v={self.v}, v_max={self.v_max}")
        if self.v > self.v_max:
            raise ConfigError("account value exceeds its running peak")
        if abs(self.d - (self.v_max - self.v) / self.v_max) > DRAWDOWN_TOL:
            raise ConfigError("drawdown inconsistent with (v, v_max)")

    @classmethod
    def initial(cls, v0: float) -> "AccountState":
        return cls(v0, v0, 0.0)

    @classmethod
    def from_values(cls, v: float, v_max: float) -> "AccountState":
        return cls(v, v_max, (v_max - v) / v_max)


def markowitz_investment(s: MarkowitzStrategy, state: AccountState) -> float:
    return s.k_gain * state.v


def _capped_drawdown(d: float, d_max: float) -> float:
    if d > d_max + DRAWDOWN_TOL:
        raise DrawdownBreachError(f"drawdown {d!r} exceeds cap d_max={d_max!r}")
    return min(d, d_max)


def modulation_factor(state: AccountState, d_max: float) -> float:
    """M = (d_max - d) / (1 - d); lies in [0, d_max]."""
    d = _capped_drawdown(state.d, d_max)
    return (d_max - d) / (1.0 - d)


def modulated_investment(s: ModulatedStrategy, state: AccountState) -> float:
    amount = s.gamma * modulation_factor(state, s.d_max) * state.v
    # |gamma| * d_max <= 1 is enforced up front; M <= d_max makes it sufficient
    assert not s.cash_financed or abs(amount) <= state.v * (1.0 + 1e-12)
    return amount


def investment(s: Strategy, state: AccountState) -> float:
    if isinstance(s, MarkowitzStrategy):
        return markowitz_investment(s, state)
    return modulated_investment(s, state)


def lemma_bounds(state: AccountState, d_max: float,
                 dist: ReturnDistribution) -> tuple[float, float]:
    """Range of bets that keeps the next-stage drawdown at or below ``d_max``.

    Any bet inside the interval, whatever the realised return, leaves
    ``d(k+1) <= d_max``; any bet outside it can breach the cap.
    """
    d = _capped_drawdown(state.d, d_max)
    room = (d_max - d) * state.v / (1.0 - d)
    return -room / dist.x_max, room / abs(dist.x_min)


@dataclass
class AdmissibilityReport:
    strategy: Strategy
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self) -> Strategy:
        if self.violations:
            raise ConfigError("; ".join(self.violations))
        return self.strategy


def gain_interval(dist: ReturnDistribution) -> tuple[float, float]:
    """Survival interval [-1/x_max, 1/|x_min|] for K (Markowitz) or gamma (modulated)."""
    return -1.0 / dist.x_max, 1.0 / abs(dist.x_min)


def check_admissible(s: Strategy, dist: ReturnDistribution) -> AdmissibilityReport:
    """Check survival bounds and, when requested, the cash-financing bound.

    Never raises; the report lists each violated bound by name.
    """
    lo, hi = gain_interval(dist)
    report = AdmissibilityReport(s)
    if isinstance(s, MarkowitzStrategy):
        name, gain = "K", s.k_gain
    else:
        name, gain = "gamma", s.gamma
    # admissibility bounds are inclusive; allow rounding in 1/x
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if gain < lo - slack:
        report.violations.append(f"survival: {name}={gain!r} < -1/x_max={lo!r}")
    if gain > hi + slack:
        report.violations.append(f"survival: {name}={gain!r} > 1/|x_min|={hi!r}")
    if s.cash_financed:
        if isinstance(s, MarkowitzStrategy):
            if abs(gain) > 1.0 + 1e-12:
                report.violations.append(f"cash-financing: |K|={abs(gain)!r} > 1")
        elif abs(gain) * s.d_max > 1.0 + 1e-12:
            report.violations.append(
                f"cash-financing: |gamma|*d_max={abs(gain) * s.d_max!r} > 1")
    return report


def strategy_from_config(spec: dict) -> Strategy:
    """Parse ``{"markowitz": {...}}`` or ``{"modulated": {...}}``."""
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError("strategy spec must have exactly one of 'markowitz' or 'modulated'")
    (kind, body), = spec.items()
    try:
        if kind == "markowitz":
            return MarkowitzStrategy(float(body["K"]), bool(body.get("cash_financed", False)))
        if kind == "modulated":
            return ModulatedStrategy(float(body["gamma"]), float(body["d_max"]),
                                     bool(body.get("cash_financed", False)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad {kind} strategy spec: {exc!r}") from exc
    raise ConfigError(f"unknown strategy kind {kind!r}")
