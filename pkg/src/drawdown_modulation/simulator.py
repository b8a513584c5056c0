"""Account evolution along a single return path, and drawdown statistics.

This is the readable scalar reference. Bulk simulation (enumeration and
Monte-Carlo) goes through :mod:`drawdown_modulation.kernels`, which runs the
same recursion on many paths at once.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BankruptcyError, ConfigError
from .strategy import AccountState, Strategy, investment

BANKRUPTCY_TOL = 1e-12

TRAJECTORY_COLUMNS = ("k", "V", "V_max", "d", "I", "X")


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    v0: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ConfigError(f"horizon n must be an integer >= 1, got {self.n!r}")
        if not (math.isfinite(self.v0) and self.v0 > 0.0):
            raise ConfigError(f"initial value v0 must be > 0, got {self.v0!r}")


@dataclass(frozen=True)
class PathStats:
    overall_return: float
    max_pct_drawdown: float
    max_abs_drawdown: float
    log_growth: float
    final_value: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrajectoryRow:
    k: int
    v: float
    v_max: float
    d: float
    investment: Optional[float]
    x: Optional[float]


def step(state: AccountState, amount: float, x: float) -> AccountState:
    """Apply ``V(k+1) = V(k) + I(k) X(k)`` and update peak and drawdown."""
    v = state.v + amount * x
    if v < -BANKRUPTCY_TOL * state.v_max:
        raise BankruptcyError(
            f"account value {v!r} < 0 after betting {amount!r} at return {x!r}")
    v = max(v, 0.0)
    v_max = max(v, state.v_max)
    return AccountState(v, v_max, (v_max - v) / v_max)


def run_path(strategy: Strategy, cfg: SimulationConfig, returns: Sequence[float],
             record: bool = False) -> tuple[PathStats, Optional[list[TrajectoryRow]]]:
    """Simulate one path. With ``record`` the per-stage trajectory is returned too.

    A bankrupt account (V = 0) is frozen: no further bets, d = 1.
    """
    if len(returns) != cfg.n:
        raise ConfigError(f"expected {cfg.n} returns, got {len(returns)}")
    state = AccountState.initial(cfg.v0)
    values = [state.v]
    rows: Optional[list[TrajectoryRow]] = [] if record else None
    for k, x in enumerate(returns):
        x = float(x)
        amount = 0.0 if state.v == 0.0 else investment(strategy, state)
        if rows is not None:
            rows.append(TrajectoryRow(k, state.v, state.v_max, state.d, amount, x))
        state = step(state, amount, x)
        values.append(state.v)
    if rows is not None:
        rows.append(TrajectoryRow(cfg.n, state.v, state.v_max, state.d, None, None))
    final = state.v
    stats = PathStats(
        overall_return=final / cfg.v0 - 1.0,
        max_pct_drawdown=max_percentage_drawdown(values),
        max_abs_drawdown=max_absolute_drawdown(values),
        log_growth=math.log(final / cfg.v0) if final > 0.0 else -math.inf,
        final_value=final,
    )
    return stats, rows


def _running_peak(values: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ConfigError("account value series is empty")
    return arr, np.maximum.accumulate(arr)


def max_percentage_drawdown(values: Iterable[float]) -> float:
    """Largest (peak - value) / peak over the series, peak being the running maximum."""
    arr, peak = _running_peak(values)
    if peak[0] <= 0.0:
        raise ConfigError("series must start with a positive account value")
    return float(np.max((peak - arr) / peak))


def max_absolute_drawdown(values: Iterable[float]) -> float:
    """Largest peak-to-trough drop in currency units."""
    arr, peak = _running_peak(values)
    return float(np.max(peak - arr))


def write_trajectory_csv(path, rows: Sequence[TrajectoryRow], header_comment: str = "") -> None:
    with open(path, "w", newline="") as fh:
        for line in header_comment.splitlines():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for r in rows:
            writer.writerow([
                r.k, fmt(r.v), fmt(r.v_max), fmt(r.d),
                "" if r.investment is None else fmt(r.investment),
                "" if r.x is None else fmt(r.x),
            ])


def fmt(x: float) -> str:
    """17 significant digits: round-trips every double exactly."""
    return format(float(x), ".17g")
