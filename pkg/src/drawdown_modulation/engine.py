"""Bulk path evaluation shared by the exact and Monte-Carlo estimators.

Monte-Carlo paths are split into fixed chunks of ``CHUNK_PATHS``; each chunk
is reduced sequentially by the kernel and the chunk partials are combined
with ``math.fsum`` (exactly rounded), so results are bit-identical for any
number of workers. The sampled path matrix is cached per (distribution,
horizon, seed, path count): every strategy evaluated against the same key
sees the same draws (common random numbers).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BankruptcyError, DrawdownBreachError
from .returns import DEFAULT_ENUMERATION_CAP, ReturnDistribution, enumerate_indices, sample_indices
from .strategy import MarkowitzStrategy, ModulatedStrategy, Strategy

log = logging.getLogger(__name__)

CHUNK_PATHS = 2048


@dataclass(frozen=True)
class Moments:
    """Mean and standard error of R and d* over a set of paths."""

    mean_return: float
    mean_max_drawdown: float
    std_error_return: float
    std_error_drawdown: float


def kernel_params(strategy: Strategy) -> tuple[int, float, float]:
    if isinstance(strategy, MarkowitzStrategy):
        return kernels.MARKOWITZ, strategy.k_gain, 0.5
    if isinstance(strategy, ModulatedStrategy):
        return kernels.MODULATED, strategy.gamma, strategy.d_max
    raise TypeError(f"not a strategy: {strategy!r}")


def raise_for_status(status: int, what: str) -> None:
    if status & kernels.STATUS_BANKRUPT:
        raise BankruptcyError(f"account value went negative while evaluating {what}")
    if status & kernels.STATUS_BREACH:
        raise DrawdownBreachError(f"drawdown exceeded d_max while evaluating {what}")


@lru_cache(maxsize=4)
def path_indices(dist: ReturnDistribution, n: int, seed: int, paths: int) -> np.ndarray:
    """Sampled outcome indices for paths 0..paths-1 (read-only, cached)."""
    log.info("sampling %d paths x %d stages (seed %d)", paths, n, seed)
    idx = sample_indices(dist, n, seed, 0, paths)
    idx.flags.writeable = False
    return idx


def _chunks(total: int) -> list[tuple[int, int]]:
    return [(a, min(a + CHUNK_PATHS, total)) for a in range(0, total, CHUNK_PATHS)]


def _std_error(s1: float, s2: float, count: int) -> float:
    if count < 2:
        return math.inf
    var = (s2 - s1 * s1 / count) / (count - 1)
    return math.sqrt(max(var, 0.0) / count)


def monte_carlo_moments(strategies: Sequence[Strategy], dist: ReturnDistribution, n: int,
                        paths: int, seed: int, workers: int = 1) -> list[Moments]:
    """Sample moments of R and d* for each strategy on common random paths."""
    if paths < 1:
        raise ValueError("paths must be >= 1")
    idx = path_indices(dist, n, seed, paths)
    params = [kernel_params(s) for s in strategies]
    groups: dict[int, list[int]] = {}
    for pos, (kind, _, _) in enumerate(params):
        groups.setdefault(kind, []).append(pos)
    values = np.ascontiguousarray(dist.values)
    chunks = _chunks(paths)
    totals = np.zeros((len(strategies), 4))

    for kind, positions in groups.items():
        gains = np.array([params[i][1] for i in positions], dtype=np.float64)
        dmaxes = np.array([params[i][2] for i in positions], dtype=np.float64)

        def task(bounds, kind=kind, gains=gains, dmaxes=dmaxes):
            a, b = bounds
            out = np.zeros((gains.shape[0], 4))
            status = kernels.grid_sums(values, idx[a:b], kind, gains, dmaxes, out)
            return out, status

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                partials = list(pool.map(task, chunks))
        else:
            partials = [task(c) for c in chunks]
        for _, status in partials:
            raise_for_status(status, f"{len(positions)} strategies")
        stacked = np.stack([p for p, _ in partials])  # (chunks, J, 4)
        for row, pos in enumerate(positions):
            for col in range(4):
                totals[pos, col] = math.fsum(stacked[:, row, col].tolist())

    result = []
    for s_r, s_r2, s_d, s_d2 in totals:
        result.append(Moments(s_r / paths, s_d / paths,
                              _std_error(s_r, s_r2, paths), _std_error(s_d, s_d2, paths)))
    return result


@lru_cache(maxsize=8)
def _enumeration(dist: ReturnDistribution, n: int, cap: int):
    idx, probs = enumerate_indices(dist, n, cap)
    idx.flags.writeable = False
    return idx, probs


def exact_path_arrays(strategy: Strategy, dist: ReturnDistribution, n: int,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(path probabilities, terminal wealth ratio V(N)/V(0), d*) over every path."""
    idx, probs = _enumeration(dist, n, cap)
    kind, gain, d_max = kernel_params(strategy)
    wealth = np.empty(idx.shape[0])
    dstar = np.empty(idx.shape[0])
    status = kernels.path_stats(np.ascontiguousarray(dist.values), idx, kind, gain, d_max,
                                wealth, dstar)
    raise_for_status(status, repr(strategy))
    return probs, wealth, dstar


def sampled_path_arrays(strategy: Strategy, dist: ReturnDistribution, n: int,
                        paths: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(terminal wealth ratio, d*) for each sampled path."""
    idx = path_indices(dist, n, seed, paths)
    kind, gain, d_max = kernel_params(strategy)
    wealth = np.empty(paths)
    dstar = np.empty(paths)
    status = kernels.path_stats(np.ascontiguousarray(dist.values), idx, kind, gain, d_max,
                                wealth, dstar)
    raise_for_status(status, repr(strategy))
    return wealth, dstar
