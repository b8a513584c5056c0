"""Bounded i.i.d. per-stage return laws: construction, sampling, enumeration.

Random streams are counter based: the stream for path ``i`` under master seed
``s`` is a Philox generator keyed by ``(s, i)``, so any path can be rebuilt on
its own and Monte-Carlo results do not depend on how paths are scheduled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, EnumerationCapError

DEFAULT_ENUMERATION_CAP = 2**20
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class ReturnDistribution:
    """Finite discrete law of the per-stage return X(k).

    ``outcomes`` keeps the order it was given in; enumeration and sampling
    index outcomes by that position.
    """

    outcomes: tuple[tuple[float, float], ...]

    def __post_init__(self):
        outcomes = tuple((float(v), float(p)) for v, p in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if not outcomes:
            raise ConfigError("distribution needs at least one outcome")
        if len(outcomes) > 256:
            raise ConfigError("at most 256 outcomes are supported")
        values = [v for v, _ in outcomes]
        probs = [p for _, p in outcomes]
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("outcome values must be finite")
        if len(set(values)) != len(values):
            raise ConfigError("outcome values must be distinct")
        if any(not p > 0.0 for p in probs):
            raise ConfigError("every outcome probability must be > 0")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ConfigError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if not min(values) < 0.0 < max(values):
            raise ConfigError("support must contain both a loss and a gain (x_min < 0 < x_max)")

    @classmethod
    def from_outcomes(cls, pairs: Sequence[Sequence[float]]) -> "ReturnDistribution":
        try:
            return cls(tuple((v, p) for v, p in pairs))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"outcomes must be [value, probability] pairs: {exc}") from exc

    @property
    def x_min(self) -> float:
        return min(v for v, _ in self.outcomes)

    @property
    def x_max(self) -> float:
        return max(v for v, _ in self.outcomes)

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.outcomes)

    @cached_property
    def values(self) -> np.ndarray:
        arr = np.array([v for v, _ in self.outcomes], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def probabilities(self) -> np.ndarray:
        arr = np.array([p for _, p in self.outcomes], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def _cut_points(self) -> np.ndarray:
        # inverse-CDF boundaries; uniforms at or above the last cut map to the last outcome
        return np.cumsum(self.probabilities)[:-1]

    def to_dict(self) -> dict:
        return {"outcomes": [[v, p] for v, p in self.outcomes]}


@dataclass(frozen=True)
class CoinSpec:
    win_value: float
    loss_value: float
    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"coin probability must lie in (0, 1), got {self.p}")
        if not self.win_value > 0.0:
            raise ConfigError("coin win value must be > 0")
        if not self.loss_value < 0.0:
            raise ConfigError("coin loss value must be < 0")


def make_coin(spec: CoinSpec) -> ReturnDistribution:
    """Two-outcome law: ``win_value`` with probability p, else ``loss_value``."""
    return ReturnDistribution(((spec.win_value, spec.p), (spec.loss_value, 1.0 - spec.p)))


def coin(win: float, loss: float, p: float) -> ReturnDistribution:
    return make_coin(CoinSpec(win, loss, p))


def distribution_from_config(spec: dict) -> ReturnDistribution:
    """Parse ``{"outcomes": [[v, p], ...]}`` or ``{"coin": {"win", "loss", "p"}}``."""
    if not isinstance(spec, dict):
        raise ConfigError("distribution spec must be an object")
    if "coin" in spec:
        c = spec["coin"]
        try:
            return make_coin(CoinSpec(float(c["win"]), float(c["loss"]), float(c["p"])))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"coin spec needs numeric win, loss and p: {exc}") from exc
    if "outcomes" in spec:
        return ReturnDistribution.from_outcomes(spec["outcomes"])
    raise ConfigError("distribution spec needs an 'outcomes' or 'coin' entry")


def path_stream(seed: int, path_index: int) -> np.random.Generator:
    """Independent random stream for one path, keyed by (seed, path index)."""
    key = np.array([seed & _U64, path_index & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_indices(dist: ReturnDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    return np.searchsorted(dist._cut_points, u, side="right").astype(np.uint8)


def sample_path(dist: ReturnDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. returns from ``dist`` using ``rng``."""
    if n < 1:
        raise ConfigError(f"stage count must be >= 1, got {n}")
    return dist.values[_draw_indices(dist, n, rng)]


def sample_indices(dist: ReturnDistribution, n: int, seed: int,
                   start: int, stop: int) -> np.ndarray:
    """Outcome indices for paths ``start..stop-1``, shape ``(stop-start, n)``.

    Row ``i`` equals what ``sample_path(dist, n, path_stream(seed, start+i))``
    would draw, expressed as positions into ``dist.outcomes``.
    """
    if n < 1:
        raise ConfigError(f"stage count must be >= 1, got {n}")
    out = np.empty((stop - start, n), dtype=np.uint8)
    for row, i in enumerate(range(start, stop)):
        out[row] = _draw_indices(dist, n, path_stream(seed, i))
    return out


def _check_cap(dist: ReturnDistribution, n: int, cap: int) -> int:
    if n < 1:
        raise ConfigError(f"stage count must be >= 1, got {n}")
    count = len(dist.outcomes) ** n
    if count > cap:
        raise EnumerationCapError(
            f"{len(dist.outcomes)}^{n} = {count} paths exceeds the enumeration cap {cap}"
        )
    return count


def enumerate_paths(dist: ReturnDistribution, n: int,
                    cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple[tuple[float, ...], float]]:
    """Yield every length-``n`` return sequence with its probability."""
    _check_cap(dist, n, cap)
    for combo in itertools.product(dist.outcomes, repeat=n):
        prob = 1.0
        for _, p in combo:
            prob *= p
        yield tuple(v for v, _ in combo), prob


def enumerate_indices(dist: ReturnDistribution, n: int,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`enumerate_paths`: (index matrix, path probabilities).

    Rows follow the same order as ``enumerate_paths``; probabilities are the
    same left-to-right products.
    """
    count = _check_cap(dist, n, cap)
    m = len(dist.outcomes)
    # row r written in base m, most significant digit first (itertools.product order)
    digits = np.arange(count)[:, None] // (m ** np.arange(n - 1, -1, -1))[None, :] % m
    idx = np.ascontiguousarray(digits.astype(np.uint8))
    probs = np.ones(count)
    for k in range(n):
        probs = probs * dist.probabilities[idx[:, k]]
    return idx, probs
