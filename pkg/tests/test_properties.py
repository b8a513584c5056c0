"""Randomised invariants checked with hypothesis."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from drawdown_modulation import kernels
from drawdown_modulation.expectation import (matching_dmax, n2_domination_gap,
                                             n2_markowitz_closed_form, n2_modulated_closed_form)
from drawdown_modulation.returns import ReturnDistribution
from drawdown_modulation.simulator import SimulationConfig, max_percentage_drawdown, run_path
from drawdown_modulation.strategy import (AccountState, MarkowitzStrategy, ModulatedStrategy,
                                          gain_interval, lemma_bounds)


@st.composite
def distributions(draw):
    loss = draw(st.floats(-0.95, -0.01))
    gain = draw(st.floats(0.01, 2.0))
    middle = draw(st.lists(st.floats(-0.9, 1.9), max_size=3, unique=True))
    values = sorted({loss, gain, *[m for m in middle if loss < m < gain]})
    weights = draw(st.lists(st.floats(0.05, 1.0), min_size=len(values), max_size=len(values)))
    total = math.fsum(weights)
    probs = [w / total for w in weights]
    probs[-1] = 1.0 - math.fsum(probs[:-1])
    assume(probs[-1] > 0)
    return ReturnDistribution(tuple(zip(values, probs)))


@st.composite
def modulated_setups(draw):
    dist = draw(distributions())
    lo, hi = gain_interval(dist)
    gamma = draw(st.floats(lo, hi))
    d_max = draw(st.floats(0.01, 0.99))
    n = draw(st.integers(1, 40))
    picks = draw(st.lists(st.integers(0, len(dist.outcomes) - 1), min_size=n, max_size=n))
    return dist, ModulatedStrategy(gamma, d_max), [dist.outcomes[i][0] for i in picks]


@settings(max_examples=300, deadline=None)
@given(modulated_setups())
def test_modulated_drawdown_never_exceeds_cap(setup):
    dist, strategy, xs = setup
    stats, rows = run_path(strategy, SimulationConfig(len(xs)), xs, record=True)
    assert all(r.d <= strategy.d_max + 1e-12 for r in rows)
    assert stats.max_pct_drawdown <= strategy.d_max + 1e-12


@settings(max_examples=200, deadline=None)
@given(modulated_setups())
def test_modulated_bets_inside_lemma_interval(setup):
    dist, strategy, xs = setup
    _, rows = run_path(strategy, SimulationConfig(len(xs)), xs, record=True)
    for r in rows[:-1]:
        if r.v == 0.0:
            continue
        lo, hi = lemma_bounds(AccountState(r.v, r.v_max, r.d), strategy.d_max, dist)
        scale = 1e-12 * r.v_max
        assert lo - scale <= r.investment <= hi + scale


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=30), st.floats(0.1, 10.0))
def test_percentage_drawdown_bruteforce_and_scale_free(values, scale):
    best = max((max(values[: k + 1]) - v) / max(values[: k + 1]) for k, v in enumerate(values))
    d = max_percentage_drawdown(values)
    assert 0.0 <= d < 1.0
    assert d == pytest.approx(best, abs=1e-12)
    assert max_percentage_drawdown([scale * v for v in values]) == pytest.approx(d, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(distributions(), st.data())
def test_markowitz_terminal_value_is_a_product(dist, data):
    lo, hi = gain_interval(dist)
    k = data.draw(st.floats(lo, hi))
    xs = data.draw(st.lists(st.sampled_from([v for v, _ in dist.outcomes]),
                            min_size=1, max_size=30))
    stats, _ = run_path(MarkowitzStrategy(k), SimulationConfig(len(xs), 3.0), xs)
    expected = 3.0 * math.prod(max(1.0 + k * x, 0.0) for x in xs)
    if expected > 0.0:
        assert stats.final_value == pytest.approx(expected, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(modulated_setups(), st.sampled_from(kernels.available()))
def test_kernel_agrees_with_scalar_simulator(setup, backend):
    dist, strategy, xs = setup
    lookup = {v: i for i, (v, _) in enumerate(dist.outcomes)}
    idx = np.array([[lookup[x] for x in xs]], dtype=np.uint8)
    w, d = np.empty(1), np.empty(1)
    kernels.load(backend).path_stats(dist.values, idx, kernels.MODULATED, strategy.gamma,
                                     strategy.d_max, w, d)
    stats, _ = run_path(strategy, SimulationConfig(len(xs)), xs)
    assert w[0] == pytest.approx(stats.final_value, rel=1e-12, abs=1e-300)
    assert d[0] == pytest.approx(stats.max_pct_drawdown, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(0.501, 0.999))
def test_n2_gap_formula_and_sign(k, p):
    dm = matching_dmax(k, p)
    assert 0.0 < dm < 1.0
    rk, dk = n2_markowitz_closed_form(k, p)
    rm, dmm = n2_modulated_closed_form(1.0, dm, p)
    assert dmm == pytest.approx(dk, abs=1e-14)
    assert rm - rk == pytest.approx(n2_domination_gap(k, p), abs=1e-12)
    assert n2_domination_gap(k, p) > 0.0
