import math

import pytest

from drawdown_modulation.errors import BankruptcyError, ConfigError
from drawdown_modulation.expectation import (Backend, closed_form_estimate, estimate,
                                             exact_estimate, expected_log_growth,
                                             markowitz_expected_return,
                                             markowitz_worst_case_drawdown, matching_dmax,
                                             monte_carlo_estimate, n2_domination_gap,
                                             n2_markowitz_closed_form, n2_modulated_closed_form)
from drawdown_modulation.returns import ReturnDistribution, coin, enumerate_paths
from drawdown_modulation.simulator import SimulationConfig, run_path
from drawdown_modulation.strategy import MarkowitzStrategy, ModulatedStrategy


def brute_force(strategy, dist, n):
    """Probability-weighted path statistics using the scalar simulator only."""
    cfg = SimulationConfig(n)
    r, d = [], []
    for xs, p in enumerate_paths(dist, n):
        stats, _ = run_path(strategy, cfg, xs)
        r.append(p * stats.overall_return)
        d.append(p * stats.max_pct_drawdown)
    return math.fsum(r), math.fsum(d)


@pytest.mark.parametrize("strategy", [
    MarkowitzStrategy(0.5), MarkowitzStrategy(-0.3), ModulatedStrategy(1.0, 0.5625),
    ModulatedStrategy(2.5, 0.2), ModulatedStrategy(-1.0, 0.7),
])
def test_exact_matches_brute_force(strategy):
    dist = ReturnDistribution.from_outcomes([(-0.4, 0.3), (0.05, 0.3), (0.25, 0.4)])
    est = exact_estimate(strategy, dist, SimulationConfig(7))
    r, d = brute_force(strategy, dist, 7)
    assert est.mean_return == pytest.approx(r, abs=1e-12)
    assert est.mean_max_drawdown == pytest.approx(d, abs=1e-12)


def test_n2_spot_values(even_coin, n2):
    mk = exact_estimate(MarkowitzStrategy(0.5), even_coin, n2)
    assert (mk.mean_return, mk.mean_max_drawdown) == pytest.approx((0.21, 0.36), abs=1e-14)
    assert matching_dmax(0.5, 0.6) == pytest.approx(0.5625)
    mm = exact_estimate(ModulatedStrategy(1.0, 0.5625), even_coin, n2)
    assert mm.mean_return == pytest.approx(0.21796875, abs=1e-14)
    assert mm.mean_max_drawdown == pytest.approx(0.36, abs=1e-14)
    assert n2_domination_gap(0.5, 0.6) == pytest.approx(0.00796875, abs=1e-15)


@pytest.mark.parametrize("gamma, d_max, p", [(1.0, 0.3, 0.7), (0.6, 0.9, 0.55), (1.0, 0.8, 0.9)])
def test_n2_modulated_closed_form(gamma, d_max, p, n2):
    est = exact_estimate(ModulatedStrategy(gamma, d_max), coin(1.0, -1.0, p), n2)
    r, d = n2_modulated_closed_form(gamma, d_max, p)
    assert est.mean_return == pytest.approx(r, abs=1e-12)
    assert est.mean_max_drawdown == pytest.approx(d, abs=1e-12)


def test_closed_form_estimate(even_coin, n2, fine_coin):
    est = closed_form_estimate(MarkowitzStrategy(0.5), even_coin, n2)
    assert (est.mean_return, est.mean_max_drawdown) == n2_markowitz_closed_form(0.5, 0.6)
    with pytest.raises(ConfigError):
        closed_form_estimate(MarkowitzStrategy(0.5), fine_coin, n2)


def test_kelly_worst_case():
    dist = coin(1.0, -1.0, 0.6)
    assert markowitz_worst_case_drawdown(0.2, dist, 10) == pytest.approx(0.8926258176,
                                                                         abs=1e-10)
    skewed = coin(0.5, -0.25, 0.5)
    assert markowitz_worst_case_drawdown(1.0, skewed, 2) == pytest.approx(1 - 0.75 ** 2)
    assert markowitz_worst_case_drawdown(-1.0, skewed, 2) == pytest.approx(1 - 0.5 ** 2)


def test_markowitz_return_identity_exact():
    dist = ReturnDistribution.from_outcomes([(-0.4, 0.3), (0.05, 0.3), (0.25, 0.4)])
    est = exact_estimate(MarkowitzStrategy(0.8), dist, SimulationConfig(9))
    assert est.mean_return == pytest.approx(markowitz_expected_return(0.8, dist.mean, 9),
                                            abs=1e-12)


def test_monte_carlo_close_to_exact(fine_coin):
    cfg = SimulationConfig(12)
    s = ModulatedStrategy(3.0, 0.2)
    exact = exact_estimate(s, fine_coin, cfg)
    mc = monte_carlo_estimate(s, fine_coin, cfg, paths=20_000, seed=3)
    assert abs(mc.mean_return - exact.mean_return) < 4 * mc.std_error_return
    assert abs(mc.mean_max_drawdown - exact.mean_max_drawdown) < 4 * mc.std_error_drawdown
    assert mc.method == "monte_carlo" and mc.seed == 3 and mc.paths == 20_000


def test_monte_carlo_worker_invariance(fine_coin):
    cfg = SimulationConfig(30)
    one = estimate(MarkowitzStrategy(0.6), fine_coin, cfg, Backend("monte_carlo", 5000, 9, 1))
    many = estimate(MarkowitzStrategy(0.6), fine_coin, cfg, Backend("monte_carlo", 5000, 9, 4))
    assert one == many


def test_single_path_standard_error_is_infinite(fine_coin):
    est = monte_carlo_estimate(MarkowitzStrategy(0.5), fine_coin, SimulationConfig(5), 1, 0)
    assert est.std_error_return == math.inf


def test_inadmissible_rejected(even_coin, n2):
    with pytest.raises(ConfigError):
        exact_estimate(MarkowitzStrategy(1.5), even_coin, n2)


def test_log_growth(even_coin):
    cfg = SimulationConfig(4)
    g = expected_log_growth(MarkowitzStrategy(0.2), even_coin, cfg)
    assert g == pytest.approx(4 * (0.6 * math.log(1.2) + 0.4 * math.log(0.8)), abs=1e-13)
    with pytest.raises(BankruptcyError):
        expected_log_growth(MarkowitzStrategy(1.0), even_coin, cfg)
    mc = expected_log_growth(MarkowitzStrategy(0.2), even_coin, cfg,
                             Backend("monte_carlo", 20_000, 1))
    assert mc == pytest.approx(g, abs=0.02)


def test_backend_validation():
    for bad in (dict(method="magic"), dict(method="monte_carlo", paths=0), dict(workers=0)):
        with pytest.raises(ConfigError):
            Backend(**bad)
