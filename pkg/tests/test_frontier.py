import csv

import numpy as np
import pytest

from drawdown_modulation.errors import ConfigError
from drawdown_modulation.expectation import Backend, n2_markowitz_closed_form
from drawdown_modulation.frontier import (REPLICATION_DMAX, FrontierQuery, candidate_pairs,
                                          certify_domination, default_dmax_grid,
                                          default_gamma_grid, evaluate_grid, markowitz_curve,
                                          maximize_modulated_return, write_frontier_csv)
from drawdown_modulation.simulator import SimulationConfig

EXACT = Backend("enumeration")


def test_default_grids(fine_coin):
    dm = default_dmax_grid()
    assert len(dm) == 99 and dm[0] == 0.01 and dm[-1] == 0.99
    g = default_gamma_grid(fine_coin, 0.25)
    assert len(g) == 101 and g[0] == pytest.approx(-4.0) and g[-1] == pytest.approx(4.0)
    g = default_gamma_grid(fine_coin, 0.01)
    assert g[0] == pytest.approx(-30.0) and g[-1] == pytest.approx(30.0)


def test_markowitz_curve_n2(even_coin, n2):
    ks = [0.0, 0.25, 0.5, 1.0]
    points = markowitz_curve(even_coin, n2, ks, EXACT)
    assert (points[0].estimate.mean_return, points[0].estimate.mean_max_drawdown) == (0.0, 0.0)
    for k, p in zip(ks, points):
        r, d = n2_markowitz_closed_form(k, 0.6)
        assert p.estimate.mean_return == pytest.approx(r, abs=1e-10)
        assert p.estimate.mean_max_drawdown == pytest.approx(d, abs=1e-10)


def test_markowitz_curve_rejects_bad_grids(even_coin, n2):
    with pytest.raises(ConfigError):
        markowitz_curve(even_coin, n2, [0.5, 1.2], EXACT)
    with pytest.raises(ConfigError):
        markowitz_curve(even_coin, n2, [], EXACT)


def test_optimum_n2_on_grid_with_matched_pair(even_coin, n2):
    q = FrontierQuery(0.36, gamma_grid=(0.5, 0.75, 1.0),
                      dmax_grid=tuple(np.round(np.arange(0.5, 0.65, 0.0025), 6)), backend=EXACT)
    res = maximize_modulated_return(q, even_coin, n2)
    assert res.feasible
    assert res.best.params() == {"gamma": 1.0, "d_max": 0.5625}
    assert res.best.estimate.mean_return >= 0.21796875 - 1e-12
    assert len(res.points) == 3 * len(q.dmax_grid)


def test_optimum_n2_default_grid_with_band(even_coin, n2):
    q = FrontierQuery(0.36, tolerance=1e-3, backend=EXACT)
    res = maximize_modulated_return(q, even_coin, n2)
    assert res.feasible
    assert abs(res.best.estimate.mean_max_drawdown - 0.36) <= 1e-3
    assert res.best.estimate.mean_return >= 0.21796875 - 0.01
    assert all(p.feasible == (abs(p.estimate.mean_max_drawdown - 0.36) <= 1e-3)
               for p in res.points)


def test_infeasible_target_reports_nearest_miss(even_coin, n2):
    q = FrontierQuery(0.999, gamma_grid=(0.5, 1.0), dmax_grid=(0.3, 0.6), backend=EXACT)
    res = maximize_modulated_return(q, even_coin, n2)
    assert not res.feasible and res.best is None
    assert res.nearest_miss.params() == {"gamma": 1.0, "d_max": 0.6}
    assert res.summary()["nearest_miss_distance"] == pytest.approx(0.999 - 0.384)


def test_degenerate_zero_gamma_grid(even_coin, n2):
    grid = dict(gamma_grid=(0.0,), dmax_grid=(0.2, 0.1, 0.5), backend=EXACT)
    assert not maximize_modulated_return(FrontierQuery(0.05, **grid), even_coin, n2).feasible
    res = maximize_modulated_return(FrontierQuery(1e-4, tolerance=1e-3, **grid), even_coin, n2)
    assert res.best.estimate.mean_return == 0.0
    # ties broken toward the smallest d_max
    assert res.best.params() == {"gamma": 0.0, "d_max": 0.1}


def test_candidate_pairs_validation(fine_coin):
    q = FrontierQuery(0.1, gamma_grid=(-4.0, 2.0, 10.0), dmax_grid=(0.1, 0.5))
    pairs = candidate_pairs(q, fine_coin)
    assert [(s.gamma, s.d_max) for s in pairs] == [(-4.0, 0.1), (2.0, 0.1), (10.0, 0.1),
                                                   (2.0, 0.5)]
    with pytest.raises(ConfigError):
        candidate_pairs(FrontierQuery(0.1, gamma_grid=(31.0,), dmax_grid=(0.01,)), fine_coin)
    with pytest.raises(ConfigError):
        candidate_pairs(FrontierQuery(0.1, gamma_grid=(20.0,), dmax_grid=(0.5,)), fine_coin)


@pytest.mark.parametrize("kwargs", [
    dict(target_drawdown=1.0), dict(target_drawdown=-0.1), dict(target_drawdown=0.2, tolerance=0.0),
    dict(target_drawdown=0.2, gamma_grid=()), dict(target_drawdown=0.2, dmax_grid=(0.0, 0.5)),
])
def test_query_validation(kwargs):
    with pytest.raises(ConfigError):
        FrontierQuery(**kwargs)


def test_modulated_points_respect_cap(fine_coin):
    cfg = SimulationConfig(40)
    q = FrontierQuery(0.1, dmax_grid=(0.02, 0.1, 0.3), backend=Backend("monte_carlo", 2000, 4))
    for p in evaluate_grid(candidate_pairs(q, fine_coin), fine_coin, cfg, q.backend):
        assert p.estimate.mean_max_drawdown <= p.strategy.d_max + 1e-12


def test_refinement_never_lowers_optimum(fine_coin):
    cfg = SimulationConfig(40)
    backend = Backend("monte_carlo", 2000, 8)
    coarse = FrontierQuery(0.03, tolerance=2e-3, dmax_grid=(0.05, 0.1), backend=backend)
    fine = FrontierQuery(0.03, tolerance=2e-3, dmax_grid=(0.05, 0.07, 0.1, 0.2), backend=backend)
    a = maximize_modulated_return(coarse, fine_coin, cfg)
    b = maximize_modulated_return(fine, fine_coin, cfg)
    assert a.feasible
    assert b.best.estimate.mean_return >= a.best.estimate.mean_return


def test_certify_n2_exact_gap(even_coin, n2):
    template = FrontierQuery(0.0, gamma_grid=(0.5, 1.0), dmax_grid=(0.5, 0.5625, 0.6),
                             backend=EXACT)
    rep = certify_domination(0.5, even_coin, n2, template)
    assert rep.gap == pytest.approx(0.00796875, abs=1e-12)
    assert rep.strict and rep.target_drawdown == pytest.approx(0.36)


def test_certify_idle_strategy(even_coin, n2):
    rep = certify_domination(0.0, even_coin, n2, FrontierQuery(0.0, backend=EXACT))
    assert rep.gap == 0.0 and not rep.strict


def test_certify_falls_back_to_replication_pair(even_coin):
    cfg = SimulationConfig(6)
    template = FrontierQuery(0.0, gamma_grid=(0.1,), dmax_grid=(0.1,), backend=EXACT)
    rep = certify_domination(0.5, even_coin, cfg, template)
    assert rep.modulated.params() == {"gamma": 0.5, "d_max": REPLICATION_DMAX}
    assert abs(rep.gap) < 1e-9 and not rep.strict


def test_certify_monte_carlo_report(fine_coin):
    cfg = SimulationConfig(60)
    template = FrontierQuery(0.0, tolerance=2e-3, dmax_grid=(0.05, 0.1, 0.2),
                             backend=Backend("monte_carlo", 4000, 2))
    rep = certify_domination(0.4, fine_coin, cfg, template)
    d = rep.to_dict()
    assert d["matched_drawdowns"][0] == rep.target_drawdown
    assert abs(d["matched_drawdowns"][1] - rep.target_drawdown) <= 2e-3
    assert rep.gap > -4 * rep.gap_std_error
    assert rep.strict == (rep.gap > 4 * rep.gap_std_error)


def test_frontier_csv(tmp_path, even_coin, n2):
    points = markowitz_curve(even_coin, n2, [0.5], EXACT)
    points += evaluate_grid(candidate_pairs(
        FrontierQuery(0.3, gamma_grid=(1.0,), dmax_grid=(0.5,)), even_coin), even_coin, n2, EXACT)
    path = tmp_path / "f.csv"
    write_frontier_csv(path, points)
    rows = list(csv.DictReader(path.read_text().splitlines()))
    assert list(rows[0]) == ["gamma", "d_max", "K", "mean_return", "mean_max_drawdown",
                             "std_error_return", "std_error_drawdown", "feasible"]
    assert rows[0]["K"] == "0.5" and rows[0]["gamma"] == ""
    assert rows[1]["gamma"] == "1" and float(rows[1]["mean_max_drawdown"]) == pytest.approx(0.32)
