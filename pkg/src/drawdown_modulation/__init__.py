"""Drawdown-modulated versus proportional (Markowitz-style) betting.

A proportional strategy bets a fixed fraction K of the account each stage. A
drawdown modulator scales its bet by (d_max - d) / (1 - d), which keeps the
percentage drawdown below d_max on every path. The package simulates both,
estimates expected return and expected maximum drawdown (exactly or by
Monte-Carlo), and searches for modulators that beat a given K at equal risk.
"""

from .errors import (BankruptcyError, ConfigError, DrawdownBreachError, DrawdownLabError,
                     EnumerationCapError, InfeasibleTargetError)
from .expectation import (Backend, RiskReturnEstimate, closed_form_estimate, estimate,
                          estimate_many, exact_estimate, expected_log_growth,
                          markowitz_expected_return, markowitz_worst_case_drawdown,
                          matching_dmax, monte_carlo_estimate, n2_domination_gap,
                          n2_markowitz_closed_form, n2_modulated_closed_form)
from .frontier import (DominationReport, FrontierPoint, FrontierQuery, FrontierResult,
                       certify_domination, markowitz_curve, maximize_modulated_return)
from .returns import (CoinSpec, ReturnDistribution, coin, enumerate_paths, path_stream,
                      sample_path)
from .simulator import (PathStats, SimulationConfig, max_absolute_drawdown,
                        max_percentage_drawdown, run_path)
from .strategy import (AccountState, MarkowitzStrategy, ModulatedStrategy, check_admissible,
                       investment, lemma_bounds, modulation_factor)

__version__ = "0.1.0"
