"""Batch front end: run one experiment described by a JSON config.

Usage::

    ddmod --config experiment.json --out results/ [--threads 8] [--seed 7]

Experiment kinds: simulate, sweep_markowitz, frontier, certify, verify_n2.
Every output file carries the resolved config (worker count excluded, so
outputs are byte-identical for any ``--threads``). Exit codes: 0 success,
2 config error, 3 verification failure, 4 runtime error; failures print a
JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import frontier as fr
from .errors import ConfigError, DrawdownLabError, EnumerationCapError
from .expectation import (Backend, estimate, matching_dmax, n2_domination_gap,
                          n2_markowitz_closed_form, n2_modulated_closed_form)
from .returns import (DEFAULT_ENUMERATION_CAP, ReturnDistribution, coin,
                      distribution_from_config, path_stream, sample_path)
from .simulator import SimulationConfig, run_path, write_trajectory_csv
from .strategy import (MarkowitzStrategy, ModulatedStrategy, check_admissible,
                       strategy_from_config)

log = logging.getLogger("ddmod")

KINDS = ("simulate", "sweep_markowitz", "frontier", "certify", "verify_n2")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_RUNTIME = 0, 2, 3, 4

N2_IDENTITY_TOL = 1e-10
N2_GAP_TOL = 1e-12


class VerificationFailure(Exception):
    def __init__(self, report: dict):
        super().__init__(f"{len(report['failures'])} grid point(s) failed verification")
        self.report = report


@dataclass
class ExperimentConfig:
    """Validated experiment description plus its resolved JSON form."""

    kind: str
    dist: ReturnDistribution
    sim: SimulationConfig
    backend: Backend
    seed: Optional[int]
    body: dict
    resolved: dict = field(default_factory=dict)


# -- config parsing -----------------------------------------------------------------

def _float_list(raw: Any, name: str) -> list[float]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"'{name}' must be a non-empty list of numbers")
    try:
        out = [float(x) for x in raw]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{name}' must contain numbers: {exc}") from exc
    if not all(math.isfinite(x) for x in out):
        raise ConfigError(f"'{name}' must contain finite numbers")
    return out


def _seed(raw: Any) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int) or not 0 <= raw < 2**64:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {raw!r}")
    return raw


def _backend(raw: dict, seed: Optional[int], workers: int) -> Backend:
    if not isinstance(raw, dict):
        raise ConfigError("'backend' must be an object")
    method = raw.get("method", "enumeration")
    paths = raw.get("paths", 100_000)
    cap = raw.get("cap", DEFAULT_ENUMERATION_CAP)
    for name, value in (("paths", paths), ("cap", cap)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"backend {name} must be a positive integer")
    return Backend(method, paths, 0 if seed is None else seed, workers, cap)


def parse_config(raw: dict, seed_override: Optional[int] = None,
                 threads: Optional[int] = None) -> ExperimentConfig:
    """Validate everything up front; no computation happens here."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"'kind' must be one of {KINDS}, got {kind!r}")
    workers = threads if threads is not None else raw.get("threads", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("threads must be a positive integer")
    seed = raw.get("seed")
    if seed_override is not None:
        seed = seed_override
    if seed is not None:
        seed = _seed(seed)

    if kind == "verify_n2":
        dist = coin(1.0, -1.0, 0.6)
        sim = SimulationConfig(2)
    else:
        if "distribution" not in raw:
            raise ConfigError("config needs a 'distribution'")
        dist = distribution_from_config(raw["distribution"])
        sim_raw = raw.get("simulation", {})
        if not isinstance(sim_raw, dict) or "n" not in sim_raw:
            raise ConfigError("'simulation' must be an object with an integer 'n'")
        n = sim_raw["n"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ConfigError("simulation n must be an integer")
        sim = SimulationConfig(n, float(sim_raw.get("v0", 1.0)))
    backend = _backend(raw.get("backend", {}), seed, workers)

    cfg = ExperimentConfig(kind, dist, sim, backend, seed, {})
    resolved = {"kind": kind}
    if kind != "verify_n2":
        resolved["distribution"] = dist.to_dict()
        resolved["simulation"] = {"n": sim.n, "v0": sim.v0}
    if kind in ("sweep_markowitz", "frontier", "certify"):
        resolved["backend"] = {"method": backend.method, "cap": backend.cap}
        if not backend.exact:
            resolved["backend"]["paths"] = backend.paths
    if seed is not None:
        resolved["seed"] = seed
    resolved.update(_PARSERS[kind](raw, cfg))
    cfg.resolved = resolved
    return cfg


def _parse_simulate(raw: dict, cfg: ExperimentConfig) -> dict:
    strat = strategy_from_config(raw.get("strategy"))
    check_admissible(strat, cfg.dist).raise_if_invalid()
    cfg.body["strategy"] = strat
    out: dict = {"strategy": strat.to_dict()}
    if "returns" in raw:
        returns = _float_list(raw["returns"], "returns")
        if len(returns) != cfg.sim.n:
            raise ConfigError(f"'returns' has {len(returns)} entries, expected n={cfg.sim.n}")
        support = set(cfg.dist.values.tolist())
        if any(x not in support for x in returns):
            raise ConfigError("every override return must be an outcome of the distribution")
        cfg.body["returns"] = returns
        out["returns"] = returns
    else:
        if cfg.seed is None:
            raise ConfigError("simulate needs an explicit 'seed' (or a 'returns' override)")
        index = raw.get("path_index", 0)
        if isinstance(index, bool) or not isinstance(index, int) or not 0 <= index < 2**64:
            raise ConfigError("path_index must be a non-negative integer")
        cfg.body["path_index"] = index
        out["path_index"] = index
    return out


def _parse_sweep(raw: dict, cfg: ExperimentConfig) -> dict:
    cash = bool(raw.get("cash_financed", True))
    ks = _float_list(raw.get("k_grid"), "k_grid")
    for k in ks:
        check_admissible(MarkowitzStrategy(k, cash), cfg.dist).raise_if_invalid()
    cfg.body.update(k_grid=ks, cash_financed=cash)
    return {"k_grid": ks, "cash_financed": cash}


def _grid_query(raw: dict, cfg: ExperimentConfig, target: float) -> fr.FrontierQuery:
    tol = raw.get("tolerance")
    q = fr.FrontierQuery(
        target_drawdown=target,
        tolerance=None if tol is None else float(tol),
        gamma_grid=None if raw.get("gamma_grid") is None else tuple(
            _float_list(raw["gamma_grid"], "gamma_grid")),
        dmax_grid=None if raw.get("dmax_grid") is None else tuple(
            _float_list(raw["dmax_grid"], "dmax_grid")),
        backend=cfg.backend,
        cash_financed=bool(raw.get("cash_financed", True)),
    )
    fr.candidate_pairs(q, cfg.dist)  # validates grids against the distribution
    return q


def _query_dict(q: fr.FrontierQuery) -> dict:
    return {"tolerance": q.band,
            "gamma_grid": None if q.gamma_grid is None else list(q.gamma_grid),
            "dmax_grid": None if q.dmax_grid is None else list(q.dmax_grid),
            "cash_financed": q.cash_financed}


def _parse_frontier(raw: dict, cfg: ExperimentConfig) -> dict:
    targets = _float_list(raw.get("targets"), "targets")
    queries = [_grid_query(raw, cfg, t) for t in targets]
    cfg.body["queries"] = queries
    out = {"targets": targets, **_query_dict(queries[0])}
    if raw.get("markowitz_k_grid") is not None:
        ks = _float_list(raw["markowitz_k_grid"], "markowitz_k_grid")
        for k in ks:
            check_admissible(MarkowitzStrategy(k, queries[0].cash_financed),
                             cfg.dist).raise_if_invalid()
        cfg.body["markowitz_k_grid"] = ks
        out["markowitz_k_grid"] = ks
    return out


def _parse_certify(raw: dict, cfg: ExperimentConfig) -> dict:
    ks = raw.get("K")
    ks = _float_list(ks if isinstance(ks, list) else [ks], "K")
    template = _grid_query(raw, cfg, 0.0)
    for k in ks:
        check_admissible(MarkowitzStrategy(k, template.cash_financed),
                         cfg.dist).raise_if_invalid()
    cfg.body.update(k_values=ks, template=template)
    return {"K": ks, **_query_dict(template)}


def _interior(count: int, lo: float, hi: float) -> list[float]:
    return [lo + (hi - lo) * i / (count + 1) for i in range(1, count + 1)]


def _parse_verify(raw: dict, cfg: ExperimentConfig) -> dict:
    if "points" in raw:
        pts = raw["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("'points' must be a non-empty list of [K, p] pairs")
        try:
            points = [(float(k), float(p)) for k, p in pts]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad (K, p) pair in 'points': {exc}") from exc
        out = {"points": [list(pt) for pt in points]}
    else:
        size = raw.get("grid_size", 50)
        if isinstance(size, bool) or not isinstance(size, int) or size < 1:
            raise ConfigError("grid_size must be a positive integer")
        points = [(k, p) for k in _interior(size, 0.0, 1.0) for p in _interior(size, 0.5, 1.0)]
        out = {"grid_size": size}
    for k, p in points:
        if not 0.0 < k < 1.0:
            raise ConfigError(f"K={k} outside (0, 1)")
        if not 0.5 < p < 1.0:
            raise ConfigError(f"p={p} outside (1/2, 1)")
    cfg.body["points"] = points
    return out


_PARSERS = {"simulate": _parse_simulate, "sweep_markowitz": _parse_sweep,
            "frontier": _parse_frontier, "certify": _parse_certify,
            "verify_n2": _parse_verify}


# -- output helpers -------------------------------------------------------------------

def _clean(obj: Any) -> Any:
    """JSON-safe copy: non-finite floats become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n")


def _provenance(cfg: ExperimentConfig) -> str:
    return "config: " + json.dumps(_clean(cfg.resolved), sort_keys=True, separators=(",", ":"))


# -- experiment runners ------------------------------------------------------------

def run_simulate(cfg: ExperimentConfig, out: Path) -> dict:
    strat = cfg.body["strategy"]
    if "returns" in cfg.body:
        returns = cfg.body["returns"]
    else:
        rng = path_stream(cfg.seed, cfg.body["path_index"])
        returns = sample_path(cfg.dist, cfg.sim.n, rng).tolist()
    stats, rows = run_path(strat, cfg.sim, returns, record=True)
    write_trajectory_csv(out / "trajectory.csv", rows, _provenance(cfg))
    payload = {"config": cfg.resolved, "path_stats": stats.to_dict()}
    write_json(out / "path_stats.json", payload)
    return payload


def run_sweep_markowitz(cfg: ExperimentConfig, out: Path) -> dict:
    points = fr.markowitz_curve(cfg.dist, cfg.sim, cfg.body["k_grid"], cfg.backend,
                                cfg.body["cash_financed"])
    fr.write_frontier_csv(out / "markowitz_curve.csv", points, _provenance(cfg))
    return {"config": cfg.resolved, "points": [p.to_dict() for p in points]}


def run_frontier(cfg: ExperimentConfig, out: Path) -> dict:
    queries = cfg.body["queries"]
    evaluated = fr.evaluate_grid(fr.candidate_pairs(queries[0], cfg.dist), cfg.dist,
                                 cfg.sim, cfg.backend)
    results = []
    for i, q in enumerate(queries):
        res = fr.maximize_modulated_return(q, cfg.dist, cfg.sim, evaluated)
        fr.write_frontier_csv(out / f"frontier_grid_{i}.csv", res.points,
                              f"{_provenance(cfg)}\ntarget_index: {i}")
        if not res.feasible:
            log.warning("target %s is infeasible on this grid", q.target_drawdown)
        results.append(res.summary())
    payload: dict = {"config": cfg.resolved, "targets": results}
    if "markowitz_k_grid" in cfg.body:
        curve = fr.markowitz_curve(cfg.dist, cfg.sim, cfg.body["markowitz_k_grid"],
                                   cfg.backend, queries[0].cash_financed)
        fr.write_frontier_csv(out / "markowitz_curve.csv", curve, _provenance(cfg))
        payload["markowitz_curve"] = [p.to_dict() for p in curve]
    write_json(out / "frontier_optimum.json", payload)
    return payload


def run_certify(cfg: ExperimentConfig, out: Path) -> dict:
    template = cfg.body["template"]
    evaluated = fr.evaluate_grid(fr.candidate_pairs(template, cfg.dist), cfg.dist,
                                 cfg.sim, cfg.backend)
    reports = [fr.certify_domination(k, cfg.dist, cfg.sim, template, evaluated).to_dict()
               for k in cfg.body["k_values"]]
    payload = {"config": cfg.resolved, "reports": reports,
               "strict_count": sum(r["strict"] for r in reports)}
    write_json(out / "certify.json", payload)
    return payload


def verify_n2_point(k: float, p: float) -> dict:
    """Closed forms against 4-path enumeration at one (K, p)."""
    dist = coin(1.0, -1.0, p)
    sim = SimulationConfig(2)
    exact = Backend("enumeration")
    dm = matching_dmax(k, p)
    mk = estimate(MarkowitzStrategy(k), dist, sim, exact)
    rk, dk = n2_markowitz_closed_form(k, p)
    row = {"K": k, "p": p, "matching_dmax": dm}
    row["markowitz_dev"] = max(abs(mk.mean_return - rk), abs(mk.mean_max_drawdown - dk))
    row["dmax_in_unit"] = 0.0 < dm < 1.0
    if row["dmax_in_unit"]:
        mm = estimate(ModulatedStrategy(1.0, dm), dist, sim, exact)
        rm, dm_star = n2_modulated_closed_form(1.0, dm, p)
        row["modulated_dev"] = max(abs(mm.mean_return - rm), abs(mm.mean_max_drawdown - dm_star))
        row["matched_drawdown_dev"] = abs(dm_star - dk)
        gap = rm - rk
        row["gap"] = gap
        row["gap_formula_dev"] = abs(gap - n2_domination_gap(k, p))
        row["enumerated_gap"] = mm.mean_return - mk.mean_return
    else:
        row.update(modulated_dev=math.inf, matched_drawdown_dev=math.inf, gap=-math.inf,
                   gap_formula_dev=math.inf, enumerated_gap=-math.inf)
    row["ok"] = (row["dmax_in_unit"]
                 and row["markowitz_dev"] <= N2_IDENTITY_TOL
                 and row["modulated_dev"] <= N2_IDENTITY_TOL
                 and row["matched_drawdown_dev"] <= N2_IDENTITY_TOL
                 and row["gap_formula_dev"] <= N2_GAP_TOL
                 and row["gap"] > 0.0 and row["enumerated_gap"] > 0.0)
    return row


def run_verify_n2(cfg: ExperimentConfig, out: Path) -> dict:
    rows = [verify_n2_point(k, p) for k, p in cfg.body["points"]]
    keys = ("markowitz_dev", "modulated_dev", "matched_drawdown_dev", "gap_formula_dev")
    report = {
        "config": cfg.resolved,
        "points": len(rows),
        "max_deviation": {k: max(r[k] for r in rows) for k in keys},
        "min_gap": min(r["gap"] for r in rows),
        "tolerances": {"identity": N2_IDENTITY_TOL, "gap_formula": N2_GAP_TOL},
        "failures": [r for r in rows if not r["ok"]],
        "passed": all(r["ok"] for r in rows),
    }
    if len(rows) == 1:
        report["point"] = rows[0]
    write_json(out / "verify_n2.json", report)
    if not report["passed"]:
        raise VerificationFailure(report)
    return report


RUNNERS = {"simulate": run_simulate, "sweep_markowitz": run_sweep_markowitz,
           "frontier": run_frontier, "certify": run_certify, "verify_n2": run_verify_n2}


def run(cfg: ExperimentConfig, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.kind](cfg, out)


# -- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddmod", description="Drawdown-modulated versus proportional betting experiments.")
    parser.add_argument("--config", required=True, type=Path, help="experiment config (JSON)")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for Monte-Carlo evaluation (default: config or 1)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def _fail(code: int, exc: BaseException, extra: Optional[dict] = None) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if extra:
        payload.update(extra)
    sys.stderr.write(json.dumps(_clean(payload), allow_nan=False) + "\n")
    return code


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = json.loads(args.config.read_text())
        cfg = parse_config(raw, args.seed, args.threads)
    except (OSError, json.JSONDecodeError, ConfigError, EnumerationCapError) as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        run(cfg, args.out)
    except VerificationFailure as exc:
        return _fail(EXIT_VERIFY, exc, {"failures": exc.report["failures"][:10]})
    except (ConfigError, EnumerationCapError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except (DrawdownLabError, OSError) as exc:
        return _fail(EXIT_RUNTIME, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
