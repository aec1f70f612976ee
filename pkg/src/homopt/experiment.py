"""JSON run configs and the seeded experiment runner behind the CLI."""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Optional

import numpy as np

from . import metrics
from .driver import DriverConfig, run
from .gam import GamConfig, GamFitError
from .homotopy import HomotopyConfig
from .neldermead import NmConfig
from .objectives import BUILTINS, Objective, builtin, external_objective
from .samplers import SAMPLERS, make_sampler
from .space import DomainError, SearchSpace

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


_TOP_KEYS = {
    "objective", "space", "method", "sampler", "trials", "time", "warmup", "distance", "k",
    "steps", "top_n", "gam", "nm", "seeds", "compare", "output",
}
_SAMPLER_KEYS = {
    "random": set(),
    "tpe": {"gamma", "n_candidates", "n_startup"},
    "bayes": {"n_startup", "n_candidates", "noise"},
    "external": {"command", "timeout"},
}
_GAM_KEYS = {"n_splines", "penalty", "spline_degree", "penalty_order"}
_NM_KEYS = {"max_iter", "x_tol", "f_tol", "alpha", "gamma", "rho", "sigma", "initial_step"}


@dataclass(frozen=True)
class RunConfig:
    objective: Any  # builtin name or {"command": ..., "timeout": ..., "name": ...}
    method: str
    seeds: tuple
    space: Optional[tuple] = None  # raw declarations, external objectives only
    sampler: dict = field(default_factory=dict)
    trials: int = 500
    time: Optional[float] = None
    warmup: int = 20
    distance: float = 0.005
    k: float = 0.5
    steps: int = 5
    top_n: int = 10
    gam: dict = field(default_factory=lambda: asdict(GamConfig()))
    nm: dict = field(default_factory=lambda: asdict(NmConfig()))
    compare: bool = False
    output: str = "results"

    @property
    def augmented(self) -> bool:
        return self.method.startswith("homopt+")

    @property
    def base_method(self) -> str:
        return self.method.split("+", 1)[1] if self.augmented else self.method

    @property
    def methods(self) -> list[str]:
        if self.augmented and self.compare:
            return [self.method, self.base_method]
        return [self.method]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        if self.space is None:
            del d["space"]
        else:
            d["space"] = list(self.space)
        return d

    def build_objective(self) -> Objective:
        if isinstance(self.objective, str):
            return builtin(self.objective)
        o = self.objective
        return external_objective(o["command"], SearchSpace.from_list(self.space),
                                  o.get("timeout", 300.0), o.get("name", "external"))

    def driver_config(self, method: str, seed: int) -> DriverConfig:
        augmented = method.startswith("homopt+")
        base = method.split("+", 1)[1] if augmented else method
        return DriverConfig(
            max_trials=self.trials,
            max_time=self.time,
            warmup=self.warmup,
            distance=self.distance,
            k=self.k,
            top_n=self.top_n,
            homotopy=HomotopyConfig(self.steps, NmConfig(**self.nm)),
            gam=GamConfig(**self.gam),
            sampler=make_sampler(base, **self.sampler),
            seed=seed,
            augment=augmented,
        )


def _fail(field_name, message):
    raise ConfigError(f"{field_name}: {message}")


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        _fail(where, "must be an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        _fail(where, f"unknown key(s) {extra}")


def _int(d, key, lo=None, where=None):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(where or key, "must be an integer")
    if lo is not None and v < lo:
        _fail(where or key, f"{where or key} must be ≥ {lo}")
    return v


def _num(d, key, where=None):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(where or key, "must be a finite number")
    return float(v)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run config, filling defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    _check_keys(raw, _TOP_KEYS, "config")
    for key in ("objective", "method", "seeds"):
        if key not in raw:
            _fail(key, "is required")
    kw: dict = {}

    obj = raw["objective"]
    if isinstance(obj, str):
        if obj not in BUILTINS:
            _fail("objective", f"unknown builtin {obj!r}; expected one of {sorted(BUILTINS)}")
        if "space" in raw:
            _fail("space", "builtin objectives define their own space")
    elif isinstance(obj, dict):
        _check_keys(obj, {"command", "timeout", "name"}, "objective")
        cmd = obj.get("command")
        if not (isinstance(cmd, str) and cmd.strip()) and not (
                isinstance(cmd, list) and cmd and all(isinstance(c, str) for c in cmd)):
            _fail("objective.command", "must be a non-empty string or list of strings")
        if "timeout" in obj and _num(obj, "timeout", "objective.timeout") <= 0:
            _fail("objective.timeout", "must be positive")
        if "space" not in raw:
            _fail("space", "is required for external objectives")
        try:
            SearchSpace.from_list(raw["space"])
        except (DomainError, TypeError) as exc:
            _fail("space", str(exc))
        if not raw["space"]:
            _fail("space", "must declare at least one parameter")
        kw["space"] = tuple(raw["space"])
    else:
        _fail("objective", "must be a builtin name or an object with a command")
    kw["objective"] = obj

    method = raw["method"]
    if not isinstance(method, str):
        _fail("method", "must be a string")
    base = method[len("homopt+"):] if method.startswith("homopt+") else method
    if base not in SAMPLERS:
        _fail("method", f"unknown sampler {base!r}; expected one of {sorted(SAMPLERS)} or homopt+<sampler>")
    kw["method"] = method

    sampler = raw.get("sampler", {})
    _check_keys(sampler, _SAMPLER_KEYS[base], "sampler")
    if base == "external" and "command" not in sampler:
        _fail("sampler.command", "is required for the external sampler")
    kw["sampler"] = dict(sampler)

    seeds = raw["seeds"]
    if not isinstance(seeds, list) or not seeds or not all(
            isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds):
        _fail("seeds", "must be a non-empty list of non-negative integers")
    kw["seeds"] = tuple(seeds)

    if "trials" in raw:
        kw["trials"] = _int(raw, "trials", 1)
    if raw.get("time") is not None:
        kw["time"] = _num(raw, "time")
        if kw["time"] <= 0:
            _fail("time", "must be positive")
    if "warmup" in raw:
        kw["warmup"] = _int(raw, "warmup", 0)
    if "distance" in raw:
        kw["distance"] = _num(raw, "distance")
        if kw["distance"] < 0:
            _fail("distance", "must be ≥ 0")
    if "k" in raw:
        kw["k"] = _num(raw, "k")
        if not 0 < kw["k"] <= 1:
            _fail("k", "must lie in (0, 1]")
    if "steps" in raw:
        kw["steps"] = _int(raw, "steps", 1)
    if "top_n" in raw:
        kw["top_n"] = _int(raw, "top_n", 1)
    if "compare" in raw:
        if not isinstance(raw["compare"], bool):
            _fail("compare", "must be true or false")
        kw["compare"] = raw["compare"]
    if "output" in raw:
        if not isinstance(raw["output"], str) or not raw["output"]:
            _fail("output", "must be a non-empty path string")
        kw["output"] = raw["output"]

    gam = asdict(GamConfig())
    if "gam" in raw:
        _check_keys(raw["gam"], _GAM_KEYS, "gam")
        gam.update(raw["gam"])
        try:
            GamConfig(**gam)
        except (GamFitError, TypeError) as exc:
            _fail("gam", str(exc))
    kw["gam"] = gam
    nm = asdict(NmConfig())
    if "nm" in raw:
        _check_keys(raw["nm"], _NM_KEYS, "nm")
        nm.update(raw["nm"])
        try:
            NmConfig(**nm)
        except (ValueError, TypeError) as exc:
            _fail("nm", str(exc))
    kw["nm"] = nm

    cfg = RunConfig(**kw)
    if cfg.augmented and cfg.trials < cfg.warmup:
        _fail("trials", f"must be ≥ warmup ({cfg.warmup}) for homopt methods")
    try:
        make_sampler(base, **cfg.sampler)
    except TypeError as exc:
        _fail("sampler", str(exc))
    return cfg


def with_overrides(cfg: RunConfig, seeds=None, output=None, compare=None) -> RunConfig:
    changes = {}
    if seeds is not None:
        changes["seeds"] = tuple(seeds)
    if output is not None:
        changes["output"] = output
    if compare is not None:
        changes["compare"] = compare
    return replace(cfg, **changes)


def run_experiment(cfg: RunConfig, svg: bool = False) -> dict:
    """Run every (method, seed) pair, write per-method trial CSVs and ``summary.json``.

    Returns the summary dict.
    """
    objective = cfg.build_objective()
    space = objective.space
    os.makedirs(cfg.output, exist_ok=True)

    runs: dict = {}
    for method in cfg.methods:
        for seed in cfg.seeds:
            events: list = []
            log.info("running %s seed %d", method, seed)
            history = run(objective, space, cfg.driver_config(method, seed), events.append)
            for e in events:
                log.debug("%s seed %d trial %d [%s] loss=%.6g best=%.6g",
                          method, seed, e["index"], e["branch"], e["loss"], e["best_so_far"])
            runs.setdefault(method, []).append((seed, history, events))

    global_min = min(float(h.losses.min()) for rs in runs.values() for _, h, _ in rs)
    summary: dict = {"objective": objective.name, "global_min": global_min, "trials": cfg.trials, "methods": {}}
    all_rows = []
    for method, rs in runs.items():
        rows = []
        finals, best_params, areas = [], [], []
        for seed, history, events in rs:
            trace = metrics.regret(history.losses, global_min)
            for e, r in zip(events, trace.per_iteration):
                rows.append({
                    "run_id": f"{method}/seed{seed}",
                    "seed": seed,
                    "method": method,
                    "trial_index": e["index"],
                    "branch": e["branch"],
                    "loss": e["loss"],
                    "best_so_far": e["best_so_far"],
                    "regret": float(r),
                    "elapsed_s": round(e["elapsed"], 6),
                })
            best = history.best()
            finals.append(best.loss)
            best_params.append(space.decode(best.params))
            areas.append(trace.area)
        metrics.write_trials_csv(os.path.join(cfg.output, f"trials_{_slug(method)}.csv"), rows)
        all_rows.extend(rows)
        n = len(finals)
        summary["methods"][method] = {
            "seeds": list(cfg.seeds),
            "final_best": finals,
            "final_best_mean": float(np.mean(finals)),
            "final_best_se": float(np.std(finals, ddof=1) / math.sqrt(n)) if n > 1 else None,
            "best_params": best_params,
            "area_under_regret_mean": float(np.mean(areas)),
        }

    curves = metrics.mean_regret_curves(all_rows)
    for method, c in curves.items():
        summary["methods"][method]["mean_regret"] = c["mean"]
        summary["methods"][method]["regret_se"] = c["se"]

    if cfg.augmented and cfg.compare:
        imp = metrics.percent_improvement(summary["methods"][cfg.base_method]["final_best"],
                                          summary["methods"][cfg.method]["final_best"])
        summary["improvement"] = {
            "base": cfg.base_method,
            "augmented": cfg.method,
            "percent": imp.percent_improvement if math.isfinite(imp.percent_improvement) else None,
            "standard_error": imp.standard_error if math.isfinite(imp.standard_error) else None,
            "n_seeds": imp.n_seeds,
            "n_excluded": imp.n_excluded,
        }

    with open(os.path.join(cfg.output, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, allow_nan=False)
        fh.write("\n")
    if svg:
        metrics.write_regret_svg(os.path.join(cfg.output, "regret.svg"), curves, objective.name)
    return summary


def _slug(method: str) -> str:
    return method.replace("+", "_")
