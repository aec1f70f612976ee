"""``homopt`` command line: optimize, bench, regret, validate.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
Set HOMOPT_LOG (e.g. DEBUG, INFO) to control log verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import metrics
from .experiment import ConfigError, config_from_dict, parse_config, run_experiment, with_overrides

log = logging.getLogger("homopt")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

BENCH_CONFIGS = [
    {"objective": "gramacy_lee", "method": "homopt+random", "trials": 100,
     "seeds": [1, 2, 3, 4, 5], "compare": True},
    {"objective": "griewank_modified", "method": "homopt+random", "trials": 100,
     "seeds": [1, 2, 3, 4, 5], "compare": True},
]


def _seeds(text):
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homopt", description="Homotopy-augmented hyperparameter search.")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("optimize", help="run the experiment described by a JSON config")
    o.add_argument("config")
    o.add_argument("--out", help="output directory (overrides config)")
    o.add_argument("--seeds", type=_seeds, help="comma-separated seeds (overrides config)")
    o.add_argument("--compare", action="store_true", help="also run the undecorated base sampler")
    o.add_argument("--svg", action="store_true", help="write a mean-regret chart")

    b = sub.add_parser("bench", help="run the built-in 1-D and 2-D illustrations")
    b.add_argument("--out", default="bench_results")
    b.add_argument("--seeds", type=_seeds)
    b.add_argument("--svg", action="store_true")

    r = sub.add_parser("regret", help="recompute pooled-minimum regret across trial CSVs")
    r.add_argument("csv", nargs="+")
    r.add_argument("--out", help="write the combined CSV here instead of stdout")

    v = sub.add_parser("validate", help="parse a config and print it with defaults filled")
    v.add_argument("config")
    return p


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def _print_summary(summary):
    print(f"{summary['objective']}: pooled minimum {summary['global_min']:.6g}")
    for method, m in summary["methods"].items():
        print(f"  {method:<16} mean final best {m['final_best_mean']:.6g}  mean AUC {m['area_under_regret_mean']:.6g}")
        best = min(range(len(m["final_best"])), key=m["final_best"].__getitem__)
        print(f"  {'':<16} argmin {m['best_params'][best]}")
    if "improvement" in summary:
        imp = summary["improvement"]
        pct = "n/a" if imp["percent"] is None else f"{imp['percent']:.3g}%"
        se = "n/a" if imp["standard_error"] is None else f"{imp['standard_error']:.3g}"
        print(f"  improvement of {imp['augmented']} over {imp['base']}: {pct} (SE {se})")


def cmd_optimize(args):
    cfg = _load(args.config)
    cfg = with_overrides(cfg, seeds=args.seeds, output=args.out, compare=True if args.compare else None)
    _print_summary(run_experiment(cfg, svg=args.svg))


def cmd_bench(args):
    for raw in BENCH_CONFIGS:
        raw = dict(raw, output=os.path.join(args.out, raw["objective"]))
        if args.seeds:
            raw["seeds"] = args.seeds
        _print_summary(run_experiment(config_from_dict(raw), svg=args.svg))


def cmd_regret(args):
    rows = []
    for path in args.csv:
        try:
            rows.extend(metrics.read_trials_csv(path))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise ConfigError("no trial rows found")
    global_min = metrics.recompute_regret(rows)
    metrics.write_trials_csv(args.out or sys.stdout, rows)
    curves = metrics.mean_regret_curves(rows)
    print(f"pooled minimum {global_min:.6g}", file=sys.stderr)
    for method, c in curves.items():
        print(f"  {method}: final mean regret {c['mean'][-1]:.6g}", file=sys.stderr)


def cmd_validate(args):
    cfg = _load(args.config)
    print(json.dumps(cfg.to_dict(), indent=2))


COMMANDS = {"optimize": cmd_optimize, "bench": cmd_bench, "regret": cmd_regret, "validate": cmd_validate}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HOMOPT_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface any runtime failure as exit 2
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
