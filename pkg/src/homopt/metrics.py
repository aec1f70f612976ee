"""Simple-regret traces, seed-paired improvement summaries and result files."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

CSV_COLUMNS = ["run_id", "seed", "method", "trial_index", "branch", "loss", "best_so_far", "regret", "elapsed_s"]


@dataclass(frozen=True)
class RegretTrace:
    per_iteration: np.ndarray
    global_min: float

    @property
    def area(self) -> float:
        return float(np.sum(self.per_iteration))


@dataclass(frozen=True)
class ImprovementSummary:
    percent_improvement: float
    standard_error: float
    n_seeds: int
    n_excluded: int = 0


def regret(losses: Sequence[float], global_min: float) -> RegretTrace:
    """Best-so-far loss minus ``global_min`` at every iteration.

    Values below ``global_min`` are reported as negative regret, not clamped.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.size == 0:
        raise ValueError("regret of an empty loss sequence")
    if not np.all(np.isfinite(losses)):
        raise ValueError("losses must be finite")
    return RegretTrace(np.minimum.accumulate(losses) - global_min, float(global_min))


def pooled_regret(runs: Mapping[str, Sequence[Sequence[float]]]) -> tuple[float, dict]:
    """Regret traces for several methods against the minimum over every run.

    ``runs`` maps method name to a list of per-seed loss sequences.
    """
    global_min = min(float(np.min(r)) for rs in runs.values() for r in rs)
    return global_min, {m: [regret(r, global_min) for r in rs] for m, rs in runs.items()}


def percent_improvement(base: Sequence[float], aug: Sequence[float]) -> ImprovementSummary:
    """Mean and standard error of ``100 * (base - aug) / |base|`` over paired seeds.

    Seeds with a zero base value are dropped and counted in ``n_excluded``.
    """
    base = np.asarray(base, dtype=float)
    aug = np.asarray(aug, dtype=float)
    if base.shape != aug.shape or base.ndim != 1 or base.size == 0:
        raise ValueError("base and aug must be equal-length, non-empty sequences")
    keep = base != 0
    excluded = int(np.sum(~keep))
    if excluded:
        log.warning("percent_improvement: %d seed(s) with zero base value excluded", excluded)
    per_seed = 100.0 * (base[keep] - aug[keep]) / np.abs(base[keep])
    n = per_seed.size
    if n == 0:
        return ImprovementSummary(math.nan, math.nan, 0, excluded)
    se = float(np.std(per_seed, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return ImprovementSummary(float(np.mean(per_seed)), se, n, excluded)


def write_trials_csv(dest, rows: Iterable[Mapping]) -> None:
    """Write trial rows to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(dest, rows)
        return
    with open(dest, "w", newline="") as fh:
        _write_rows(fh, rows)


def _write_rows(fh, rows):
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})


def read_trials_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"{path}: header {reader.fieldnames} does not match {CSV_COLUMNS}")
        rows = []
        for r in reader:
            r["seed"] = int(r["seed"])
            r["trial_index"] = int(r["trial_index"])
            for k in ("loss", "best_so_far", "regret", "elapsed_s"):
                r[k] = float(r[k])
            rows.append(r)
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def recompute_regret(rows: list[dict]) -> float:
    """Overwrite ``regret`` in trial rows using the pooled minimum across all of them."""
    global_min = min(r["loss"] for r in rows)
    for r in rows:
        r["regret"] = r["best_so_far"] - global_min
    return global_min


def mean_regret_curves(rows: list[dict]) -> dict:
    """Per-method mean and standard error of regret at each trial index."""
    by_method: dict = {}
    for r in rows:
        by_method.setdefault(r["method"], {}).setdefault(r["run_id"], []).append(r)
    out = {}
    for method, runs in by_method.items():
        length = min(len(v) for v in runs.values())
        mat = np.array([[r["regret"] for r in sorted(v, key=lambda r: r["trial_index"])[:length]]
                        for v in runs.values()])
        se = mat.std(axis=0, ddof=1) / math.sqrt(len(mat)) if len(mat) > 1 else np.zeros(length)
        out[method] = {"mean": mat.mean(axis=0).tolist(), "se": se.tolist()}
    return out


def write_regret_svg(path, curves: Mapping[str, Mapping[str, list]], title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for method, c in curves.items():
        mean, se = np.asarray(c["mean"]), np.asarray(c["se"])
        it = np.arange(1, mean.size + 1)
        ax.plot(it, mean, label=method)
        ax.fill_between(it, np.maximum(mean - se, 1e-300), mean + se, alpha=0.2)
    if all(np.all(np.asarray(c["mean"]) > 0) for c in curves.values()):
        ax.set_yscale("log")
    ax.set_xlabel("trial")
    ax.set_ylabel("simple regret")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
