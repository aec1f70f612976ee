"""HomOpt scheduler: interleaves base-sampler proposals, local perturbation
of the incumbent and homotopy steps between successive GAM surrogates.

After ``warmup`` trials the branch is chosen from ``C_T mod 5`` where
``C_T`` is the number of completed trials:

    0, 2 -> base sampler      3, 4 -> perturb incumbent      1 -> homotopy
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

import numpy as np
from sklearn.base import BaseEstimator

from .gam import GamConfig, GamFitError
from .history import Branch, Trial, TrialHistory
from .homotopy import HomotopyConfig, track_path
from .neldermead import NmConfig, SolverError
from .objectives import Objective, ObjectiveError
from .samplers import BaseSampler, RandomSampler
from .space import SearchSpace, round_half_away

__all__ = [
    "Branch", "Trial", "TrialHistory", "DriverConfig", "HomOpt",
    "select_branch", "perturb_best", "homotopy_step", "run",
]

log = logging.getLogger(__name__)

FAILED_LOSS = 1e30


@dataclass(frozen=True)
class DriverConfig:
    max_trials: Optional[int] = 500
    max_time: Optional[float] = None
    warmup: int = 20
    distance: float = 0.005
    k: float = 0.5
    top_n: int = 10
    homotopy: HomotopyConfig = field(default_factory=HomotopyConfig)
    gam: GamConfig = field(default_factory=GamConfig)
    sampler: BaseSampler = field(default_factory=RandomSampler)
    seed: Optional[int] = None
    augment: bool = True

    def __post_init__(self):
        if self.max_trials is None and self.max_time is None:
            raise ValueError("set max_trials, max_time or both")
        if self.max_trials is not None and self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if self.max_time is not None and self.max_time <= 0:
            raise ValueError("max_time must be positive")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if self.augment and self.max_trials is not None and self.max_trials < self.warmup:
            raise ValueError("max_trials must be >= warmup")
        if not 0 < self.k <= 1:
            raise ValueError("k must lie in (0, 1]")
        if self.distance < 0:
            raise ValueError("distance must be >= 0")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")


def select_branch(completed: int, warmup: int) -> Branch:
    if completed < warmup:
        return Branch.WARMUP
    r = completed % 5
    if r in (0, 2):
        return Branch.INNER
    if r in (3, 4):
        return Branch.PERTURB
    return Branch.HOMOTOPY


def perturb_best(history: TrialHistory, distance: float, rng: np.random.Generator,
                 space: SearchSpace, top_n: int = 10) -> np.ndarray:
    """Jitter the incumbent uniformly within +-distance * var(top trials), per coordinate."""
    top = history.ranked(min(top_n, len(history)))
    svar = np.var(np.vstack([t.params for t in top]), axis=0) * distance
    u = rng.uniform(-svar, svar)
    return space.clamp(top[0].params + u)


def homotopy_step(history: TrialHistory, k: float, hcfg: HomotopyConfig,
                  gcfg: GamConfig, space: SearchSpace) -> np.ndarray:
    """Fit old/new surrogates, track the path from the incumbent, return the best path point under g.

    Raises GamFitError or SolverError when the surrogates cannot be built or searched.
    """
    n_recent = int(round_half_away(k * len(history)))
    if n_recent < 2:
        raise GamFitError(f"round(k * C_T) = {n_recent} < 2 points for the old surrogate")
    recent = history.recent(n_recent)
    f = gcfg.fit(recent.X, recent.losses)
    g = gcfg.fit(history.X, history.losses)
    path = track_path(f, g, history.best().params, space.lower, space.upper, hcfg)
    scores = [g.predict_one(p) for p in path.points]
    return space.clamp(path.points[int(np.argmin(scores))])


def _sentinel(history: TrialHistory) -> float:
    finite = [t.loss for t in history if not t.failed]
    if not finite:
        return FAILED_LOSS
    worst = max(finite)
    return worst + 10.0 * max(abs(worst), 1.0)


def run(objective: Callable[[Mapping[str, Any]], float], space: SearchSpace, cfg: DriverConfig,
        callback: Optional[Callable[[dict], None]] = None) -> TrialHistory:
    """Run one optimization and return the full trial log.

    ``objective`` receives decoded assignments. It may raise ObjectiveError or
    return a non-finite value; such trials get a sentinel loss above every
    finite loss seen so far. ``callback`` receives one event dict per trial.
    """
    if space.dim == 0:
        raise ValueError("empty search space")
    sampler_seed, jitter_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    sampler_rng = np.random.default_rng(sampler_seed)
    jitter_rng = np.random.default_rng(jitter_seed)
    history = TrialHistory()
    best = math.inf
    start = time.perf_counter()

    while True:
        n = len(history)
        if cfg.max_trials is not None and n >= cfg.max_trials:
            break
        if cfg.max_time is not None and time.perf_counter() - start >= cfg.max_time:
            break

        branch = select_branch(n, cfg.warmup) if cfg.augment else Branch.INNER
        x = None
        if branch is Branch.PERTURB:
            x = perturb_best(history, cfg.distance, jitter_rng, space, cfg.top_n)
        elif branch is Branch.HOMOTOPY:
            try:
                x = homotopy_step(history, cfg.k, cfg.homotopy, cfg.gam, space)
            except (GamFitError, SolverError) as exc:
                log.debug("homotopy step at C_T=%d fell back to the base sampler: %s", n, exc)
                branch = Branch.INNER
        if x is None:
            x = space.clamp(cfg.sampler.propose(history, space, sampler_rng))

        assignment = space.decode(x)
        failed = False
        try:
            loss = float(objective(assignment))
        except ObjectiveError as exc:
            log.warning("trial %d failed: %s", n, exc)
            loss = math.nan
        if not math.isfinite(loss):
            loss, failed = _sentinel(history), True
        history.append(x, loss, branch, failed)
        best = min(best, loss)
        if callback is not None:
            callback({
                "index": n,
                "branch": branch.value,
                "params": assignment,
                "loss": loss,
                "best_so_far": best,
                "elapsed": time.perf_counter() - start,
                "failed": failed,
            })
    return history


class HomOpt(BaseEstimator):
    """Estimator-style front end to :func:`run`.

    Parameters mirror :class:`DriverConfig`. After :meth:`optimize` the fitted
    attributes are ``history_``, ``best_x_`` (encoded), ``best_params_``
    (decoded) and ``best_loss_``. With ``augment=False`` the base sampler
    runs alone.
    """

    def __init__(self, sampler=None, max_trials=500, max_time=None, warmup=20, distance=0.005,
                 k=0.5, n_steps=5, top_n=10, n_splines=25, penalty=1e-4, nm_max_iter=None,
                 augment=True, random_state=None):
        self.sampler = sampler
        self.max_trials = max_trials
        self.max_time = max_time
        self.warmup = warmup
        self.distance = distance
        self.k = k
        self.n_steps = n_steps
        self.top_n = top_n
        self.n_splines = n_splines
        self.penalty = penalty
        self.nm_max_iter = nm_max_iter
        self.augment = augment
        self.random_state = random_state

    def config(self) -> DriverConfig:
        return DriverConfig(
            max_trials=self.max_trials,
            max_time=self.max_time,
            warmup=self.warmup,
            distance=self.distance,
            k=self.k,
            top_n=self.top_n,
            homotopy=HomotopyConfig(self.n_steps, NmConfig(max_iter=self.nm_max_iter)),
            gam=GamConfig(self.n_splines, self.penalty),
            sampler=self.sampler if self.sampler is not None else RandomSampler(),
            seed=self.random_state,
            augment=self.augment,
        )

    def optimize(self, objective, space: Optional[SearchSpace] = None, callback=None):
        if space is None:
            if not isinstance(objective, Objective):
                raise ValueError("space is required unless objective is an Objective")
            space = objective.space
        self.space_ = space
        self.history_ = run(objective, space, self.config(), callback)
        best = self.history_.best()
        self.best_x_ = best.params
        self.best_params_ = space.decode(best.params)
        self.best_loss_ = best.loss
        return self
