from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Branch(str, enum.Enum):
    WARMUP = "warmup"
    INNER = "inner"
    PERTURB = "perturb"
    HOMOTOPY = "homotopy"


@dataclass(frozen=True)
class Trial:
    params: np.ndarray  # encoded, pre-rounding
    loss: float
    index: int
    branch: Branch
    failed: bool = False


@dataclass
class TrialHistory:
    trials: list = field(default_factory=list)

    def __len__(self):
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def __getitem__(self, i):
        return self.trials[i]

    def append(self, params, loss: float, branch: Branch, failed: bool = False) -> Trial:
        trial = Trial(np.asarray(params, dtype=float).copy(), float(loss), len(self.trials), Branch(branch), failed)
        self.trials.append(trial)
        return trial

    @property
    def X(self) -> np.ndarray:
        if not self.trials:
            return np.empty((0, 0))
        return np.vstack([t.params for t in self.trials])

    @property
    def losses(self) -> np.ndarray:
        return np.array([t.loss for t in self.trials], dtype=float)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.losses)

    def best(self) -> Trial:
        if not self.trials:
            raise ValueError("empty history")
        # first occurrence wins on ties
        return self.trials[int(np.argmin(self.losses))]

    def ranked(self, n: int | None = None) -> list:
        """Trials sorted by loss (ties by index), optionally the first ``n``."""
        order = np.argsort(self.losses, kind="stable")
        if n is not None:
            order = order[:n]
        return [self.trials[i] for i in order]

    def recent(self, n: int) -> "TrialHistory":
        return TrialHistory(self.trials[len(self.trials) - n:] if n > 0 else [])
