"""Minimizer tracking along the linear blend of two surrogates.

``H(x, t) = t * f(x) + (1 - t) * g(x)`` deforms the old surrogate ``f``
(t = 1) into the new surrogate ``g`` (t = 0). ``track_path`` steps t down
in uniform increments and warm-starts each simplex search at the previous
minimizer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .neldermead import NmConfig, minimize


@dataclass(frozen=True)
class HomotopyConfig:
    n_steps: int = 5
    nm: NmConfig = field(default_factory=NmConfig)

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")


@dataclass(frozen=True)
class HomotopyPath:
    points: list
    t_values: list
    values: list  # H(points[k], t_values[k])


def eval_homotopy(f, g, x, t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if f.n_features_in_ != g.n_features_in_:
        raise ValueError("surrogates have different input dimensions")
    return t * f.predict_one(x) + (1.0 - t) * g.predict_one(x)


def track_path(f, g, x0, lower, upper, config: HomotopyConfig = HomotopyConfig()) -> HomotopyPath:
    """Follow a minimizer of H(., t) from t = 1 to t = 0.

    ``x0`` is recorded as the t = 1 point without minimizing first. Step k
    uses ``t = 1 - k / n_steps`` so the final step is exactly t = 0.
    """
    x = np.clip(np.asarray(x0, dtype=float).reshape(-1), lower, upper)
    points, ts, vals = [x], [1.0], [eval_homotopy(f, g, x, 1.0)]
    for k in range(1, config.n_steps + 1):
        t = 1.0 - k / config.n_steps
        res = minimize(lambda z: eval_homotopy(f, g, z, t), x, lower, upper, config.nm)
        x = res.x
        points.append(x)
        ts.append(t)
        vals.append(res.fun)
    return HomotopyPath(points, ts, vals)
