"""Base sampling strategies that propose the next encoded point.

All samplers take the trial history, the search space and an explicit
``numpy.random.Generator``; a proposal is a pure function of those three.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.spatial.distance import cdist, pdist
from scipy.special import logsumexp
from scipy.stats import norm
from sklearn.base import BaseEstimator

from ._stdio import ProtocolError, exchange
from .history import TrialHistory
from .space import SearchSpace


class SamplerError(RuntimeError):
    pass


class BaseSampler(BaseEstimator):
    def propose(self, history: TrialHistory, space: SearchSpace, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


class RandomSampler(BaseSampler):
    def propose(self, history, space, rng):
        if space.dim == 0:
            raise SamplerError("empty search space")
        return space.sample_uniform(rng)


def split_good_bad(losses, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the ``ceil(gamma * n)`` lowest losses and of the rest.

    Ties are broken by position, so the split depends only on loss ranks.
    """
    losses = np.asarray(losses, dtype=float)
    n = losses.size
    n_good = math.ceil(round(gamma * n, 9))
    n_good = min(max(n_good, 1), n - 1)
    order = np.argsort(losses, kind="stable")
    return order[:n_good], order[n_good:]


def silverman_bandwidth(points: np.ndarray, width: np.ndarray) -> np.ndarray:
    """Per-column Silverman bandwidth, floored at 1e-3 of the box width."""
    n = points.shape[0]
    std = points.std(axis=0, ddof=1) if n > 1 else np.zeros(points.shape[1])
    q75, q25 = np.percentile(points, [75, 25], axis=0)
    spread = np.minimum(std, (q75 - q25) / 1.34)
    spread = np.where(spread > 0, spread, std)
    h = 0.9 * spread * n ** (-0.2)
    floor = np.where(width > 0, 1e-3 * width, 1.0)
    return np.maximum(h, floor)


class ParzenMixture:
    """Per-dimension Gaussian Parzen mixtures plus a uniform prior component.

    Each dimension is an independent mixture of ``n`` Gaussians centered on
    ``points`` and one uniform component over the box, all with weight
    ``1 / (n + 1)``. The density is the product over dimensions.
    """

    def __init__(self, points, bandwidth, lower, upper):
        self.points = np.asarray(points, dtype=float)
        self.bandwidth = np.asarray(bandwidth, dtype=float)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)

    def sample(self, n, rng):
        n_pts, dim = self.points.shape
        comp = rng.integers(0, n_pts + 1, size=(n, dim))
        from_prior = comp == n_pts
        centers = self.points[np.minimum(comp, n_pts - 1), np.arange(dim)]
        out = centers + rng.standard_normal((n, dim)) * self.bandwidth
        prior = rng.uniform(self.lower, self.upper, size=(n, dim))
        return np.clip(np.where(from_prior, prior, out), self.lower, self.upper)

    def log_pdf(self, X):
        X = np.atleast_2d(X)
        n_pts = self.points.shape[0]
        z = (X[:, None, :] - self.points[None, :, :]) / self.bandwidth
        logk = -0.5 * z ** 2 - np.log(self.bandwidth) - 0.5 * math.log(2 * math.pi)
        width = self.upper - self.lower
        log_prior = np.where(width > 0, -np.log(np.where(width > 0, width, 1.0)), 0.0)
        inside = (X >= self.lower) & (X <= self.upper)
        log_prior = np.where(inside, log_prior, -np.inf)[:, None, :]
        per_dim = logsumexp(np.concatenate([logk, log_prior], axis=1), axis=1) - math.log(n_pts + 1)
        return per_dim.sum(axis=1)


class TPESampler(BaseSampler):
    """Tree-structured Parzen estimator.

    Parameters
    ----------
    gamma : float, default=0.2
        Fraction of trials (by loss rank) forming the "good" density.
    n_candidates : int, default=10
        Points drawn from the good density; the best density ratio wins.
    n_startup : int, default=10
        Uniform proposals before the densities are used.
    """

    def __init__(self, gamma=0.2, n_candidates=10, n_startup=10):
        self.gamma = gamma
        self.n_candidates = n_candidates
        self.n_startup = n_startup

    def densities(self, history, space):
        X, y = history.X, history.losses
        good, bad = split_good_bad(y, self.gamma)
        width = space.upper - space.lower
        lo, hi = space.lower, space.upper
        l = ParzenMixture(X[good], silverman_bandwidth(X[good], width), lo, hi)
        g = ParzenMixture(X[bad], silverman_bandwidth(X[bad], width), lo, hi)
        return l, g

    def propose(self, history, space, rng):
        if space.dim == 0:
            raise SamplerError("empty search space")
        if len(history) < max(self.n_startup, 2):
            return space.sample_uniform(rng)
        l, g = self.densities(history, space)
        cand = l.sample(self.n_candidates, rng)
        score = l.log_pdf(cand) - g.log_pdf(cand)
        return cand[int(np.argmax(score))]


def expected_improvement(mu, sigma, best):
    """EI for minimization; zero where ``sigma`` is zero and ``mu >= best``."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    imp = best - mu
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, imp / np.where(sigma > 0, sigma, 1.0), 0.0)
    ei = np.where(sigma > 0, imp * norm.cdf(z) + sigma * norm.pdf(z), np.maximum(imp, 0.0))
    return np.maximum(ei, 0.0)


class GaussianProcess:
    """Zero-mean GP with a fixed squared-exponential kernel."""

    def __init__(self, X, y, length_scale, signal_var, noise):
        self.X = X
        self.length_scale = length_scale
        self.signal_var = signal_var
        K = self.kernel(X, X)
        jitter = noise
        for _ in range(8):
            try:
                self.chol = cho_factor(K + jitter * np.eye(len(X)), lower=True)
                break
            except np.linalg.LinAlgError:
                jitter *= 10
        else:
            raise SamplerError("GP covariance singular after jitter escalation")
        self.alpha = cho_solve(self.chol, y)

    def kernel(self, A, B):
        d2 = cdist(A, B, "sqeuclidean")
        return self.signal_var * np.exp(-0.5 * d2 / self.length_scale ** 2)

    def predict(self, Xs):
        Ks = self.kernel(self.X, Xs)
        mu = Ks.T @ self.alpha
        v = solve_triangular(self.chol[0], Ks, lower=True)
        var = np.maximum(self.signal_var - np.sum(v * v, axis=0), 0.0)
        return mu, np.sqrt(var)


class GPEISampler(BaseSampler):
    """Gaussian-process expected-improvement sampler ("Bayes").

    Inputs are rescaled to the unit box; the kernel length scale is the median
    pairwise distance of the observed points and is never optimized.
    """

    def __init__(self, n_startup=20, n_candidates=10, noise=1e-6):
        self.n_startup = n_startup
        self.n_candidates = n_candidates
        self.noise = noise

    def fit_gp(self, history, space):
        lo, width = space.lower, space.upper - space.lower
        scale = np.where(width > 0, width, 1.0)
        U = (history.X - lo) / scale
        y = history.losses
        sd = y.std()
        ys = (y - y.mean()) / (sd if sd > 0 else 1.0)
        dists = pdist(U)
        ell = float(np.median(dists)) if dists.size else 1.0
        if not ell > 0:
            ell = 1.0
        var = float(ys.var())
        gp = GaussianProcess(U, ys, ell, var if var > 0 else 1.0, self.noise)
        return gp, ys, lo, scale

    def propose(self, history, space, rng):
        if space.dim == 0:
            raise SamplerError("empty search space")
        if len(history) < max(self.n_startup, 2):
            return space.sample_uniform(rng)
        gp, ys, lo, scale = self.fit_gp(history, space)
        cand = np.vstack([space.sample_uniform(rng) for _ in range(self.n_candidates)])
        mu, sigma = gp.predict((cand - lo) / scale)
        ei = expected_improvement(mu, sigma, ys.min())
        return cand[int(np.argmax(ei))]


class ExternalSampler(BaseSampler):
    """Delegates proposals to a user command speaking JSON over stdio.

    The command receives ``{"space": [...], "history": [{"params": {...},
    "loss": ...}]}`` on stdin and must print ``{"params": {...}}``.
    """

    def __init__(self, command=None, timeout=300.0):
        self.command = command
        self.timeout = timeout

    def propose(self, history, space, rng):
        payload = {
            "space": space.to_list(),
            "history": [{"params": space.decode(t.params), "loss": t.loss} for t in history],
        }
        try:
            reply = exchange(self.command, payload, self.timeout)
            return space.encode(reply["params"])
        except (ProtocolError, KeyError, ValueError, TypeError) as exc:
            raise SamplerError(f"external sampler failed: {exc}") from exc


SAMPLERS = {"random": RandomSampler, "tpe": TPESampler, "bayes": GPEISampler, "external": ExternalSampler}


def make_sampler(kind: str, **options) -> BaseSampler:
    try:
        cls = SAMPLERS[kind]
    except KeyError:
        raise ValueError(f"unknown sampler {kind!r}; expected one of {sorted(SAMPLERS)}") from None
    return cls(**options)
