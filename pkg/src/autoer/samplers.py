"""Sampling strategies over mixed categorical/integer/continuous spaces.

All samplers share one interface: ``suggest(history)`` returns a value per
dimension, where ``history`` is the list of (values, objective) pairs seen so
far and the objective is maximized. Given the same seed and history, every
sampler is fully deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import erf
from scipy.stats import qmc


@dataclass(frozen=True)
class FloatDim:
    name: str
    low: float
    high: float


@dataclass(frozen=True)
class IntDim:
    name: str
    low: int
    high: int


@dataclass(frozen=True)
class CatDim:
    name: str
    choices: tuple


Dimension = Union[FloatDim, IntDim, CatDim]
History = Sequence[tuple[dict, float]]


def unit_to_value(dim: Dimension, u: float):
    """Map a unit-interval coordinate onto a dimension.

    Continuous dims scale affinely, integers floor onto the range, and
    categoricals partition [0, 1) into equal-width intervals.
    """
    if isinstance(dim, FloatDim):
        return dim.low + u * (dim.high - dim.low)
    if isinstance(dim, IntDim):
        span = dim.high - dim.low + 1
        return dim.low + min(int(u * span), span - 1)
    n = len(dim.choices)
    return dim.choices[min(int(u * n), n - 1)]


def contains(dim: Dimension, value) -> bool:
    if isinstance(dim, FloatDim):
        return dim.low <= value <= dim.high
    if isinstance(dim, IntDim):
        return isinstance(value, (int, np.integer)) and dim.low <= value <= dim.high
    return value in dim.choices


class RandomSampler:
    """Each parameter drawn uniformly and independently; O(d) per suggestion."""

    name = "random"

    def __init__(self, dims: Sequence[Dimension], seed: int = 0) -> None:
        self.dims = tuple(dims)
        self.rng = np.random.default_rng(seed)

    def suggest(self, history: History) -> dict:
        point = self.rng.random(len(self.dims))
        return {dim.name: unit_to_value(dim, float(u)) for dim, u in zip(self.dims, point)}


class QMCSampler:
    """Low-discrepancy (scrambled Sobol) coverage of the search space."""

    name = "qmc"

    def __init__(self, dims: Sequence[Dimension], seed: int = 0) -> None:
        self.dims = tuple(dims)
        self._engine = qmc.Sobol(d=len(self.dims), scramble=True, seed=seed)

    def suggest(self, history: History) -> dict:
        point = self._engine.random(1)[0]
        return {dim.name: unit_to_value(dim, float(u)) for dim, u in zip(self.dims, point)}


class TPESampler:
    """Density-ratio sampler: model good and bad trials per dimension and pick
    the candidate maximizing l(x)/g(x)."""

    name = "tpe"

    def __init__(
        self,
        dims: Sequence[Dimension],
        seed: int = 0,
        n_startup: int = 10,
        gamma: float = 0.25,
        n_candidates: int = 24,
    ) -> None:
        self.dims = tuple(dims)
        self.rng = np.random.default_rng(seed)
        self.n_startup = n_startup
        self.gamma = gamma
        self.n_candidates = n_candidates
        self._fallback = RandomSampler(dims, seed=seed + 1)

    def suggest(self, history: History) -> dict:
        n = len(history)
        objectives = np.array([obj for _, obj in history], dtype=float)
        if n < self.n_startup or np.unique(objectives).size < 2:
            # degenerate split (too little or all-equal history): prior sampling
            return self._fallback.suggest(history)
        n_good = max(1, int(math.ceil(self.gamma * n)))
        order = np.argsort(-objectives, kind="stable")
        good = [history[i][0] for i in order[:n_good]]
        bad = [history[i][0] for i in order[n_good:]]
        if not bad:
            return self._fallback.suggest(history)

        best_score = -np.inf
        best_values: dict = {}
        for _ in range(self.n_candidates):
            values: dict = {}
            score = 0.0
            for dim in self.dims:
                value, log_l, log_g = self._sample_dim(dim, good, bad)
                values[dim.name] = value
                score += log_l - log_g
            if score > best_score:
                best_score = score
                best_values = values
        return best_values

    def _sample_dim(self, dim: Dimension, good: list[dict], bad: list[dict]):
        if isinstance(dim, CatDim):
            counts_good = self._cat_probs(dim, good)
            counts_bad = self._cat_probs(dim, bad)
            idx = int(self.rng.choice(len(dim.choices), p=counts_good))
            return dim.choices[idx], math.log(counts_good[idx]), math.log(counts_bad[idx])
        low, high = float(dim.low), float(dim.high)
        good_vals = np.array([float(v[dim.name]) for v in good])
        bad_vals = np.array([float(v[dim.name]) for v in bad])
        bw_good = self._bandwidths(good_vals, low, high)
        bw_bad = self._bandwidths(bad_vals, low, high)
        i = int(self.rng.integers(0, len(good_vals)))
        x = float(np.clip(self.rng.normal(good_vals[i], bw_good[i]), low, high))
        if isinstance(dim, IntDim):
            x = int(np.clip(round(x), dim.low, dim.high))
        log_l = self._log_kde(float(x), good_vals, bw_good)
        log_g = self._log_kde(float(x), bad_vals, bw_bad)
        return x, log_l, log_g

    def _cat_probs(self, dim: CatDim, group: list[dict]) -> np.ndarray:
        # smoothed categorical frequencies (add-one)
        counts = np.ones(len(dim.choices))
        index = {c: i for i, c in enumerate(dim.choices)}
        for values in group:
            counts[index[values[dim.name]]] += 1
        return counts / counts.sum()

    @staticmethod
    def _bandwidths(values: np.ndarray, low: float, high: float) -> np.ndarray:
        """Per-point Gaussian bandwidth from neighbor spacing."""
        span = high - low
        if values.size == 1:
            return np.array([span])
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        gaps = np.diff(sorted_vals)
        left = np.concatenate([[span], gaps])
        right = np.concatenate([gaps, [span]])
        bw_sorted = np.maximum(left, right)
        bw = np.empty_like(bw_sorted)
        bw[order] = bw_sorted
        # generous floor: narrow kernels over-exploit at small trial budgets
        return np.clip(bw, span / 10.0, span)

    @staticmethod
    def _log_kde(x: float, centers: np.ndarray, bandwidths: np.ndarray) -> float:
        z = (x - centers) / bandwidths
        log_terms = -0.5 * z * z - np.log(bandwidths) - 0.5 * math.log(2 * math.pi)
        m = float(np.max(log_terms))
        return m + math.log(float(np.exp(log_terms - m).sum())) - math.log(len(centers))


class GPSampler:
    """Gaussian-process surrogate with log expected improvement acquisition.

    Inputs are one-hot + min-max encoded onto the unit hypercube; a Matern-5/2
    kernel is fit by maximizing the marginal likelihood over a small log-grid
    of scales and lengthscales, and a scrambled-Sobol candidate batch is scored
    by log expected improvement over the incumbent.
    """

    name = "gp"

    SCALES = (0.25, 1.0, 4.0)
    LENGTHSCALES = (0.1, 0.2, 0.5, 1.0, 2.0)
    NOISE = 1e-4

    def __init__(
        self,
        dims: Sequence[Dimension],
        seed: int = 0,
        n_startup: int = 10,
        n_candidates: int = 256,
    ) -> None:
        self.dims = tuple(dims)
        self.n_startup = n_startup
        self.n_candidates = n_candidates
        self._fallback = RandomSampler(dims, seed=seed + 1)
        self._engine = qmc.Sobol(d=len(self.dims), scramble=True, seed=seed)

    def _encode(self, values: dict) -> np.ndarray:
        parts: list[float] = []
        for dim in self.dims:
            if isinstance(dim, CatDim):
                onehot = [0.0] * len(dim.choices)
                onehot[dim.choices.index(values[dim.name])] = 1.0
                parts.extend(onehot)
            else:
                span = float(dim.high - dim.low)
                parts.append((float(values[dim.name]) - dim.low) / span if span else 0.0)
        return np.array(parts)

    @staticmethod
    def _matern52(dist: np.ndarray, lengthscale: float) -> np.ndarray:
        a = math.sqrt(5.0) * dist / lengthscale
        return (1.0 + a + a * a / 3.0) * np.exp(-a)

    def suggest(self, history: History) -> dict:
        n = len(history)
        if n < self.n_startup:
            # keep the candidate stream advancing so reruns stay deterministic
            self._engine.random(self.n_candidates)
            return self._fallback.suggest(history)
        y = np.array([obj for _, obj in history], dtype=float)
        y_std = float(np.std(y))
        candidates_u = self._engine.random(self.n_candidates)
        candidate_values = [
            {dim.name: unit_to_value(dim, float(u)) for dim, u in zip(self.dims, row)}
            for row in candidates_u
        ]
        if y_std == 0.0:
            return self._fallback.suggest(history)
        y_mean = float(np.mean(y))
        yn = (y - y_mean) / y_std
        X = np.stack([self._encode(values) for values, _ in history])
        dists = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)

        best_mll = -np.inf
        best = None
        for lengthscale in self.LENGTHSCALES:
            base = self._matern52(dists, lengthscale)
            for scale in self.SCALES:
                K = scale * base + (self.NOISE + 1e-8 * scale) * np.eye(n)
                try:
                    L = np.linalg.cholesky(K)
                except np.linalg.LinAlgError:
                    continue
                alpha = np.linalg.solve(L.T, np.linalg.solve(L, yn))
                mll = (
                    -0.5 * float(yn @ alpha)
                    - float(np.log(np.diag(L)).sum())
                    - 0.5 * n * math.log(2 * math.pi)
                )
                if mll > best_mll:
                    best_mll = mll
                    best = (scale, lengthscale, L, alpha)
        if best is None:
            return self._fallback.suggest(history)
        scale, lengthscale, L, alpha = best

        Xc = np.stack([self._encode(v) for v in candidate_values])
        cross = np.linalg.norm(Xc[:, None, :] - X[None, :, :], axis=-1)
        Kc = scale * self._matern52(cross, lengthscale)
        mu = Kc @ alpha
        v = np.linalg.solve(L, Kc.T)
        var = np.maximum(scale - np.einsum("ij,ij->j", v, v), 1e-12)
        sd = np.sqrt(var)
        incumbent = float(np.max(yn))
        z = (mu - incumbent) / sd
        # EI = sd * (z * Phi(z) + phi(z))
        phi = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        Phi = 0.5 * (1.0 + erf(z / math.sqrt(2.0)))
        ei = sd * (z * Phi + phi)
        log_ei = np.log(np.maximum(ei, 1e-300))
        return candidate_values[int(np.argmax(log_ei))]


SAMPLERS = {
    "random": RandomSampler,
    "qmc": QMCSampler,
    "tpe": TPESampler,
    "gp": GPSampler,
}


def make_sampler(name: str, dims: Sequence[Dimension], seed: int = 0, **kwargs):
    try:
        cls = SAMPLERS[name]
    except KeyError:
        raise ValueError(f"unknown sampler {name!r}; expected one of {sorted(SAMPLERS)}") from None
    return cls(dims, seed=seed, **kwargs)
