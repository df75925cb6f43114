"""Sampling from the product measure with per-edge probability gamma * n^-alpha.

Each k-subset of the universe carries relation R_i independently with
probability p_i = gamma_i * n^-alpha_i.  Generation is sparse: the edge
count is drawn Binomial(C(n,k), p) and that many distinct k-sets are
chosen uniformly, which is equidistributed with per-set coin flips.

Streams are splittable: trial t of master seed s uses the generator
seeded by SeedSequence(s, spawn_key=(t,)), so trials are reproducible
and order-independent under parallel execution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FiniteStructure, Signature

_INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class SampleConfig:
    n: int
    sig: Signature
    seed: int
    trial_index: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("universe size must be >= 1")
        # for n >= 2 every per-edge probability is automatically in [0,1):
        # gamma <= 1 and n^-alpha < 1 when alpha > 0
        for rel in self.sig.relations:
            p = edge_probability(self.n, rel)
            if not (0 <= p <= 1):
                raise ValueError(f"relation {rel.name}: probability {p} out of range")


def edge_probability(n: int, rel) -> float:
    """p = gamma * n^-alpha evaluated in floats."""
    return float(rel.gamma) * math.exp(-float(rel.alpha) * math.log(n))


def trial_rng(seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    """Deterministic derived stream for (seed, trial); stream 0 is the structure draw."""
    key = (trial_index,) if stream == 0 else (trial_index, stream)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _sample_edges(rng: np.random.Generator, n: int, k: int, p: float) -> np.ndarray:
    """count ~ Binomial(C(n,k), p) distinct sorted k-rows, uniformly.

    Rejection on sorted random k-tuples, deduplicated through base-n scalar
    codes whose order is exactly the canonical lex order; when the
    accumulated pool overshoots, a uniform subset is kept, which preserves
    uniformity by exchangeability of the pool.
    """
    total = math.comb(n, k)
    if total == 0 or p == 0.0:
        return np.empty((0, k), dtype=np.int64)
    if total > _INT64_MAX or n**k > _INT64_MAX:
        raise ValueError(f"C({n},{k}) exceeds 64-bit range; universe too large for sampling")
    count = int(rng.binomial(total, p))
    if count == 0:
        return np.empty((0, k), dtype=np.int64)
    codes = np.empty(0, dtype=np.int64)
    while codes.shape[0] < count:
        batch = max(64, int((count - codes.shape[0]) * 1.15) + 8)
        draw = rng.integers(0, n, size=(batch, k), dtype=np.int64)
        if k > 1:
            draw = np.sort(draw, axis=1)
            draw = draw[(np.diff(draw, axis=1) > 0).all(axis=1)]
        fresh = np.zeros(draw.shape[0], dtype=np.int64)
        for j in range(k):
            fresh = fresh * n + draw[:, j]
        codes = np.unique(np.concatenate([codes, fresh]))
        if codes.shape[0] > count:
            keep = np.sort(rng.permutation(codes.shape[0])[:count])
            codes = codes[keep]
    out = np.empty((count, k), dtype=np.int64)
    rem = codes
    for j in range(k - 1, -1, -1):
        out[:, j] = rem % n
        rem = rem // n
    return out


def sample(cfg: SampleConfig) -> FiniteStructure:
    """Draw one structure under the product measure; deterministic in (seed, trial)."""
    rng = trial_rng(cfg.seed, cfg.trial_index)
    arrays = []
    for rel in cfg.sig.relations:
        p = edge_probability(cfg.n, rel)
        arrays.append(_sample_edges(rng, cfg.n, rel.arity, p))
    return FiniteStructure(cfg.sig, cfg.n, arrays, _canonical=True)


def log_prob(N: FiniteStructure, n_param: int) -> float:
    """ln P_n(N) under the product measure; -inf if a present edge has gamma 0."""
    if N.n != n_param:
        raise ValueError(f"structure has universe {N.n}, measure parameter is {n_param}")
    total = 0.0
    for i, rel in enumerate(N.sig.relations):
        w = N.w(i)
        slots = math.comb(n_param, rel.arity)
        if w > slots:
            raise AssertionError("more edges than k-subsets")
        p = edge_probability(n_param, rel)
        if w > 0:
            if rel.gamma == 0:
                return float("-inf")
            total += w * (math.log(float(rel.gamma)) - float(rel.alpha) * math.log(n_param))
        if slots - w > 0:
            if p == 1.0:
                return float("-inf")
            total += (slots - w) * math.log1p(-p)
    return total
