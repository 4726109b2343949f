"""Bandits-over-Bandits: Exp3 picks RestartUCB's restart period per episode.

The horizon is cut into episodes of length ``episode_length(d, T)``. At the
start of every episode Exp3 samples a period from the candidate pool, a fresh
RestartUCB with that period plays the episode, and the episode's summed
observed reward (normalized into [0, 1] by ``reward_bound``) is the Exp3
feedback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import RunRecord, simulate
from .policies import PolicyParams, RestartUCB


def build_pool(d: int, S: float, T: int) -> list[int]:
    """Candidate periods ``floor(d^{1/4} S^{-1/2} 2^{i-1})``, ``i = 1..N``.

    ``N = ceil(log2(S T) / 2) + 1``. Entries are clamped into ``[1, T]`` and
    duplicates dropped, so the result is strictly increasing.
    """
    if d < 1 or T < 1 or not S > 0:
        raise ValueError("need d, T >= 1 and S > 0")
    N = math.ceil(0.5 * math.log2(S * T)) + 1
    base = d**0.25 / math.sqrt(S)
    pool = []
    for i in range(1, max(N, 1) + 1):
        h = min(max(math.floor(base * 2 ** (i - 1)), 1), T)
        if not pool or h > pool[-1]:
            pool.append(h)
    return pool


def episode_length(d: int, T: int) -> int:
    """``ceil(d sqrt(T))`` capped at ``T``."""
    if d < 1 or T < 1:
        raise ValueError("need d, T >= 1")
    return min(math.ceil(d * math.sqrt(T)), T)


def reward_bound(L: float, S: float, R: float, delta_len: int, T: int) -> float:
    """High-probability bound on |episode reward|: ``LS D + 2R sqrt(D ln(T / sqrt(D)))``."""
    log_term = max(math.log(T / math.sqrt(delta_len)), 0.0)
    return L * S * delta_len + 2.0 * R * math.sqrt(delta_len * log_term)


def exp3_rate(N: int, n_episodes: int) -> float:
    """Classical Exp3 exploration rate ``min(1, sqrt(N ln N / ((e - 1) K)))``."""
    if N <= 1:
        return 1.0
    return min(1.0, math.sqrt(N * math.log(N) / ((math.e - 1) * n_episodes)))


@dataclass
class Exp3State:
    weights: np.ndarray
    gamma: float
    episode: int = 0
    episode_len: int = 1

    @classmethod
    def fresh(cls, N: int, gamma: float, episode_len: int = 1) -> "Exp3State":
        return cls(np.ones(N), gamma, 0, episode_len)

    def probabilities(self) -> np.ndarray:
        N = len(self.weights)
        return (1.0 - self.gamma) * self.weights / self.weights.sum() + self.gamma / N


def exp3_sample(state: Exp3State, rng: np.random.Generator) -> int:
    p = state.probabilities()
    return int(rng.choice(len(p), p=p / p.sum()))


def exp3_update(state: Exp3State, chosen: int, episode_reward: float, bound: float) -> float:
    """Importance-weighted update of the chosen weight; returns the normalized reward."""
    r = (min(max(episode_reward, -bound), bound) + bound) / (2.0 * bound)
    p = state.probabilities()[chosen]
    N = len(state.weights)
    state.weights[chosen] *= math.exp(state.gamma * r / (p * N))
    # rescale so the largest weight is 1; probabilities are unchanged
    state.weights /= state.weights.max()
    state.episode += 1
    return r


@dataclass
class BobResult:
    record: RunRecord
    periods: list[int] = field(default_factory=list)
    episode_rewards: list[float] = field(default_factory=list)
    clipped: int = 0
    pool: list[int] = field(default_factory=list)
    episode_len: int = 0
    bound: float = 0.0


class _Slice:
    """Rounds ``start+1 .. start+length`` of an environment, renumbered from 1."""

    def __init__(self, env, start, length):
        self.T = length
        self.d = env.d
        self.L = env.L
        self.resample_arms = env.resample_arms
        self.arm_seq = env.arm_seq[start : start + length] if env.resample_arms else env.arm_seq
        self.thetas = env.thetas[start : start + length]
        self.eta = env.eta[start : start + length]
        self._env = env
        self._start = start

    def arms_at(self, t):
        return self._env.arms_at(self._start + t)

    def theta_at(self, t):
        return self.thetas[t - 1]

    def pull(self, x, t):
        return self._env.pull(x, self._start + t)


def run_bob(
    env,
    params: PolicyParams,
    rng: np.random.Generator,
    pool: list[int] | None = None,
    episode_len: int | None = None,
    engine: str = "fast",
) -> BobResult:
    """Run RestartUCB-BOB over the whole horizon of ``env``."""
    T, d = env.T, env.d
    pool = list(pool) if pool is not None else build_pool(d, params.S, T)
    D = episode_len or episode_length(d, T)
    n_episodes = math.ceil(T / D)
    state = Exp3State.fresh(len(pool), exp3_rate(len(pool), n_episodes), D)
    B = reward_bound(params.L, params.S, params.R, D, T)

    parts = []
    res = BobResult(record=None, pool=pool, episode_len=D, bound=B)
    for k in range(n_episodes):
        start = k * D
        length = min(D, T - start)
        i = exp3_sample(state, rng)
        H = pool[i]
        base = RestartUCB(
            d,
            PolicyParams(**{**params.__dict__, "T": T, "H": H, "delta": params.delta or 1.0 / (T * math.ceil(T / H))}),
        )
        base.params = PolicyParams(**{**base.params.__dict__, "T": length})
        rec = simulate(base, _Slice(env, start, length), engine)
        total = float(rec.reward.sum())
        if abs(total) > B:
            res.clipped += 1
        exp3_update(state, i, total, B)
        res.periods.append(H)
        res.episode_rewards.append(total)
        parts.append(rec)

    res.record = RunRecord(*(np.concatenate([getattr(p, f) for p in parts]) for f in RunRecord.__dataclass_fields__))
    return res
