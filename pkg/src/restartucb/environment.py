"""Non-stationary linear reward process.

Rounds are 1-based throughout: ``t = 1, ..., T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("abrupt", "gradual", "constant", "custom")

ABRUPT_CYCLE = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


def abrupt_change_points(T: int) -> list[int]:
    """First rounds of segments two to five of the abrupt schedule.

    The first half of the horizon is cut into four equal segments cycling
    through ``ABRUPT_CYCLE``; the second half holds ``[1, 0]``.
    """
    return [max(2, T * k // 8 + 1) for k in range(1, 5)]


@dataclass
class ParameterPath:
    """Generator of the unknown parameter sequence ``theta_1 .. theta_T``.

    ``values`` is required for ``constant`` (one vector) and ``custom``
    (``len(change_points) + 1`` vectors, one per piece).
    """

    kind: str
    T: int
    d: int = 2
    change_points: list[int] = field(default_factory=list)
    values: list | None = None
    S: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}; expected one of {KINDS}")
        if self.T < 1 or self.d < 1:
            raise ValueError("horizon and dimension must be positive")
        if self.kind in ("abrupt", "gradual") and self.d != 2:
            raise ValueError(f"the {self.kind} scenario is two-dimensional")
        if self.kind == "gradual" and self.T < 2:
            raise ValueError("the gradual scenario needs T >= 2")

        if self.kind == "abrupt":
            pieces = np.vstack([ABRUPT_CYCLE, ABRUPT_CYCLE[:1]])
            rounds = np.arange(1, self.T + 1)
            th = pieces[np.searchsorted(abrupt_change_points(self.T), rounds, side="right")]
            # segments collapse for tiny horizons; keep only real jumps
            moved = np.any(th[1:] != th[:-1], axis=1)
            self.change_points = [int(t) for t in rounds[1:][moved]]
            self._pieces = th[[0] + [c - 1 for c in self.change_points]]
        elif self.kind == "constant":
            v = np.eye(self.d)[0] if self.values is None else self.values
            self._pieces = np.asarray(v, dtype=float).reshape(1, self.d)
            self.change_points = []
        elif self.kind == "custom":
            if self.values is None:
                raise ValueError("custom path needs values")
            self._pieces = np.asarray(self.values, dtype=float).reshape(-1, self.d)
            if len(self._pieces) != len(self.change_points) + 1:
                raise ValueError("custom path needs len(change_points) + 1 values")
        else:
            self.change_points = []
            self._pieces = None

        cps = list(self.change_points)
        if cps != sorted(set(cps)) or any(c < 2 or c > self.T for c in cps):
            raise ValueError("change points must be strictly increasing and inside [2, T]")
        self.change_points = [int(c) for c in cps]

        norms = np.linalg.norm(self.thetas(), axis=1)
        if np.any(norms > self.S + 1e-12):
            raise ValueError(f"parameter norm {norms.max():.6g} exceeds S={self.S}")

    def theta_at(self, t: int) -> np.ndarray:
        if not 1 <= t <= self.T:
            raise ValueError(f"round {t} outside [1, {self.T}]")
        if self.kind == "gradual":
            a = math.pi * (t - 1) / (self.T - 1)
            return np.array([math.cos(a), math.sin(a)])
        return self._pieces[np.searchsorted(self.change_points, t, side="right")].copy()

    def thetas(self) -> np.ndarray:
        """All parameters as a ``(T, d)`` array, row ``t-1`` holding ``theta_t``."""
        if self.kind == "gradual":
            a = math.pi * np.arange(self.T) / (self.T - 1)
            return np.column_stack([np.cos(a), np.sin(a)])
        idx = np.searchsorted(self.change_points, np.arange(1, self.T + 1), side="right")
        return self._pieces[idx]


def theta_at(path: ParameterPath, t: int) -> np.ndarray:
    return path.theta_at(t)


def path_length(path: ParameterPath) -> float:
    """``sum_{t=2}^T ||theta_{t-1} - theta_t||_2``."""
    th = path.thetas()
    return float(np.linalg.norm(np.diff(th, axis=0), axis=1).sum())


@dataclass
class ArmSet:
    arms: np.ndarray
    L: float = 1.0

    def __post_init__(self):
        self.arms = np.asarray(self.arms, dtype=float)
        if self.arms.ndim != 2 or self.arms.shape[0] < 1:
            raise ValueError("arm set must be a non-empty (n, d) array")
        if np.any(np.linalg.norm(self.arms, axis=1) > self.L * (1 + 1e-12)):
            raise ValueError(f"arm norm exceeds L={self.L}")

    @property
    def n(self) -> int:
        return self.arms.shape[0]

    @property
    def d(self) -> int:
        return self.arms.shape[1]


def sample_arms(n: int, d: int, L: float, rng: np.random.Generator) -> ArmSet:
    """Standard-normal arms, each clamped into the ball of radius ``L``."""
    if n < 1 or d < 1 or not L > 0:
        raise ValueError("need n >= 1, d >= 1 and L > 0")
    x = rng.standard_normal((n, d))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    x = x * (L / np.maximum(L, norms))
    return ArmSet(x, L)


@dataclass
class NoiseModel:
    std: float = 0.1
    R: float | None = None

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("noise std must be nonnegative")
        if self.R is None:
            self.R = self.std
        if self.R < self.std:
            raise ValueError("sub-Gaussian parameter R must be at least the std")


def best_reward(arms: ArmSet, theta) -> tuple[float, int]:
    """Best expected reward and its arm index (lowest index on ties)."""
    vals = arms.arms @ np.asarray(theta, dtype=float)
    i = int(np.argmax(vals))
    return float(vals[i]), i


class Environment:
    """One realization of the reward process.

    The arm sets and the noise sequence are drawn up front from ``rng`` so
    that every policy run against the same seed faces identical data.
    With ``resample_arms`` a fresh arm set is drawn for every round.
    """

    def __init__(
        self,
        path: ParameterPath,
        n_arms: int,
        noise: NoiseModel,
        rng: np.random.Generator,
        L: float = 1.0,
        resample_arms: bool = False,
    ):
        self.path = path
        self.noise = noise
        self.L = L
        self.resample_arms = resample_arms
        self.T = path.T
        self.d = path.d
        k = self.T if resample_arms else 1
        self.arm_seq = np.stack([sample_arms(n_arms, path.d, L, rng).arms for _ in range(k)])
        self.eta = noise.std * rng.standard_normal(self.T)
        self.thetas = path.thetas()

    def arms_at(self, t: int) -> ArmSet:
        return ArmSet(self.arm_seq[t - 1 if self.resample_arms else 0], self.L)

    def theta_at(self, t: int) -> np.ndarray:
        return self.thetas[t - 1]

    def pull(self, x, t: int) -> float:
        """Observed reward ``x^T theta_t + eta_t``."""
        if not 1 <= t <= self.T:
            raise ValueError(f"round {t} outside [1, {self.T}]")
        return float(np.asarray(x, dtype=float) @ self.thetas[t - 1] + self.eta[t - 1])

    def path_length(self) -> float:
        return float(np.linalg.norm(np.diff(self.thetas, axis=0), axis=1).sum())


def pull(env: Environment, x, t: int) -> float:
    return env.pull(x, t)
