"""UCB policies for non-stationary linear bandits.

All four policies share one selection core: a ridge estimate built from the
policy's current data, the confidence radius ``beta_t``, and the optimistic
index ``<x, theta_hat> + beta_t * ||x||_{V^{-1}}``. They differ only in which
data the estimate uses:

* RestartUCB discards everything every ``H`` rounds.
* OracleRestartUCB discards everything at known change points.
* WindowUCB keeps the last ``w`` observations.
* StaticUCB keeps everything.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .environment import ArmSet, Environment
from .linalg import (
    CovarianceState,
    NumericalDegeneracyError,
    init_covariance,
    rank_one_downdate,
    rank_one_update,
    rebuild_covariance,
)


@dataclass
class PolicyParams:
    """Shared knobs. ``delta=None`` picks the union-bound default per policy."""

    T: int
    lam: float = 1.0
    delta: float | None = None
    S: float = 1.0
    L: float = 1.0
    R: float = 0.1
    H: int | None = None
    w: int | None = None
    change_points: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("horizon must be positive")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not (self.S > 0 and self.L > 0 and self.R >= 0):
            raise ValueError("S and L must be positive, R nonnegative")
        if self.H is not None and not 1 <= self.H:
            raise ValueError("restart period must be >= 1")
        if self.w is not None and not 1 <= self.w:
            raise ValueError("window must be >= 1")


def default_delta(T: int, n_epochs: int) -> float:
    """Per-epoch confidence ``1 / (T * n_epochs)`` from a union bound over epochs."""
    return 1.0 / (T * max(1, n_epochs))


@dataclass
class PolicyState:
    cov: CovarianceState
    s_vec: np.ndarray
    t0: int = 1
    epoch: int = 0
    buffer: deque | None = None
    # diagnostics of the latest selection
    last_beta: float = 0.0
    last_norm: float = 0.0
    last_theta_hat: np.ndarray | None = None


def new_state(d: int, lam: float, windowed: bool = False) -> PolicyState:
    return PolicyState(init_covariance(d, lam), np.zeros(d), buffer=deque() if windowed else None)


def restart(state: PolicyState, t: int) -> PolicyState:
    state.cov = init_covariance(state.cov.dim, state.cov.lam)
    state.s_vec = np.zeros(state.cov.dim)
    state.t0 = t
    state.epoch += 1
    return state


def estimate(state: PolicyState) -> np.ndarray:
    """Ridge estimate ``V^{-1} sum r_s x_s`` on the state's data."""
    return state.cov.V_inv @ state.s_vec


def confidence_radius(t: int, state: PolicyState, params: PolicyParams, delta: float) -> float:
    """``sqrt(lam) S + R sqrt(2 log(1/delta) + d log(1 + (t - t0) L^2 / (lam d)))``."""
    d = state.cov.dim
    n = t - state.t0
    if n < 0:
        raise ValueError(f"round {t} precedes the epoch start {state.t0}")
    inner = 2.0 * math.log(1.0 / delta) + d * math.log(1.0 + n * params.L**2 / (params.lam * d))
    return math.sqrt(params.lam) * params.S + params.R * math.sqrt(inner)


def ucb_indices(arms: ArmSet, theta_hat, beta: float, cov: CovarianceState) -> np.ndarray:
    X = arms.arms
    widths = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, cov.V_inv, X), 0.0))
    return X @ theta_hat + beta * widths


def select_arm(arms: ArmSet, theta_hat, beta: float, cov: CovarianceState) -> int:
    """Arm maximizing the optimistic index; lowest index on ties."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return int(np.argmax(ucb_indices(arms, theta_hat, beta, cov)))


def _ucb_round(state, params, t, arms, env, delta):
    theta_hat = estimate(state)
    beta = confidence_radius(t, state, params, delta)
    i = select_arm(arms, theta_hat, beta, state.cov)
    x = arms.arms[i]
    state.last_beta = beta
    state.last_theta_hat = theta_hat
    state.last_norm = float(np.sqrt(max(x @ state.cov.V_inv @ x, 0.0)))
    r = env.pull(x, t)
    rank_one_update(state.cov, x)
    state.s_vec = state.s_vec + r * x
    return i, r


def step_restart_ucb(state, params, t, arms, env, delta=None):
    """One round of RestartUCB; a new epoch starts whenever ``t = 1 (mod H)``."""
    H = params.H if params.H is not None else params.T
    if delta is None:
        delta = params.delta or default_delta(params.T, math.ceil(params.T / H))
    if (t - 1) % H == 0:
        restart(state, t)
    i, _ = _ucb_round(state, params, t, arms, env, delta)
    return i, state


def step_oracle_restart(state, params, t, arms, env, delta=None):
    """RestartUCB that restarts exactly at the listed change points."""
    if delta is None:
        delta = params.delta or default_delta(params.T, len(params.change_points) + 1)
    if t == 1 or t in params.change_points:
        restart(state, t)
    i, _ = _ucb_round(state, params, t, arms, env, delta)
    return i, state


def step_window_ucb(state, params, t, arms, env, delta=None):
    """One round of WindowUCB: the estimate uses the last ``w`` observations."""
    w = params.w if params.w is not None else params.T
    if delta is None:
        delta = params.delta or default_delta(params.T, math.ceil(params.T / w))
    if t == 1:
        restart(state, t)
    state.t0 = max(1, t - w)
    i, r = _ucb_round(state, params, t, arms, env, delta)
    state.buffer.append((arms.arms[i].copy(), r))
    if len(state.buffer) > w:
        x_old, r_old = state.buffer.popleft()
        try:
            rank_one_downdate(state.cov, x_old)
        except NumericalDegeneracyError:
            state.cov = rebuild_covariance(state.cov.dim, state.cov.lam, [x for x, _ in state.buffer])
        state.s_vec = state.s_vec - r_old * x_old
    return i, state


def optimal_restart_period(d: int, T: int, P_T: float) -> int:
    """``min(floor(d^{1/4} T^{1/2} P_T^{-1/2}), T)``, or ``T`` when ``P_T < sqrt(d)/T``."""
    if P_T < 0:
        raise ValueError("path length must be nonnegative")
    if P_T < math.sqrt(d) / T:
        return T
    H = math.floor(d**0.25 * math.sqrt(T) / math.sqrt(P_T))
    return max(1, min(H, T))


class Policy:
    """Stateful wrapper around one of the step functions."""

    name = "policy"
    _step = None
    windowed = False

    def __init__(self, d: int, params: PolicyParams):
        self.d = d
        self.params = params
        self.state = new_state(d, params.lam, self.windowed)
        self.delta = params.delta or self._default_delta()

    def _default_delta(self) -> float:
        return default_delta(self.params.T, 1)

    def step(self, t: int, env: Environment) -> int:
        i, self.state = type(self)._step(self.state, self.params, t, env.arms_at(t), env, self.delta)
        return i


class RestartUCB(Policy):
    name = "restart"
    _step = staticmethod(step_restart_ucb)

    def __init__(self, d, params):
        if params.H is None:
            raise ValueError("RestartUCB needs a restart period H")
        super().__init__(d, params)

    def _default_delta(self):
        return default_delta(self.params.T, math.ceil(self.params.T / self.params.H))

    def reset_schedule(self) -> np.ndarray:
        return (np.arange(self.params.T) % self.params.H) == 0


class StaticUCB(RestartUCB):
    name = "static"

    def __init__(self, d, params):
        params = PolicyParams(**{**params.__dict__, "H": params.T})
        super().__init__(d, params)


class OracleRestartUCB(Policy):
    name = "oracle"
    _step = staticmethod(step_oracle_restart)

    def _default_delta(self):
        return default_delta(self.params.T, len(self.params.change_points) + 1)

    def reset_schedule(self) -> np.ndarray:
        flags = np.zeros(self.params.T, dtype=bool)
        flags[0] = True
        flags[np.asarray(self.params.change_points, dtype=int) - 1] = True
        return flags


class WindowUCB(Policy):
    name = "window"
    _step = staticmethod(step_window_ucb)
    windowed = True

    def __init__(self, d, params):
        if params.w is None:
            raise ValueError("WindowUCB needs a window length w")
        super().__init__(d, params)

    def _default_delta(self):
        return default_delta(self.params.T, math.ceil(self.params.T / self.params.w))

    def reset_schedule(self) -> np.ndarray:
        flags = np.zeros(self.params.T, dtype=bool)
        flags[0] = True
        return flags


POLICIES = {cls.name: cls for cls in (RestartUCB, StaticUCB, OracleRestartUCB, WindowUCB)}
