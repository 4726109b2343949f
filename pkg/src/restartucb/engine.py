"""Run a policy against an environment and record per-round diagnostics.

Two engines produce the same trajectory:

``reference``
    steps the Python policy objects round by round;
``fast``
    a compiled loop over the same arithmetic, used for the long
    experiments. It takes the policy's restart schedule (or window length)
    as data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .linalg import DOWNDATE_TOL, REFRESH_PERIOD
from .policies import Policy, WindowUCB


@dataclass
class RunRecord:
    chosen: np.ndarray  # arm index per round
    regret: np.ndarray  # instantaneous pseudo-regret
    reward: np.ndarray  # observed reward
    xnorm: np.ndarray  # ||X_t||_{V_{t-1}^{-1}} of the chosen arm
    beta: np.ndarray  # confidence radius used at round t
    err: np.ndarray  # |X_t^T (theta_t - theta_hat_t)|
    epoch_start: np.ndarray  # True where the estimator was reset

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(self.regret)


@numba.njit(cache=True)
def _inv_sym(V):
    Vi = np.linalg.inv(0.5 * (V + V.T))
    return 0.5 * (Vi + Vi.T)


@numba.njit(cache=True)
def _simulate(arm_seq, thetas, eta, reset, window, lam, S, R, L, log_inv_delta, refresh, tol):
    T, d = thetas.shape
    n_sets, n, _ = arm_seq.shape
    chosen = np.empty(T, np.int64)
    regret = np.empty(T)
    reward = np.empty(T)
    xnorm = np.empty(T)
    betas = np.empty(T)
    err = np.empty(T)

    V = lam * np.eye(d)
    Vi = np.eye(d) / lam
    s = np.zeros(d)
    th_hat = np.zeros(d)
    u = np.zeros(d)
    count = 0
    t0 = 1
    wlen = window if window > 0 else 1
    bufx = np.zeros((wlen, d))
    bufr = np.zeros(wlen)
    head = 0
    size = 0

    for k in range(T):
        t = k + 1
        if reset[k]:
            V[:, :] = lam * np.eye(d)
            Vi[:, :] = np.eye(d) / lam
            s[:] = 0.0
            count = 0
            t0 = t
        if window > 0:
            t0 = max(1, t - window)
        X = arm_seq[k if n_sets > 1 else 0]
        th = thetas[k]

        for a in range(d):
            acc = 0.0
            for b in range(d):
                acc += Vi[a, b] * s[b]
            th_hat[a] = acc
        inner = 2.0 * log_inv_delta + d * math.log(1.0 + (t - t0) * L**2 / (lam * d))
        beta = math.sqrt(lam) * S + R * math.sqrt(inner)

        best_i = 0
        best_v = -np.inf
        best_mean = -np.inf
        for i in range(n):
            q = 0.0
            for a in range(d):
                acc = 0.0
                for b in range(d):
                    acc += Vi[a, b] * X[i, b]
                q += X[i, a] * acc
            mean = 0.0
            for a in range(d):
                mean += X[i, a] * th_hat[a]
            v = mean + beta * math.sqrt(max(q, 0.0))
            if v > best_v:
                best_v = v
                best_i = i
            true_mean = 0.0
            for a in range(d):
                true_mean += X[i, a] * th[a]
            if true_mean > best_mean:
                best_mean = true_mean

        x = X[best_i]
        q = 0.0
        for a in range(d):
            acc = 0.0
            for b in range(d):
                acc += Vi[a, b] * x[b]
            u[a] = acc
            q += x[a] * acc
        mu = 0.0
        e = 0.0
        for a in range(d):
            mu += x[a] * th[a]
            e += x[a] * (th[a] - th_hat[a])
        r = mu + eta[k]

        chosen[k] = best_i
        regret[k] = best_mean - mu
        reward[k] = r
        xnorm[k] = math.sqrt(max(q, 0.0))
        betas[k] = beta
        err[k] = abs(e)

        # Sherman-Morrison update
        denom = 1.0 + q
        for a in range(d):
            s[a] += r * x[a]
            for b in range(d):
                V[a, b] += x[a] * x[b]
                Vi[a, b] -= u[a] * u[b] / denom
        count += 1
        if count >= refresh:
            Vi[:, :] = _inv_sym(V)
            V[:, :] = 0.5 * (V + V.T)
            count = 0

        if window > 0:
            if size < window:
                bufx[(head + size) % window] = x
                bufr[(head + size) % window] = r
                size += 1
            else:
                xo = bufx[head].copy()
                ro = bufr[head]
                bufx[head] = x
                bufr[head] = r
                head = (head + 1) % window
                q = 0.0
                for a in range(d):
                    acc = 0.0
                    for b in range(d):
                        acc += Vi[a, b] * xo[b]
                    u[a] = acc
                    q += xo[a] * acc
                denom = 1.0 - q
                for a in range(d):
                    s[a] -= ro * xo[a]
                if denom <= tol:
                    V[:, :] = lam * np.eye(d)
                    for j in range(window):
                        for a in range(d):
                            for b in range(d):
                                V[a, b] += bufx[j, a] * bufx[j, b]
                    Vi[:, :] = _inv_sym(V)
                    count = 0
                else:
                    for a in range(d):
                        for b in range(d):
                            V[a, b] -= xo[a] * xo[b]
                            Vi[a, b] += u[a] * u[b] / denom
                    count += 1
                    if count >= refresh:
                        Vi[:, :] = _inv_sym(V)
                        V[:, :] = 0.5 * (V + V.T)
                        count = 0

    return chosen, regret, reward, xnorm, betas, err


def simulate_fast(policy: Policy, env) -> RunRecord:
    p = policy.params
    reset = policy.reset_schedule()
    window = p.w if isinstance(policy, WindowUCB) else 0
    out = _simulate(
        np.ascontiguousarray(env.arm_seq, dtype=float),
        np.ascontiguousarray(env.thetas, dtype=float),
        np.ascontiguousarray(env.eta, dtype=float),
        reset,
        int(window),
        float(p.lam),
        float(p.S),
        float(p.R),
        float(p.L),
        math.log(1.0 / policy.delta),
        REFRESH_PERIOD,
        DOWNDATE_TOL,
    )
    return RunRecord(*out, epoch_start=reset)


def simulate_reference(policy: Policy, env) -> RunRecord:
    T = env.T
    rec = RunRecord(
        chosen=np.empty(T, dtype=np.int64),
        regret=np.empty(T),
        reward=np.empty(T),
        xnorm=np.empty(T),
        beta=np.empty(T),
        err=np.empty(T),
        epoch_start=np.zeros(T, dtype=bool),
    )
    for t in range(1, T + 1):
        epoch = policy.state.epoch
        i = policy.step(t, env)
        arms = env.arms_at(t).arms
        theta = env.theta_at(t)
        x = arms[i]
        st = policy.state
        rec.chosen[t - 1] = i
        rec.regret[t - 1] = np.max(arms @ theta) - x @ theta
        rec.reward[t - 1] = env.pull(x, t)
        rec.xnorm[t - 1] = st.last_norm
        rec.beta[t - 1] = st.last_beta
        rec.err[t - 1] = abs(x @ (theta - st.last_theta_hat))
        rec.epoch_start[t - 1] = st.epoch != epoch
    return rec


def simulate(policy: Policy, env, engine: str = "fast") -> RunRecord:
    if engine == "fast":
        return simulate_fast(policy, env)
    if engine == "reference":
        return simulate_reference(policy, env)
    raise ValueError(f"unknown engine {engine!r}")
