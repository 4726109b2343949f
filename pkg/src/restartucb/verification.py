"""Numerical checks of the estimation-error analysis.

Every check returns plain numbers plus a pass flag so the CLI can tabulate
them. ``run_suite`` runs the full battery.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .linalg import spectral_norm

IMPOSSIBILITY_CONST = 0.0564


@dataclass
class ImpossibilityInstance:
    H: int
    p: int
    y: float
    z: float
    A: np.ndarray
    B: np.ndarray
    V: np.ndarray
    lam: float = 1.0

    def features(self) -> np.ndarray:
        """The ``H`` unit-norm feature vectors, first ``p`` equal, rest equal."""
        H, p = self.H, self.p
        first = np.array([1.0, math.sqrt(p - 1)]) / math.sqrt(p)
        rest = np.array([1.0, math.sqrt(H - p - 1)]) / math.sqrt(H - p)
        return np.vstack([np.tile(first, (p, 1)), np.tile(rest, (H - p, 1))])


def build_impossibility_instance(H: int, a: float = 1 / 3, lam: float = 1.0) -> ImpossibilityInstance:
    """Two-block feature stream where ``V^{-1} A`` has a large top singular value.

    ``p = floor(a H)`` (``floor(H/3)`` by default). With ``y = sqrt(p-1)`` and
    ``z = sqrt(H-p-1)`` the block sums are ``A = [[1, y], [y, y^2]]`` and
    ``B = [[1, z], [z, z^2]]``, and ``V = A + B + lam I``.
    """
    if H < 6:
        raise ValueError("need H >= 6")
    p = H // 3 if a == 1 / 3 else math.floor(a * H)
    if not 2 <= p <= H - 2:
        raise ValueError(f"checkpoint p={p} must lie in [2, H-2]")
    y, z = math.sqrt(p - 1), math.sqrt(H - p - 1)
    A = np.array([[1.0, y], [y, y * y]])
    B = np.array([[1.0, z], [z, z * z]])
    V = A + B + lam * np.eye(2)
    return ImpossibilityInstance(H, p, y, z, A, B, V, lam)


def sigma_max_check(H: int) -> tuple[float, float, bool]:
    inst = build_impossibility_instance(H)
    sigma = spectral_norm(np.linalg.solve(inst.V, inst.A))
    bound = IMPOSSIBILITY_CONST * math.sqrt(H)
    return sigma, bound, sigma >= bound


def old_claim_refutation(H: int) -> bool:
    """True when ``sigma_max(V^{-1} A) > 1``, i.e. the unit bound fails."""
    sigma, _, _ = sigma_max_check(H)
    return sigma > 1.0


def counterexample_check(etas=(0.0, 1.0, 2.0, -3.0)) -> bool:
    """Same characteristic polynomial as the identity, yet an indefinite quadratic form."""
    P = np.eye(2)
    Q = np.array([[1.0, -10.0], [0.0, 1.0]])
    z = np.array([1.0, 1.0])
    same_poly = all(
        math.isclose(np.linalg.det(e * np.eye(2) - P), (e - 1) ** 2, abs_tol=1e-12)
        and math.isclose(np.linalg.det(e * np.eye(2) - Q), (e - 1) ** 2, abs_tol=1e-12)
        for e in etas
    )
    return bool(same_poly and z @ Q @ z == -8.0)


def lemma2_property_check(X, thetas, lam: float, L: float, tol: float = 1e-9):
    """Path-length bound on the drift term of the estimation error.

    Args:
        X: ``(H, d)`` features ``X_{t0} .. X_{t-1}``.
        thetas: ``(H + 1, d)`` parameters ``theta_{t0} .. theta_t``.

    Returns:
        ``(lhs, rhs, pass)`` where ``lhs = ||V^{-1} sum X_s X_s^T (theta_s - theta_t)||``
        and ``rhs = L sqrt(d H / lam) * sum_p ||theta_p - theta_{p+1}||``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    H, d = X.shape
    if thetas.shape != (H + 1, d):
        raise ValueError(f"expected thetas of shape {(H + 1, d)}, got {thetas.shape}")
    V = lam * np.eye(d) + X.T @ X
    drift = thetas[:-1] - thetas[-1]
    v = X.T @ np.einsum("sd,sd->s", X, drift)
    lhs = float(np.linalg.norm(np.linalg.solve(V, v)))
    path = float(np.linalg.norm(np.diff(thetas, axis=0), axis=1).sum())
    rhs = L * math.sqrt(d * H / lam) * path
    return lhs, rhs, lhs <= rhs + tol


def trace_bound_check(X, lam: float, tol: float = 1e-9):
    """Largest prefix sum of ``||X_s||^2_{V^{-1}}`` against the dimension ``d``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = X.shape[1]
    V = lam * np.eye(d) + X.T @ X
    q = np.einsum("sd,sd->s", X, np.linalg.solve(V, X.T).T)
    worst = float(np.cumsum(q).max()) if len(q) else 0.0
    return worst, float(d), worst <= d + tol


def elliptical_potential_check(X, lam: float, L: float, tol: float = 1e-9):
    """``sum_t ||X_t||_{U_{t-1}^{-1}}`` against ``sqrt(2 d T log(1 + L^2 T / (lam d)))``.

    The bound relies on ``||X_t||^2_{U_{t-1}^{-1}} <= 1``, which holds when
    ``L^2 <= lam``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T, d = X.shape
    U_inv = np.eye(d) / lam
    lhs = 0.0
    for x in X:
        u = U_inv @ x
        q = x @ u
        lhs += math.sqrt(max(q, 0.0))
        U_inv -= np.outer(u, u) / (1.0 + q)
    return lhs, potential_bound(d, T, lam, L), lhs <= potential_bound(d, T, lam, L) + tol


def potential_bound(d: int, T: int, lam: float, L: float) -> float:
    return math.sqrt(2 * d * T * math.log(1 + L**2 * T / (lam * d)))


def epoch_potential_violations(xnorm, epoch_start, d: int, lam: float, L: float, tol: float = 1e-9) -> int:
    """Count epochs of a simulated run whose potential sum breaks the bound."""
    starts = np.flatnonzero(epoch_start)
    ends = np.append(starts[1:], len(xnorm))
    bad = 0
    for a, b in zip(starts, ends):
        if xnorm[a:b].sum() > potential_bound(d, b - a, lam, L) + tol:
            bad += 1
    return bad


def self_normalized_coverage_check(
    d: int,
    T: int,
    R: float,
    lam: float,
    seeds,
    delta: float = 0.05,
    feature_seed: int = 0,
    noise_std: float | None = None,
) -> float:
    """Fraction of noise streams whose self-normalized sum ever leaves the ellipsoid.

    One fixed unit-ball feature stream is shared by all streams; each seed
    draws Gaussian noise with std ``noise_std`` (default ``R``).
    """
    seeds = list(seeds)
    std = R if noise_std is None else noise_std
    X = np.random.default_rng(feature_seed).standard_normal((T, d))
    X /= np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True))
    if std == 0 or not seeds:
        return 0.0
    eta = np.stack([np.random.default_rng(s).normal(0.0, std, T) for s in seeds])
    S = np.cumsum(eta[:, :, None] * X[None, :, :], axis=1)  # (seeds, T, d)
    Vbar = lam * np.eye(d) + np.cumsum(X[:, :, None] * X[:, None, :], axis=0)
    Vinv = np.linalg.inv(Vbar)
    _, logdet = np.linalg.slogdet(Vbar)
    lhs = np.einsum("ntd,tde,nte->nt", S, Vinv, S)
    rhs = 2 * R**2 * (0.5 * logdet - 0.5 * d * math.log(lam) - math.log(delta))
    return float(np.mean(np.any(lhs > rhs[None, :], axis=1)))


@dataclass
class CheckRow:
    name: str
    computed: float
    bound: float
    passed: bool
    seconds: float = 0.0


def random_drift_instances(n: int, rng: np.random.Generator, max_d: int = 5, max_H: int = 50):
    """Random trajectories with unit-norm features and parameters."""
    for _ in range(n):
        d = int(rng.integers(1, max_d + 1))
        H = int(rng.integers(1, max_H + 1))
        lam = float(rng.choice([0.1, 1.0, 10.0]))
        X = rng.standard_normal((H, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        th = rng.standard_normal((H + 1, d))
        th /= np.linalg.norm(th, axis=1, keepdims=True)
        yield X, th, lam


def random_potential_streams(n: int, rng: np.random.Generator, max_d: int = 5, max_T: int = 2000):
    for _ in range(n):
        d = int(rng.integers(1, max_d + 1))
        T = int(rng.integers(1, max_T + 1))
        L = float(rng.uniform(0.1, 1.0))
        lam = float(rng.uniform(L**2, 4.0))
        X = rng.standard_normal((T, d))
        X *= L / np.maximum(L, np.linalg.norm(X, axis=1, keepdims=True))
        yield X, lam, L


def run_suite(seed: int = 0, drift_trials: int = 10_000, potential_trials: int = 1_000,
              coverage_seeds: int = 2_000) -> list[CheckRow]:
    rows = []

    def timed(fn):
        t = time.perf_counter()
        out = fn()
        return out, time.perf_counter() - t

    for H in (3000, 30000):
        (s, b, ok), dt = timed(lambda: sigma_max_check(H))
        rows.append(CheckRow(f"sigma_max_H{H}", s, b, ok, dt))

    ok, dt = timed(counterexample_check)
    rows.append(CheckRow("counterexample_zQz", -8.0, 0.0, ok, dt))

    def drift():
        rng = np.random.default_rng(seed)
        worst, bad_l2, bad_tr = 0.0, 0, 0
        for X, th, lam in random_drift_instances(drift_trials, rng):
            lhs, rhs, ok = lemma2_property_check(X, th, lam, 1.0)
            bad_l2 += not ok
            bad_tr += not trace_bound_check(X, lam)[2]
            if rhs > 0:
                worst = max(worst, lhs / rhs)
        return worst, bad_l2, bad_tr

    (worst, bad_l2, bad_tr), dt = timed(drift)
    rows.append(CheckRow("drift_bound_violations", bad_l2, 0, bad_l2 == 0, dt))
    rows.append(CheckRow("drift_bound_worst_ratio", worst, 1.0, worst <= 1.0, dt))
    rows.append(CheckRow("trace_bound_violations", bad_tr, 0, bad_tr == 0, dt))

    ok, dt = timed(lambda: old_claim_refutation(3000))
    rows.append(CheckRow("old_claim_refuted_H3000", sigma_max_check(3000)[0], 1.0, ok, dt))
    for H in (3000, 7500):
        ratio = sigma_max_check(4 * H)[0] / sigma_max_check(H)[0]
        rows.append(CheckRow(f"sqrtH_growth_ratio_H{H}", ratio, 2.0, 1.8 <= ratio <= 2.2))

    def potential():
        rng = np.random.default_rng(seed + 1)
        return sum(not elliptical_potential_check(X, lam, L)[2]
                   for X, lam, L in random_potential_streams(potential_trials, rng))

    bad, dt = timed(potential)
    rows.append(CheckRow("elliptical_potential_violations", bad, 0, bad == 0, dt))

    rate, dt = timed(lambda: self_normalized_coverage_check(2, 500, 1.0, 1.0, range(seed, seed + coverage_seeds), 0.05))
    rows.append(CheckRow("self_normalized_rate", rate, 0.07, rate <= 0.07, dt))
    return rows
