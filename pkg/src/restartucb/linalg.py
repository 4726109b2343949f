"""Small dense linear algebra used by every estimator.

The regularized covariance ``V = lambda*I + sum x x^T`` is kept together with
its inverse. Rank-one changes update the inverse with the Sherman-Morrison
identity and a direct re-inversion runs every ``REFRESH_PERIOD`` operations to
stop floating-point drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REFRESH_PERIOD = 512
DOWNDATE_TOL = 1e-12


class NumericalDegeneracyError(ArithmeticError):
    """Raised when a numerical routine cannot produce a trustworthy result.

    ``best`` holds the best available estimate, if any.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass
class CovarianceState:
    """Regularized covariance ``V`` and its maintained inverse."""

    dim: int
    lam: float
    V: np.ndarray
    V_inv: np.ndarray
    count: int = 0

    def copy(self) -> "CovarianceState":
        return CovarianceState(self.dim, self.lam, self.V.copy(), self.V_inv.copy(), self.count)

    def refresh(self) -> "CovarianceState":
        """Recompute ``V_inv`` from ``V`` by a direct solve."""
        self.V = 0.5 * (self.V + self.V.T)
        self.V_inv = np.linalg.inv(self.V)
        self.V_inv = 0.5 * (self.V_inv + self.V_inv.T)
        self.count = 0
        return self

    def inverse_error(self) -> float:
        """Max-entry deviation of ``V @ V_inv`` from the identity."""
        return float(np.max(np.abs(self.V @ self.V_inv - np.eye(self.dim))))


def init_covariance(d: int, lam: float) -> CovarianceState:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if not lam > 0:
        raise ValueError(f"regularizer must be positive, got {lam!r}")
    d = int(d)
    lam = float(lam)
    return CovarianceState(d, lam, lam * np.eye(d), np.eye(d) / lam, 0)


def _as_vector(state: CovarianceState, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (state.dim,):
        raise ValueError(f"expected a vector of shape ({state.dim},), got {x.shape}")
    return x


def _tick(state: CovarianceState) -> None:
    state.count += 1
    if state.count >= REFRESH_PERIOD:
        state.refresh()


def rank_one_update(state: CovarianceState, x) -> CovarianceState:
    """Add ``x x^T`` to ``V`` in place and return the state."""
    x = _as_vector(state, x)
    u = state.V_inv @ x
    state.V += np.outer(x, x)
    state.V_inv -= np.outer(u, u) / (1.0 + x @ u)
    _tick(state)
    return state


def rank_one_downdate(state: CovarianceState, x) -> CovarianceState:
    """Remove ``x x^T`` from ``V`` in place and return the state.

    Raises:
        NumericalDegeneracyError: if ``1 - x^T V^{-1} x`` falls to
            ``DOWNDATE_TOL`` or below. The state is left untouched and the
            caller should rebuild it from its stored data.
    """
    x = _as_vector(state, x)
    u = state.V_inv @ x
    denom = 1.0 - x @ u
    if denom <= DOWNDATE_TOL:
        raise NumericalDegeneracyError(
            f"downdate would break positive-definiteness (denominator {denom:.3e})"
        )
    state.V -= np.outer(x, x)
    state.V_inv += np.outer(u, u) / denom
    _tick(state)
    return state


def rebuild_covariance(d: int, lam: float, xs) -> CovarianceState:
    """Build a fresh state from scratch out of the stored feature vectors."""
    state = init_covariance(d, lam)
    xs = np.asarray(xs, dtype=float).reshape(-1, state.dim)
    state.V += xs.T @ xs
    return state.refresh()


def mahalanobis_norm(state: CovarianceState, x) -> float:
    """``sqrt(x^T V^{-1} x)``."""
    x = _as_vector(state, x)
    return float(np.sqrt(max(x @ state.V_inv @ x, 0.0)))


def _top_eig_2x2(G: np.ndarray) -> float:
    a, b, c = G[0, 0], 0.5 * (G[0, 1] + G[1, 0]), G[1, 1]
    half_tr = 0.5 * (a + c)
    return half_tr + np.hypot(0.5 * (a - c), b)


def spectral_norm(M, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of ``M``.

    Uses the closed-form top eigenvalue of ``M^T M`` when ``M`` has two
    columns, and power iteration on ``M^T M`` otherwise.

    Raises:
        ValueError: if ``M`` is not a finite 2-D array.
        NumericalDegeneracyError: if power iteration does not reach the
            relative tolerance within ``max_iter`` steps.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    G = M.T @ M
    n = G.shape[0]
    if n == 1:
        return float(np.sqrt(G[0, 0]))
    if n == 2:
        return float(np.sqrt(max(_top_eig_2x2(G), 0.0)))

    v = np.random.default_rng(0).standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space; G is either zero or we were unlucky
            if not np.any(G):
                return 0.0
            v = np.ones(n) / np.sqrt(n)
            continue
        new = float(v @ w)
        v = w / nw
        if abs(new - est) <= tol * abs(new):
            return float(np.sqrt(max(new, 0.0)))
        est = new
    raise NumericalDegeneracyError(
        f"power iteration did not converge in {max_iter} iterations",
        best=float(np.sqrt(max(est, 0.0))),
    )
