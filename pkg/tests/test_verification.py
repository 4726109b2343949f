import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restartucb.verification import (
    IMPOSSIBILITY_CONST,
    build_impossibility_instance,
    counterexample_check,
    elliptical_potential_check,
    epoch_potential_violations,
    lemma2_property_check,
    old_claim_refutation,
    potential_bound,
    random_potential_streams,
    run_suite,
    self_normalized_coverage_check,
    sigma_max_check,
    trace_bound_check,
)


def test_instance_structure():
    inst = build_impossibility_instance(3000)
    assert (inst.p, inst.y, inst.z) == (1000, math.sqrt(999), math.sqrt(1999))
    X = inst.features()
    np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0)
    np.testing.assert_allclose(X[:1000].T @ X[:1000], inst.A, atol=1e-9)
    np.testing.assert_allclose(X[1000:].T @ X[1000:], inst.B, atol=1e-9)
    assert abs(np.linalg.det(inst.A)) < 1e-9
    assert np.all(np.linalg.eigvalsh(inst.V) > 0)


def test_instance_rejects_small_H():
    with pytest.raises(ValueError):
        build_impossibility_instance(5)


@pytest.mark.parametrize("H, sigma", [(3000, 5.852), (30000, 18.474)])
def test_sigma_golden_numbers(H, sigma):
    s, bound, ok = sigma_max_check(H)
    assert abs(s - sigma) <= 0.01
    assert ok and bound == pytest.approx(IMPOSSIBILITY_CONST * math.sqrt(H))


def test_sigma_bound_large_H():
    s, bound, ok = sigma_max_check(300_000)
    assert ok and bound == pytest.approx(30.89, abs=0.01)


@settings(max_examples=60, deadline=None)
@given(st.integers(6, 200_000))
def test_sigma_bound_holds_for_all_H(H):
    assert sigma_max_check(H)[2]


def test_old_claim():
    assert old_claim_refutation(3000)
    s12 = sigma_max_check(12)[0]
    assert old_claim_refutation(12) == (s12 > 1)
    for H in (3000, 7500):
        assert 1.8 <= sigma_max_check(4 * H)[0] / sigma_max_check(H)[0] <= 2.2


def test_counterexample():
    assert counterexample_check()
    z = np.array([1.0, 1.0])
    assert z @ np.eye(2) @ z == 2.0
    Q = np.array([[1.0, -10.0], [0.0, 1.0]])
    assert np.linalg.det(np.eye(2) - Q) == 0.0


def test_drift_bound_constant_parameters():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((10, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    lhs, rhs, ok = lemma2_property_check(X, np.tile([0.0, 1.0, 0.0], (11, 1)), 1.0, 1.0)
    assert lhs == 0.0 and rhs == 0.0 and ok


def test_drift_bound_on_impossibility_features():
    inst = build_impossibility_instance(300)
    X = inst.features()
    thetas = np.array([[1.0, 0.0]] * inst.p + [[0.0, 1.0]] * (inst.H - inst.p + 1))
    lhs, rhs, ok = lemma2_property_check(X, thetas, 1.0, 1.0)
    assert ok and lhs > 0


def test_drift_bound_shape_check():
    with pytest.raises(ValueError):
        lemma2_property_check(np.ones((4, 2)), np.ones((4, 2)), 1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5), st.integers(1, 50), st.sampled_from([0.1, 1.0, 10.0]), st.integers(0, 2**32 - 1))
def test_drift_and_trace_bounds_random(d, H, lam, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((H, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    th = rng.standard_normal((H + 1, d))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    assert lemma2_property_check(X, th, lam, 1.0)[2]
    assert trace_bound_check(X, lam)[2]


def test_potential_examples():
    lhs, rhs, ok = elliptical_potential_check([[1.0]], 1.0, 1.0)
    assert lhs == 1.0 and rhs == pytest.approx(math.sqrt(2 * math.log(2))) and ok
    assert elliptical_potential_check(np.zeros((20, 3)), 1.0, 1.0)[0] == 0.0


def test_potential_random_streams():
    rng = np.random.default_rng(3)
    assert all(elliptical_potential_check(X, lam, L)[2] for X, lam, L in random_potential_streams(50, rng))


def test_epoch_potential_counts_each_epoch():
    xnorm = np.ones(6)
    starts = np.array([1, 0, 0, 1, 0, 0], dtype=bool)
    assert epoch_potential_violations(xnorm, starts, 1, 1.0, 1.0) == int(3 > potential_bound(1, 3, 1.0, 1.0)) * 2


def test_coverage_noiseless_is_zero():
    assert self_normalized_coverage_check(2, 100, 0.0, 1.0, range(10)) == 0.0


def test_coverage_rate_and_monotone_in_delta():
    # a larger delta lowers the threshold, so the violation events only grow
    seeds = range(2000)
    a = self_normalized_coverage_check(2, 500, 1.0, 1.0, seeds, delta=0.05)
    b = self_normalized_coverage_check(2, 500, 1.0, 1.0, seeds, delta=0.2)
    assert a <= 0.07
    assert b >= a


def test_suite_passes():
    rows = run_suite(seed=0, drift_trials=500, potential_trials=50, coverage_seeds=500)
    assert len(rows) == 11
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]
