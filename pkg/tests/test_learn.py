import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ortho_group

from specgl.errors import ZeroSignal
from specgl.graph import orthonormality_error
from specgl.learn import (LearnConfig, alternate, estimate_sparsity, learn_eigenbasis, pick_knee,
                          procrustes_update, pseudo_error, random_orthogonal, sparse_code,
                          topk_project)
from specgl.synth import SignalGenConfig, gen_signals


def best_support_residual(v, x, k):
    """Smallest ||x - V_S c||^2 over all supports S with |S| <= k (brute force)."""
    n = v.shape[1]
    best = np.inf
    for size in range(0, k + 1):
        for support in itertools.combinations(range(n), size):
            vs = v[:, list(support)]
            c, *_ = np.linalg.lstsq(vs, x, rcond=None) if size else (np.zeros(0),)
            best = min(best, float(np.sum((x - vs @ c) ** 2)))
    return best


def random_problem(rng, n, m, k, noise=0.1):
    v = ortho_group.rvs(n, random_state=rng)
    gt = gen_signals(v, SignalGenConfig(m=m, k_max=k, noise_level=noise,
                                        seed=int(rng.integers(2**63))))
    return v, gt.noisy_signals


# ---------------------------------------------------------------- top-k

def test_topk_examples():
    assert np.array_equal(topk_project(np.array([1.0, -5, 2]), 1), [0, -5, 0])
    assert np.array_equal(topk_project(np.array([3.0, -1, 0.5, 2]), 2), [3, 0, 0, 2])
    v = np.array([0.3, -0.1, 2.0])
    assert np.array_equal(topk_project(v, 3), v)


def test_topk_ties_prefer_lower_index():
    assert np.array_equal(topk_project(np.array([1.0, -1.0, 1.0]), 2), [1, -1, 0])
    assert np.array_equal(topk_project(np.array([2.0, 2.0, 2.0, 2.0]), 1), [2, 0, 0, 0])


@pytest.mark.parametrize("k", [0, 4])
def test_topk_rejects_bad_k(k):
    with pytest.raises(ValueError):
        topk_project(np.ones(3), k)


# ---------------------------------------------------------------- sparse coding

def test_sparse_code_examples():
    x = np.array([[1.0], [-5.0], [2.0]])
    assert np.array_equal(sparse_code(np.eye(3), x, 1), [[0], [-5], [0]])
    rng = np.random.default_rng(0)
    v = random_orthogonal(5, 1)
    x = rng.normal(size=(5, 7))
    y = sparse_code(v, x, 5)
    assert np.allclose(y, v.T @ x)
    assert np.linalg.norm(x - v @ y) <= 1e-12


def test_sparse_code_matches_exhaustive_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(40):
        k = int(rng.integers(1, 4))
        v = ortho_group.rvs(6, random_state=rng)
        x = rng.normal(size=(6, 4))
        y = sparse_code(v, x, k)
        assert np.all(np.count_nonzero(y, axis=0) <= k)
        for j in range(x.shape[1]):
            got = float(np.sum((x[:, j] - v @ y[:, j]) ** 2))
            assert abs(got - best_support_residual(v, x[:, j], k)) <= 1e-10


# ---------------------------------------------------------------- Procrustes

def test_procrustes_identity():
    assert np.allclose(procrustes_update(np.eye(4), np.eye(4)), np.eye(4), atol=1e-14)


def test_procrustes_recovers_rotation():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
    y = rng.normal(size=(8, 30))
    assert np.abs(procrustes_update(q @ y, y) - q).max() <= 1e-8


def test_procrustes_certificate_against_random_rotations():
    rng = np.random.default_rng(6)
    for _ in range(10):
        x, y = rng.normal(size=(5, 12)), rng.normal(size=(5, 12))
        v = procrustes_update(x, y)
        achieved = np.trace(y.T @ v.T @ x)
        nuclear = np.linalg.svd(x @ y.T, compute_uv=False).sum()
        assert abs(achieved - nuclear) <= 1e-8 * max(1.0, nuclear)
        others = ortho_group.rvs(5, size=1000, random_state=rng)
        traces = np.einsum("ij,kji->k", x @ y.T, others)  # tr(Q^T X Y^T)
        assert np.all(traces <= achieved + 1e-12)


@given(st.integers(1, 12), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_procrustes_output_is_orthonormal(n, m, seed):
    r = np.random.default_rng(seed)
    v = procrustes_update(r.normal(size=(n, m)), r.normal(size=(n, m)))
    assert orthonormality_error(v) <= 1e-8


def test_procrustes_shape_mismatch():
    with pytest.raises(ValueError):
        procrustes_update(np.ones((3, 4)), np.ones((3, 5)))


# ---------------------------------------------------------------- pseudo error

def test_pseudo_error_examples():
    rng = np.random.default_rng(1)
    v = random_orthogonal(4, 2)
    x = rng.normal(size=(4, 6))
    assert pseudo_error(x, v, v.T @ x) == pytest.approx(0.0, abs=1e-24)
    assert pseudo_error(x, v, np.zeros_like(x)) == 1.0


def test_pseudo_error_zero_signal():
    with pytest.raises(ZeroSignal):
        pseudo_error(np.zeros((3, 2)), np.eye(3), np.zeros((3, 2)))


def test_pseudo_error_nonincreasing_in_k_for_fixed_basis():
    rng = np.random.default_rng(8)
    v = random_orthogonal(10, 4)
    x = rng.normal(size=(10, 40))
    errs = [pseudo_error(x, v, sparse_code(v, x, k)) for k in range(1, 11)]
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))


# ---------------------------------------------------------------- random init

def test_random_orthogonal_is_seeded_and_orthonormal():
    a, b = random_orthogonal(7, 3), random_orthogonal(7, 3)
    assert np.array_equal(a, b)
    assert orthonormality_error(a) <= 1e-12
    assert not np.array_equal(a, random_orthogonal(7, 4))


# ---------------------------------------------------------------- alternating scheme

def test_objective_trace_monotone_on_many_instances():
    rng = np.random.default_rng(99)
    for _ in range(100):
        n = int(rng.integers(3, 13))
        k = int(rng.integers(1, min(n, 5) + 1))
        _, x = random_problem(rng, n, 40, k, noise=rng.choice([0.0, 0.05, 0.3]))
        res = alternate(x, random_orthogonal(n, int(rng.integers(2**32))), k, 1e-6, 200)
        steps = np.diff(res.objective_trace)
        assert np.all(steps <= 1e-9)
        assert orthonormality_error(res.basis) <= 1e-8


def test_noiseless_one_sparse_recovery():
    v = random_orthogonal(10, 21)
    gt = gen_signals(v, SignalGenConfig(m=300, k_max=1, seed=22))
    res = learn_eigenbasis(gt.noisy_signals, LearnConfig(k=1, seed=23))
    assert res.objective <= 1e-6 * np.linalg.norm(gt.noisy_signals)
    # recovered basis is a signed permutation of the truth
    overlap = np.abs(res.basis.T @ v)
    assert np.allclose(np.sort(overlap, axis=1)[:, -1], 1.0, atol=1e-6)
    assert np.allclose(overlap.sum(axis=0), 1.0, atol=1e-6)


def test_max_iters_one():
    rng = np.random.default_rng(3)
    _, x = random_problem(rng, 6, 30, 2)
    res = learn_eigenbasis(x, LearnConfig(k=2, max_iters=1, restarts=1))
    assert res.iterations == 1
    assert len(res.objective_trace) == 1


def test_returned_pair_is_consistent():
    rng = np.random.default_rng(4)
    _, x = random_problem(rng, 8, 50, 3, noise=0.2)
    res = learn_eigenbasis(x, LearnConfig(k=3, restarts=2))
    assert res.converged
    assert np.all(np.count_nonzero(res.coefficients, axis=0) <= 3)
    assert np.linalg.norm(x - res.basis @ res.coefficients) == pytest.approx(res.objective)


def test_signed_permutation_start_gives_same_objective():
    rng = np.random.default_rng(12)
    for _ in range(10):
        v, x = random_problem(rng, 8, 60, 3, noise=0.2)
        perm = np.eye(8)[rng.permutation(8)]
        signs = np.diag(rng.choice([-1.0, 1.0], size=8))
        a = alternate(x, v, 3)
        b = alternate(x, v @ perm @ signs, 3)
        assert abs(a.objective - b.objective) <= 1e-6


def test_restarts_keep_the_best_run():
    rng = np.random.default_rng(13)
    _, x = random_problem(rng, 10, 80, 4, noise=0.3)
    res = learn_eigenbasis(x, LearnConfig(k=4, restarts=4, seed=5))
    assert len(res.restart_objectives) == 4
    assert res.objective == min(res.restart_objectives)
    assert res.restart == int(np.argmin(res.restart_objectives))


def test_learn_is_deterministic():
    rng = np.random.default_rng(14)
    _, x = random_problem(rng, 8, 40, 3, noise=0.2)
    a = learn_eigenbasis(x, LearnConfig(k=3, seed=1))
    b = learn_eigenbasis(x, LearnConfig(k=3, seed=1))
    assert np.array_equal(a.basis, b.basis)


@pytest.mark.parametrize("cfg", [LearnConfig(k=None), LearnConfig(k=0), LearnConfig(k=9),
                                 LearnConfig(epsilon=0), LearnConfig(restarts=0)])
def test_learn_config_errors(cfg):
    with pytest.raises(ValueError):
        learn_eigenbasis(np.ones((8, 5)), cfg)


def test_learn_rejects_nonfinite():
    x = np.ones((4, 4))
    x[0, 0] = np.nan
    with pytest.raises(ValueError):
        learn_eigenbasis(x, LearnConfig(k=1))


# ---------------------------------------------------------------- sparsity estimate

def test_pick_knee_rule():
    assert pick_knee([1.0, 0.5, 0.2, 0.199, 0.1985]) == (3, False)
    assert pick_knee([1.0, 0.5, 0.25]) == (3, True)
    assert pick_knee([1.0, 1.0]) == (1, False)


def test_estimate_sparsity_on_exactly_three_sparse_data():
    v = random_orthogonal(10, 31)
    gt = gen_signals(v, SignalGenConfig(m=300, exact_sparsity=3, seed=32))
    est = estimate_sparsity(gt.noisy_signals, LearnConfig(k=None, seed=33))
    assert est.k == 3
    assert est.errors[2] <= 1e-6
    assert all(b <= a + 1e-12 for a, b in zip(est.errors, est.errors[1:]))
    assert est.result.k == 3


def test_estimate_sparsity_dense_spectra():
    rng = np.random.default_rng(40)
    x = rng.normal(size=(6, 200))
    est = estimate_sparsity(x, LearnConfig(k=None, restarts=2))
    # no sparse structure: either no knee or a large k
    assert est.no_knee or est.k >= 4
