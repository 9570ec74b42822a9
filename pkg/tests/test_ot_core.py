import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import logsumexp

from oracles import brute_force_entropic_plan
from openset_ot.errors import InvalidInputError, InvalidParameterError, NumericalFailureError
from openset_ot.ot_core import (
    Dataset,
    DualPotentials,
    LogKernel,
    check_finite,
    cost_matrix,
    entropy,
    gibbs_kernel,
    marginal_error,
    scaled_coupling,
    sinkhorn,
)


def simplex(n):
    return st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n).map(lambda v: np.array(v) / sum(v))


def test_dataset_validation():
    with pytest.raises(InvalidInputError):
        Dataset(np.zeros((0, 2)))
    with pytest.raises(InvalidInputError):
        Dataset([[0.0, np.nan]])
    with pytest.raises(InvalidInputError):
        Dataset([[0.0], [1.0]], labels=[1, 0])
    with pytest.raises(InvalidInputError):
        Dataset([[0.0], [1.0]], labels=[1.5, 2])
    d = Dataset([[0.0, 1.0], [2.0, 3.0]], labels=[2, 1])
    assert (d.n, d.dim) == (2, 2)
    assert d.subset([1]).labels.tolist() == [1]


def test_cost_matrix_examples():
    assert cost_matrix([[0.0, 0.0]], [[0.0, 0.0]]).tolist() == [[0.0]]
    assert cost_matrix([[0.0, 0.0]], [[3.0, 4.0]]).tolist() == [[5.0]]
    pts = np.random.default_rng(0).normal(size=(5, 3))
    c = cost_matrix(pts, pts)
    assert np.all(np.diag(c) == 0)
    assert np.array_equal(c, c.T)


def test_cost_matrix_dimension_mismatch_names_both():
    with pytest.raises(InvalidInputError, match="d=2.*d=3"):
        cost_matrix(np.zeros((2, 2)), np.zeros((2, 3)))


def test_cost_matrix_normalize():
    c = cost_matrix([[0.0, 0.0]], [[3.0, 4.0], [0.0, 1.0]], normalize=True)
    assert c.tolist() == [[1.0, 0.2]]
    assert cost_matrix([[1.0]], [[1.0]], normalize=True).tolist() == [[0.0]]


def test_gibbs_kernel_examples():
    assert gibbs_kernel([[0.0]], 0.3)[0, 0] == 1.0
    assert gibbs_kernel([[0.25]], 0.25)[0, 0] == pytest.approx(0.3678794, abs=1e-7)
    tiny = gibbs_kernel([[100.0]], 1.0)[0, 0]
    assert 0.0 <= tiny < 1e-40
    for bad in (0.0, -1.0, np.inf):
        with pytest.raises(InvalidParameterError):
            gibbs_kernel([[1.0]], bad)


def test_scaled_coupling_examples():
    K = np.random.default_rng(1).uniform(0.1, 1, (3, 4))
    assert np.allclose(scaled_coupling(DualPotentials(np.zeros(3), np.zeros(4)), K), K, rtol=1e-15)
    out = scaled_coupling(DualPotentials(np.array([np.log(2)]), np.array([np.log(3)])), [[1.0]])
    assert out[0, 0] == pytest.approx(6.0, rel=1e-15)
    with pytest.raises(InvalidInputError):
        scaled_coupling(DualPotentials(np.zeros(2), np.zeros(4)), K)


@given(st.floats(-50, 50))
def test_scaled_coupling_gauge_invariance(c):
    rng = np.random.default_rng(3)
    K = rng.uniform(0.01, 1, (3, 2))
    f, g = rng.normal(size=3), rng.normal(size=2)
    base = scaled_coupling(DualPotentials(f, g), K)
    shifted = scaled_coupling(DualPotentials(f + c, g - c), K)
    assert np.allclose(shifted, base, rtol=1e-12, atol=0)


def test_entropy_examples():
    assert entropy(np.full((2, 2), 0.25)) == pytest.approx(np.log(4))
    assert entropy([[1.0, 0.0], [0.0, 0.0]]) == 0.0
    assert entropy([[0.5, 0.5]]) == pytest.approx(0.6931472, abs=1e-7)
    with pytest.raises(InvalidInputError):
        entropy([[1.1, -0.1]])


def test_uniform_coupling_maximises_entropy():
    rng = np.random.default_rng(4)
    h_uniform = entropy(np.full((3, 4), 1 / 12))
    for _ in range(10):
        p = rng.random((3, 4))
        assert entropy(p / p.sum()) <= h_uniform + 1e-12


def test_marginal_error_examples():
    assert marginal_error(np.full((2, 2), 0.25), [0.5, 0.5], [0.5, 0.5]) == 0.0
    assert marginal_error(np.zeros((2, 3)), [0.5, 0.5], [0.2, 0.3, 0.5]) == pytest.approx(2.0)
    assert marginal_error([[1.0]], [1.0], [0.5]) == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        marginal_error(np.zeros((2, 2)), [1.0], [0.5, 0.5])


def test_sinkhorn_single_point():
    plan = sinkhorn([1.0], [1.0], [[7.0]], 0.1)
    assert plan.coupling.tolist() == [[1.0]]
    assert plan.converged


def test_sinkhorn_two_by_two_closed_form():
    a = np.e / (2 * (1 + np.e))
    b = 1 / (2 * (1 + np.e))
    plan = sinkhorn([0.5, 0.5], [0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]], 1.0, tol=1e-12)
    assert np.allclose(plan.coupling, [[a, b], [b, a]], atol=1e-12)
    assert a == pytest.approx(0.3655293, abs=1e-7)


def test_sinkhorn_random_tight_tolerance():
    rng = np.random.default_rng(5)
    mu_s, mu_t = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(5))
    plan = sinkhorn(mu_s, mu_t, rng.random((6, 5)), 0.5, tol=1e-9)
    assert plan.converged
    assert plan.marginal_error <= 1e-9
    assert marginal_error(plan.coupling, mu_s, mu_t) <= 1e-9


def test_sinkhorn_rejects_unnormalised_marginals():
    with pytest.raises(InvalidInputError):
        sinkhorn([0.5, 0.6], [1.0], [[0.0], [1.0]], 1.0)
    with pytest.raises(InvalidInputError):
        sinkhorn([1.0], [1.2], [[0.0]], 1.0)
    with pytest.raises(InvalidParameterError):
        sinkhorn([1.0], [1.0], [[0.0]], 1.0, tol=0)


def test_sinkhorn_flags_nonconvergence():
    rng = np.random.default_rng(6)
    plan = sinkhorn(np.full(20, 0.05), np.full(20, 0.05), rng.random((20, 20)), 0.001, max_iter=2)
    assert not plan.converged
    assert plan.iterations == 2


def test_large_eta_gives_independent_coupling():
    rng = np.random.default_rng(7)
    cost = rng.random((4, 5))
    mu_s, mu_t = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(5))
    plan = sinkhorn(mu_s, mu_t, cost, 1e3 * cost.max())
    assert np.abs(plan.coupling - np.outer(mu_s, mu_t)).max() <= 1e-3


def test_plan_equals_scaled_coupling_of_its_potentials():
    rng = np.random.default_rng(8)
    cost = rng.random((4, 3))
    plan = sinkhorn(np.full(4, 0.25), np.full(3, 1 / 3), cost, 0.2)
    rebuilt = scaled_coupling(plan.potentials, gibbs_kernel(cost, 0.2))
    assert np.allclose(plan.coupling, rebuilt, rtol=1e-12, atol=0)


@given(st.integers(1, 3), st.integers(1, 3), st.sampled_from([0.1, 1.0]), st.integers(0, 10_000))
def test_sinkhorn_matches_brute_force_oracle(n_s, n_t, eta, seed):
    rng = np.random.default_rng(seed)
    mu_s, mu_t = rng.dirichlet(np.ones(n_s)), rng.dirichlet(np.ones(n_t))
    cost = rng.uniform(0, 2, (n_s, n_t))
    plan = sinkhorn(mu_s, mu_t, cost, eta, tol=1e-10)
    assert np.abs(plan.coupling - brute_force_entropic_plan(mu_s, mu_t, cost, eta)).max() <= 1e-4


@given(simplex(4), simplex(3), st.floats(0.05, 5.0))
def test_converged_sinkhorn_is_feasible(mu_s, mu_t, eta):
    cost = np.arange(12.0).reshape(4, 3) % 5
    plan = sinkhorn(mu_s, mu_t, cost, eta, tol=1e-8)
    if plan.converged:
        assert np.abs(plan.coupling.sum(axis=1) - mu_s).sum() <= 1e-8
        assert np.abs(plan.coupling.sum(axis=0) - mu_t).sum() <= 1e-8
    assert np.all(plan.coupling >= 0)


@pytest.mark.parametrize("eta", [1.0, 1e-3])
def test_log_kernel_reductions_match_exact(eta):
    rng = np.random.default_rng(9)
    cost = cost_matrix(rng.normal(size=(40, 2)), rng.normal(size=(30, 2)) * 3)
    kernel = LogKernel.from_cost(cost, eta)
    log_k = -cost / eta
    for shift in (0.0, 45.0, -80.0):
        f, g = rng.normal(size=40) + shift, rng.normal(size=30) - shift
        assert np.allclose(kernel.row_lse(g, f), logsumexp(log_k + g, axis=1), rtol=1e-12, atol=1e-9)
        assert np.allclose(kernel.col_lse(f, g), logsumexp(log_k + f[:, None], axis=0), rtol=1e-12, atol=1e-9)


def test_log_kernel_far_rows_stay_finite():
    # the far target column underflows exp(-cost / eta) entirely
    cost = cost_matrix([[0.0], [0.1]], [[0.0], [1000.0]])
    kernel = LogKernel.from_cost(cost, 0.01)
    out = kernel.col_lse(np.zeros(2), np.zeros(2))
    assert np.all(np.isfinite(out))
    assert out[1] == pytest.approx(logsumexp(-cost[:, 1] / 0.01))


def test_check_finite_reports_iteration():
    with pytest.raises(NumericalFailureError, match="iteration 12") as info:
        check_finite(12, np.array([0.0, np.nan]))
    assert info.value.iteration == 12
