import numpy as np
import pytest

from openset_ot import label_shift
from openset_ot.errors import EmptySurvivorSetError, InvalidParameterError
from openset_ot.metrics import REJECT
from openset_ot.ot_core import Dataset
from openset_ot.pipeline import PipelineConfig, open_set_adapt

CFG = PipelineConfig(eta=0.05, alpha=1.0, max_iter=2000)


def test_bookkeeping(small_task):
    res = open_set_adapt(small_task.source, small_task.target, CFG)
    n_t = small_task.target.n
    assert res.final_labels.shape == (n_t,)
    assert res.kept_indices.size + res.rejection.rejected.sum() == n_t
    assert np.array_equal(res.final_labels == REJECT, res.rejection.rejected)
    assert np.array_equal(res.final_labels[res.kept_indices], res.labelshift.predicted_labels)


def test_learned_marginal_is_renormalised_restriction(small_task):
    res = open_set_adapt(small_task.source, small_task.target, CFG, marginal_mode="learned")
    mu = res.survivor_marginal
    assert mu.sum() == pytest.approx(1.0, abs=1e-12)
    restricted = res.rejection.mu_t_star[res.kept_indices]
    assert np.allclose(mu, restricted / restricted.sum(), rtol=1e-12)


def test_uniform_marginal(small_task):
    res = open_set_adapt(small_task.source, small_task.target, CFG, marginal_mode="uniform")
    assert np.allclose(res.survivor_marginal, 1.0 / res.kept_indices.size)


def test_shared_only_target_matches_label_shift():
    rng = np.random.default_rng(4)
    means = np.array([[0.0, 0.0], [5.0, 0.0]])
    labels = np.repeat([1, 2], 40)
    src = Dataset(means[labels - 1] + 0.3 * rng.normal(size=(80, 2)), labels)
    tgt = Dataset(means[labels - 1] + 0.3 * rng.normal(size=(80, 2)))
    cfg = PipelineConfig(eta=0.5, alpha=0.1, max_iter=2000)
    res = open_set_adapt(src, tgt, cfg, marginal_mode="uniform")
    assert not np.any(res.final_labels == REJECT)
    alone = label_shift.fit(src, tgt, cfg=cfg.label_shift_config())
    assert np.array_equal(res.final_labels, alone.predicted_labels)
    assert np.array_equal(res.nu, alone.nu)


def test_empty_survivor_set():
    rng = np.random.default_rng(5)
    src = Dataset(rng.normal(size=(10, 2)), np.ones(10, dtype=int))
    tgt = Dataset(rng.normal(size=(10, 2)))
    with pytest.raises(EmptySurvivorSetError):
        open_set_adapt(src, tgt, PipelineConfig(eta=0.5, alpha=1e6))


def test_invalid_marginal_mode(small_task):
    with pytest.raises(InvalidParameterError):
        open_set_adapt(small_task.source, small_task.target, CFG, marginal_mode="bogus")


def test_deterministic(small_task):
    a = open_set_adapt(small_task.source, small_task.target, CFG)
    b = open_set_adapt(small_task.source, small_task.target, CFG)
    assert np.array_equal(a.final_labels, b.final_labels)
    assert np.array_equal(a.nu, b.nu)
    assert np.array_equal(a.labelshift.plan.coupling, b.labelshift.plan.coupling)


def test_separated_task_is_solved(small_task):
    res = open_set_adapt(small_task.source, small_task.target, CFG, marginal_mode="uniform")
    truth = np.where(small_task.unknown_mask, REJECT, small_task.target.labels)
    assert np.mean(res.final_labels == truth) >= 0.95
