import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from openset_ot import datagen
from openset_ot.errors import InvalidParameterError


def test_circle_means_layout():
    m = datagen.circle_means(3, 3.0)
    assert np.allclose(m[0], [0.0, 3.0])
    angles = np.degrees(np.arctan2(m[:, 1], m[:, 0])) % 360
    assert np.allclose(angles, [90, 210, 330])
    assert np.allclose(np.linalg.norm(m, axis=1), 3.0)


def test_counts_exact_rounding():
    assert datagen.class_counts(1000, [0.25, 0.75]).tolist() == [250, 750]
    assert datagen.class_counts(10, [1 / 3] * 3).tolist() == [4, 3, 3]


@given(st.integers(3, 500), st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5))
def test_counts_sum_to_n_and_match_labels(n, weights):
    props = np.array(weights) / sum(weights)
    spec = datagen.MixtureSpec(datagen.circle_means(len(props)), 0.5, props, max(n, len(props)), seed=1)
    counts = datagen.class_counts(spec.n, props)
    assert counts.sum() == spec.n
    assert np.all(np.abs(counts - spec.n * props) < 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", datagen.MixtureWarning)
        data = datagen.sample_mixture(spec)
    assert np.bincount(data.labels, minlength=len(props) + 1)[1:].tolist() == counts.tolist()


def test_tiny_noise_concentrates():
    spec = datagen.MixtureSpec([[0.0, 0.0]], 1e-6, [1.0], 5, seed=3)
    data = datagen.sample_mixture(spec)
    assert np.all(np.linalg.norm(data.points, axis=1) <= 6e-6)


def test_same_seed_is_bitwise_identical():
    spec = datagen.MixtureSpec(datagen.circle_means(3), 0.5, [0.2, 0.3, 0.5], 300, seed=42)
    a, b = datagen.sample_mixture(spec), datagen.sample_mixture(spec)
    assert a.points.tobytes() == b.points.tobytes()
    assert np.array_equal(a.labels, b.labels)
    other = datagen.sample_mixture(datagen.MixtureSpec(spec.means, 0.5, spec.proportions, 300, seed=43))
    assert not np.array_equal(a.points, other.points)


def test_class_stream_independent_of_other_counts():
    means = datagen.circle_means(2)
    a = datagen.sample_mixture(datagen.MixtureSpec(means, 0.5, [0.5, 0.5], 100, seed=9))
    b = datagen.sample_mixture(datagen.MixtureSpec(means, 0.5, [0.25, 0.75], 200, seed=9))
    assert np.array_equal(a.points[a.labels == 1], b.points[b.labels == 1])


def test_empirical_means_converge():
    means = datagen.circle_means(3)
    data = datagen.sample_mixture(datagen.MixtureSpec(means, 0.5, [1 / 3] * 3, 30000, seed=0))
    for c in range(3):
        pts = data.points[data.labels == c + 1]
        assert np.all(np.abs(pts.mean(axis=0) - means[c]) <= 5 * 0.5 / np.sqrt(pts.shape[0]))


def test_zero_count_warns():
    spec = datagen.MixtureSpec(datagen.circle_means(3), 0.5, [0.98, 0.01, 0.01], 10, seed=0)
    with pytest.warns(datagen.MixtureWarning):
        data = datagen.sample_mixture(spec)
    assert data.n == 10


def test_spec_validation():
    means = datagen.circle_means(2)
    with pytest.raises(InvalidParameterError):
        datagen.MixtureSpec(means, 0.5, [0.5, 0.6], 10)
    with pytest.raises(InvalidParameterError):
        datagen.MixtureSpec(means, 0.0, [0.5, 0.5], 10)
    with pytest.raises(InvalidParameterError):
        datagen.MixtureSpec(means, 0.5, [0.5, 0.5], 1)
    with pytest.raises(InvalidParameterError):
        datagen.MixtureSpec(means, 0.5, [1.0], 10)


def test_unbalanced_schedule():
    assert datagen.unbalanced_schedule(2, "forward") == pytest.approx([1 / 3, 2 / 3])
    assert datagen.unbalanced_schedule(2, "reverse") == pytest.approx([2 / 3, 1 / 3])
    for c in range(2, 7):
        assert np.array_equal(datagen.unbalanced_schedule(c, "forward")[::-1], datagen.unbalanced_schedule(c, "reverse"))
    with pytest.raises(InvalidParameterError):
        datagen.unbalanced_schedule(1)
    with pytest.raises(InvalidParameterError):
        datagen.unbalanced_schedule(3, "sideways")


def test_open_set_task_layout():
    task = datagen.open_set_task((1, 3), n_classes=3, n_per_class=100, seed=2,
                                 source_proportions=[0.25, 0.75], target_proportions=[0.75, 0.25])
    assert np.bincount(task.source.labels, minlength=4).tolist() == [0, 50, 0, 150]
    assert np.bincount(task.target.labels, minlength=4).tolist() == [0, 150, 100, 50]
    assert task.unknown_mask.sum() == 100
    assert np.all(task.target.labels[task.unknown_mask] == 2)
