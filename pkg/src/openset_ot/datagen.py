"""Seeded 2D Gaussian mixtures for the synthetic experiments.

Randomness comes from numpy's PCG64 generator. The seed feeds a
``SeedSequence`` that is split into one child stream per class, so the points
of class ``c`` do not depend on how many samples the other classes draw.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .ot_core import Dataset

DEFAULT_RADIUS = 3.0


class MixtureWarning(UserWarning):
    pass


def circle_means(n_classes: int, radius: float = DEFAULT_RADIUS) -> np.ndarray:
    """Class means equally spaced on a circle, the first one at 90 degrees."""
    angles = np.deg2rad(90.0 + 360.0 * np.arange(n_classes) / n_classes)
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


@dataclass(frozen=True)
class MixtureSpec:
    means: np.ndarray
    noise: float
    proportions: np.ndarray
    n: int
    seed: int = 0

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        props = np.asarray(self.proportions, dtype=float)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "proportions", props)
        if props.shape != (means.shape[0],):
            raise InvalidParameterError(
                f"{means.shape[0]} means but {props.shape[0] if props.ndim else 0} proportions"
            )
        if np.any(props < 0) or abs(props.sum() - 1.0) > 1e-9:
            raise InvalidParameterError("proportions must be nonnegative and sum to 1")
        if not self.noise > 0:
            raise InvalidParameterError(f"noise must be positive, got {self.noise}")
        if self.n < means.shape[0]:
            raise InvalidParameterError(f"n={self.n} is smaller than the number of classes")


def class_counts(n: int, proportions) -> np.ndarray:
    """Largest-remainder rounding of ``n * proportions`` to integers summing to ``n``."""
    raw = n * np.asarray(proportions, dtype=float)
    counts = np.floor(raw).astype(np.int64)
    short = n - counts.sum()
    if short > 0:
        # stable sort keeps the smaller class index first on equal remainders
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def sample_mixture(spec: MixtureSpec) -> Dataset:
    """Draw ``spec.n`` labelled points; class ``c`` (0-based) gets label ``c + 1``."""
    counts = class_counts(spec.n, spec.proportions)
    for c in np.flatnonzero((counts == 0) & (spec.proportions > 0)):
        warnings.warn(f"class {c + 1} has positive proportion but no samples", MixtureWarning)
    streams = np.random.SeedSequence(spec.seed).spawn(len(counts))
    dim = spec.means.shape[1]
    points = []
    for c, (count, stream) in enumerate(zip(counts, streams)):
        rng = np.random.Generator(np.random.PCG64(stream))
        points.append(spec.means[c] + spec.noise * rng.standard_normal((count, dim)))
    labels = np.repeat(np.arange(1, len(counts) + 1), counts)
    return Dataset(np.concatenate(points), labels)


def unbalanced_schedule(n_classes: int, kind: str = "forward") -> np.ndarray:
    """Linear ramp of class proportions, ``p_c ~ c``; ``reverse`` flips it."""
    if n_classes < 2:
        raise InvalidParameterError(f"need at least 2 classes, got {n_classes}")
    ramp = np.arange(1, n_classes + 1, dtype=float)
    ramp /= ramp.sum()
    if kind == "forward":
        return ramp
    if kind == "reverse":
        return ramp[::-1].copy()
    raise InvalidParameterError(f"kind must be 'forward' or 'reverse', got {kind!r}")


@dataclass(frozen=True)
class OpenSetTask:
    source: Dataset
    target: Dataset  # labels hold the ground truth, including unknown classes
    shared: tuple

    @property
    def unknown_mask(self) -> np.ndarray:
        return ~np.isin(self.target.labels, self.shared)


def open_set_task(shared, n_classes=3, n_per_class=1000, noise=0.5, seed=0,
                  source_proportions=None, target_proportions=None,
                  radius=DEFAULT_RADIUS) -> OpenSetTask:
    """Source over the ``shared`` labels, target over all ``n_classes`` labels.

    Without explicit proportions every class gets ``n_per_class`` samples on both
    sides. ``source_proportions`` / ``target_proportions`` (one entry per shared
    class) redistribute the ``len(shared) * n_per_class`` shared samples; the
    unknown classes keep ``n_per_class`` samples each in the target.
    """
    shared = tuple(int(c) for c in shared)
    means = circle_means(n_classes, radius)
    n_shared = len(shared) * n_per_class
    unknown = [c for c in range(1, n_classes + 1) if c not in shared]

    src = np.zeros(n_classes)
    src[[c - 1 for c in shared]] = (
        np.full(len(shared), 1.0 / len(shared)) if source_proportions is None else source_proportions
    )
    tgt_shared = (
        np.full(len(shared), 1.0 / len(shared)) if target_proportions is None else np.asarray(target_proportions)
    )
    n_target = n_shared + len(unknown) * n_per_class
    tgt = np.zeros(n_classes)
    tgt[[c - 1 for c in shared]] = tgt_shared * n_shared / n_target
    tgt[[c - 1 for c in unknown]] = n_per_class / n_target

    seeds = np.random.SeedSequence(seed).generate_state(2)
    source = sample_mixture(MixtureSpec(means, noise, src, n_shared, int(seeds[0])))
    target = sample_mixture(MixtureSpec(means, noise, tgt, n_target, int(seeds[1])))
    return OpenSetTask(source, target, shared)
