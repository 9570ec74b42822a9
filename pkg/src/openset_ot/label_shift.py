"""Label-shift correction: learn source class proportions along with the plan.

The source marginal is restricted to ``mu_s = D @ nu`` where ``D`` spreads each
class proportion ``nu_c`` uniformly over the source samples of class ``c``.
Target labels are read off the plan as the class sending the most mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidInputError, InvalidParameterError
from .ot_core import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Dataset,
    DualPotentials,
    LogKernel,
    TransportPlan,
    check_distribution,
    check_finite,
    cost_matrix,
    marginal_error,
    safe_log,
    uniform,
)

UNASSIGNED = -1
UPDATES = ("dual", "literal")


@dataclass(frozen=True)
class ClassAssignmentOperator:
    """The ``n_s x C`` matrix ``D`` with ``D[i, c] = 1 / n_c`` when sample ``i`` has class ``c``."""

    matrix: np.ndarray
    class_counts: np.ndarray
    class_index: np.ndarray  # 0-based column of each source sample
    classes: np.ndarray  # label id of each column

    @property
    def n_classes(self) -> int:
        return self.classes.shape[0]

    def pseudo_inverse(self) -> np.ndarray:
        """``(D^T D)^{-1} D^T``; ``D^T D`` is diagonal so this is exact."""
        return self.matrix.T * self.class_counts[:, None]


def _operator(class_index, classes) -> ClassAssignmentOperator:
    n_classes = len(classes)
    counts = np.bincount(class_index, minlength=n_classes)
    matrix = np.zeros((class_index.shape[0], n_classes))
    matrix[np.arange(class_index.shape[0]), class_index] = 1.0 / counts[class_index]
    return ClassAssignmentOperator(matrix, counts, class_index, np.asarray(classes, dtype=np.int64))


def build_operator(labels, n_classes: int) -> ClassAssignmentOperator:
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] < 1:
        raise InvalidInputError("labels must be a non-empty vector")
    if n_classes < 1:
        raise InvalidParameterError(f"number of classes must be >= 1, got {n_classes}")
    if np.any(labels < 1) or np.any(labels > n_classes):
        raise InvalidInputError(f"labels must lie in 1..{n_classes}")
    counts = np.bincount(labels - 1, minlength=n_classes)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise InvalidInputError(f"class {empty[0] + 1} has no source samples")
    return _operator(labels.astype(np.int64) - 1, np.arange(1, n_classes + 1))


def operator_from_labels(labels) -> ClassAssignmentOperator:
    """Operator over the label ids actually present, in increasing order."""
    classes, class_index = np.unique(np.asarray(labels), return_inverse=True)
    return _operator(class_index.astype(np.int64), classes)


def estimate_proportions(coupling, operator: ClassAssignmentOperator) -> np.ndarray:
    """``(D^T D)^{-1} D^T gamma 1``, i.e. the row mass carried by each class."""
    coupling = np.asarray(coupling, dtype=float)
    if coupling.ndim != 2 or coupling.shape[0] != operator.class_index.shape[0]:
        raise InvalidInputError(
            f"coupling has {coupling.shape[0] if coupling.ndim == 2 else '?'} rows, "
            f"operator has {operator.class_index.shape[0]}"
        )
    return np.bincount(operator.class_index, coupling.sum(axis=1), minlength=operator.n_classes)


def mass_by_class(coupling, operator: ClassAssignmentOperator) -> np.ndarray:
    coupling = np.asarray(coupling, dtype=float)
    if coupling.ndim != 2 or coupling.shape[0] != operator.matrix.shape[0]:
        raise InvalidInputError("coupling rows do not align with the operator")
    return operator.matrix.T @ coupling


def predict_labels(coupling, operator: ClassAssignmentOperator) -> np.ndarray:
    """Class id with the largest received mass per target column.

    Ties go to the smallest class id; all-zero columns get ``UNASSIGNED``.
    """
    masses = mass_by_class(coupling, operator)
    labels = operator.classes[np.argmax(masses, axis=0)]
    labels[~np.any(masses > 0, axis=0)] = UNASSIGNED
    return labels


@dataclass(frozen=True)
class LabelShiftConfig:
    """Hyperparameters of the label-shift solver.

    ``update="dual"`` minimises the dual exactly over the class-constrained
    potential ``f`` at each step; ``update="literal"`` applies the element-wise
    lower clamp ``mu_s_i >= exp(-1) * sum_j K_ij e^{g_j}`` instead.
    """

    eta: float = 0.001
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    normalize_cost: bool = False
    update: str = "dual"

    def __post_init__(self):
        for name in ("eta", "tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive, got {value}")
        if int(self.max_iter) < 1:
            raise InvalidParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.update not in UPDATES:
            raise InvalidParameterError(f"update must be one of {UPDATES}, got {self.update!r}")


@dataclass
class LabelShiftResult:
    plan: TransportPlan
    nu: np.ndarray
    predicted_labels: np.ndarray
    mass_by_class: np.ndarray
    classes: np.ndarray
    mu_s: np.ndarray
    mu_t: np.ndarray
    log_kernel: np.ndarray = field(repr=False)

    @property
    def converged(self) -> bool:
        return self.plan.converged


def solve_label_shift(kernel: LogKernel, operator: ClassAssignmentOperator, mu_t, tol, max_iter,
                      update="dual"):
    """Alternate the closed-form ``g`` step with a source-marginal step.

    Returns ``(f, g, log_mu_s, nu, iterations, converged)``.
    """
    idx = operator.class_index
    counts = operator.class_counts
    n_classes = operator.n_classes
    log_counts = np.log(counts)
    log_mu_t = safe_log(mu_t)

    f = -np.ones(kernel.shape[0])
    g = np.zeros(kernel.shape[1])
    nu = np.full(n_classes, 1.0 / n_classes)
    log_mu_s = np.log(nu[idx] / counts[idx])
    col = kernel.col_lse(f, g)
    converged = False
    it = 0
    for it in range(1, int(max_iter) + 1):
        g = log_mu_t - col
        row = kernel.row_lse(g, f)
        if update == "dual":
            # rows of a class share one mass, set from the geometric mean of
            # their current row sums; the shared gauge keeps sum(nu) = 1
            class_log_mass = np.bincount(idx, f + row, minlength=n_classes) / counts
            log_share = class_log_mass - logsumexp(class_log_mass + log_counts)
            log_mu_s = log_share[idx]
        else:
            log_mu_s = safe_log(nu[idx] / counts[idx])
            log_mu_s = np.maximum(log_mu_s, row - 1.0)
        f = log_mu_s - row
        col = kernel.col_lse(f, g)
        check_finite(it, f, g)
        row_mass = np.exp(f + row)
        nu = np.bincount(idx, row_mass, minlength=n_classes)
        err = np.abs(row_mass - np.exp(log_mu_s)).sum() + np.abs(np.exp(g + col) - mu_t).sum()
        if err <= tol:
            converged = True
            break
    return f, g, log_mu_s, nu, it, converged


def fit(source: Dataset, target: Dataset, mu_t=None, cfg: LabelShiftConfig = LabelShiftConfig(),
        n_classes: int | None = None) -> LabelShiftResult:
    """Estimate class proportions and target labels.

    ``mu_t`` defaults to uniform over the target points. With ``n_classes`` the
    source labels must cover every id in ``1..n_classes``; otherwise the classes
    are the distinct source labels.
    """
    if source.labels is None:
        raise InvalidInputError("label-shift needs a labelled source dataset")
    if source.dim != target.dim:
        raise InvalidInputError(
            f"dimension mismatch: source has d={source.dim}, target has d={target.dim}"
        )
    if n_classes is None:
        operator = operator_from_labels(source.labels)
    else:
        operator = build_operator(source.labels, n_classes)
    mu_t = uniform(target.n) if mu_t is None else check_distribution(mu_t, target.n, "mu_t")

    kernel = LogKernel.from_cost(cost_matrix(source, target, normalize=cfg.normalize_cost), cfg.eta)
    f, g, log_mu_s, nu, iterations, converged = solve_label_shift(
        kernel, operator, mu_t, cfg.tol, cfg.max_iter, cfg.update
    )
    coupling = kernel.coupling(f, g)
    mu_s = np.exp(log_mu_s)
    plan = TransportPlan(
        coupling=coupling,
        potentials=DualPotentials(f, g),
        marginal_error=marginal_error(coupling, mu_s, mu_t),
        iterations=iterations,
        converged=converged,
    )
    return LabelShiftResult(
        plan=plan,
        nu=estimate_proportions(coupling, operator),
        predicted_labels=predict_labels(coupling, operator),
        mass_by_class=mass_by_class(coupling, operator),
        classes=operator.classes,
        mu_s=mu_s,
        mu_t=mu_t,
        log_kernel=kernel.log_k,
    )


def kkt_report(result: LabelShiftResult, operator: ClassAssignmentOperator) -> dict:
    """Optimality diagnostics of the label-shift dual.

    ``g_residual`` is the max-norm gap of ``g`` to its closed form and
    ``class_mean_spread`` the spread of the per-class means of ``f``, which the
    dual constraint fixes to a common value.
    """
    f, g = result.plan.potentials.f, result.plan.potentials.g
    closed = safe_log(result.mu_t) - LogKernel(result.log_kernel).exact_col_lse(f)
    means = np.bincount(operator.class_index, f, minlength=operator.n_classes) / operator.class_counts
    return {
        "g_residual": float(np.max(np.abs(g - closed))),
        "class_mean_spread": float(means.max() - means.min()),
        "min_f_plus_one": float((f + 1.0).min()),
    }
