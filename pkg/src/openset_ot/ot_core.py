"""Entropic optimal transport primitives shared by the solvers.

All solvers work on dual potentials ``(f, g)`` such that the coupling is
``diag(exp(f)) @ K @ diag(exp(g))`` with ``K = exp(-cost / eta)``. The kernel is
never exponentiated naively; see :class:`LogKernel`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .errors import InvalidInputError, InvalidParameterError, NumericalFailureError

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10000

# floor applied to probability masses before taking logs
MASS_FLOOR = 1e-300
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with optional integer class labels (ids >= 1)."""

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise InvalidInputError(f"points must be a non-empty n x d matrix, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("points contain non-finite values")
        object.__setattr__(self, "points", points)
        if self.labels is not None:
            raw = np.asarray(self.labels)
            labels = raw.astype(np.int64)
            if labels.shape != (points.shape[0],):
                raise InvalidInputError(
                    f"labels must have length {points.shape[0]}, got shape {labels.shape}"
                )
            if np.any(labels != raw) or np.any(labels < 1):
                raise InvalidInputError("labels must be integers >= 1")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, index) -> "Dataset":
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.points[index], labels)


@dataclass
class DualPotentials:
    f: np.ndarray
    g: np.ndarray


@dataclass
class TransportPlan:
    coupling: np.ndarray
    potentials: DualPotentials
    marginal_error: float
    iterations: int
    converged: bool = True


def _as_points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    return Dataset(data).points


def cost_matrix(source, target, normalize: bool = False) -> np.ndarray:
    """Pairwise Euclidean distances between source rows and target rows.

    With ``normalize=True`` the matrix is divided by its maximum entry (left
    unchanged when that maximum is zero).
    """
    xs, xt = _as_points(source), _as_points(target)
    if xs.shape[1] != xt.shape[1]:
        raise InvalidInputError(
            f"dimension mismatch: source has d={xs.shape[1]}, target has d={xt.shape[1]}"
        )
    cost = cdist(xs, xt, metric="euclidean")
    if normalize:
        top = cost.max()
        if top > 0:
            cost = cost / top
    return cost


def _check_eta(eta) -> float:
    eta = float(eta)
    if not eta > 0 or not np.isfinite(eta):
        raise InvalidParameterError(f"eta must be a positive finite real, got {eta}")
    return eta


def gibbs_kernel(cost, eta) -> np.ndarray:
    """``exp(-cost / eta)``; entries may underflow to 0 for large costs."""
    eta = _check_eta(eta)
    return np.exp(-np.asarray(cost, dtype=float) / eta)


def scaled_coupling(potentials: DualPotentials, kernel) -> np.ndarray:
    """``B(f, g) = diag(e^f) K diag(e^g)`` for an explicit kernel matrix."""
    kernel = np.asarray(kernel, dtype=float)
    f = np.asarray(potentials.f, dtype=float)
    g = np.asarray(potentials.g, dtype=float)
    if kernel.ndim != 2 or kernel.shape != (f.shape[0], g.shape[0]):
        raise InvalidInputError(
            f"potential lengths ({f.shape[0]}, {g.shape[0]}) do not match kernel shape {kernel.shape}"
        )
    # exp of the combined exponent so that (f + c, g - c) cancels before rounding
    with np.errstate(divide="ignore"):
        log_k = np.log(kernel)
    return np.exp(f[:, None] + g[None, :] + log_k)


def entropy(coupling) -> float:
    """Shannon entropy ``-sum(gamma * log(gamma))`` with ``0 log 0 = 0``."""
    gamma = np.asarray(coupling, dtype=float)
    if np.any(gamma < 0):
        raise InvalidInputError("coupling has negative entries")
    nz = gamma[gamma > 0]
    return float(-np.sum(nz * np.log(nz)))


def marginal_error(coupling, mu_s, mu_t) -> float:
    """L1 violation of both marginal constraints."""
    gamma = np.asarray(coupling, dtype=float)
    mu_s = np.asarray(mu_s, dtype=float)
    mu_t = np.asarray(mu_t, dtype=float)
    if gamma.ndim != 2 or gamma.shape != (mu_s.shape[0], mu_t.shape[0]):
        raise InvalidInputError(
            f"coupling shape {gamma.shape} does not match marginals ({mu_s.shape[0]}, {mu_t.shape[0]})"
        )
    return float(np.abs(gamma.sum(axis=1) - mu_s).sum() + np.abs(gamma.sum(axis=0) - mu_t).sum())


def check_distribution(mass, n=None, name="distribution") -> np.ndarray:
    mass = np.asarray(mass, dtype=float)
    if mass.ndim != 1 or (n is not None and mass.shape[0] != n):
        raise InvalidInputError(f"{name} must be a vector of length {n}, got shape {mass.shape}")
    if np.any(~np.isfinite(mass)) or np.any(mass < 0):
        raise InvalidInputError(f"{name} must be finite and nonnegative")
    if abs(mass.sum() - 1.0) > NORMALIZATION_TOL:
        raise InvalidInputError(f"{name} must sum to 1, sums to {mass.sum()!r}")
    return mass


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def safe_log(mass) -> np.ndarray:
    return np.log(np.maximum(mass, MASS_FLOOR))


def check_finite(iteration, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalFailureError("non-finite dual potential", iteration=iteration)


class LogKernel:
    """Gibbs kernel held as ``log K = -cost / eta`` with fast log-sum-exp reductions.

    ``row_lse(g)`` returns ``log(K @ exp(g))`` and ``col_lse(f)`` returns
    ``log(K.T @ exp(f))``. Reductions run as mat-vec products against a cached
    rescaled kernel ``exp(log K + a_i + b_j - shift)``; the offsets ``(a, b)`` are
    re-absorbed from the current potentials whenever they drift by more than
    ``drift``. Rows or columns whose rescaled sum underflows fall back to an
    exact max-subtracted log-sum-exp, so the result never depends on ``exp(-cost/eta)``
    being representable.
    """

    drift = 30.0
    tiny = 1e-200
    # below this fraction of nonzero entries the rescaled kernel is stored sparse
    sparse_density = 0.25

    def __init__(self, log_k):
        self.log_k = np.ascontiguousarray(log_k, dtype=float)
        self._k = None
        self._kt = None
        self._a = np.zeros(self.log_k.shape[0])
        self._b = np.zeros(self.log_k.shape[1])
        self._shift = 0.0

    @classmethod
    def from_cost(cls, cost, eta):
        eta = _check_eta(eta)
        return cls(-np.asarray(cost, dtype=float) / eta)

    @property
    def shape(self):
        return self.log_k.shape

    def _absorb(self, f, g):
        self._a = np.array(f, dtype=float)
        self._b = np.array(g, dtype=float)
        expo = self.log_k + self._a[:, None] + self._b[None, :]
        self._shift = float(expo.max())
        expo -= self._shift
        k = np.exp(expo, out=expo)
        if np.count_nonzero(k) < self.sparse_density * k.size:
            # only exact zeros are dropped, so the products are unchanged
            self._k = sparse.csr_matrix(k)
            self._kt = self._k.T.tocsr()
        else:
            self._k, self._kt = k, None

    def _stale(self, f, g):
        return (
            self._k is None
            or np.max(np.abs(f - self._a)) > self.drift
            or np.max(np.abs(g - self._b)) > self.drift
        )

    def row_lse(self, g, f):
        """``log sum_j K_ij exp(g_j)``; ``f`` is only used as the absorption point."""
        if self._stale(f, g):
            self._absorb(f, g)
        s = self._k @ np.exp(g - self._b)
        bad = ~(s > self.tiny)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(s) + self._shift - self._a
        if bad.any():
            out[bad] = logsumexp(self.log_k[bad] + g[None, :], axis=1)
        return out

    def col_lse(self, f, g):
        """``log sum_i K_ij exp(f_i)``; ``g`` is only used as the absorption point."""
        if self._stale(f, g):
            self._absorb(f, g)
        w = np.exp(f - self._a)
        s = w @ self._k if self._kt is None else self._kt @ w
        bad = ~(s > self.tiny)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(s) + self._shift - self._b
        if bad.any():
            out[bad] = logsumexp(self.log_k[:, bad] + f[:, None], axis=0)
        return out

    def exact_row_lse(self, g):
        return logsumexp(self.log_k + np.asarray(g)[None, :], axis=1)

    def exact_col_lse(self, f):
        return logsumexp(self.log_k + np.asarray(f)[:, None], axis=0)

    def coupling(self, f, g):
        return np.exp(np.asarray(f)[:, None] + self.log_k + np.asarray(g)[None, :])


def _check_solver_params(tol, max_iter):
    if not tol > 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    if int(max_iter) < 1:
        raise InvalidParameterError(f"max_iter must be >= 1, got {max_iter}")


def sinkhorn(mu_s, mu_t, cost, eta, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> TransportPlan:
    """Balanced entropic OT by alternating log-domain updates of the potentials.

    ``f <- log mu_s - log(K e^g)`` then ``g <- log mu_t - log(K^T e^f)`` until the
    L1 marginal error drops to ``tol``. Hitting ``max_iter`` returns the current
    plan with ``converged=False``.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise InvalidInputError(f"cost must be a matrix, got shape {cost.shape}")
    mu_s = check_distribution(mu_s, cost.shape[0], "mu_s")
    mu_t = check_distribution(mu_t, cost.shape[1], "mu_t")
    _check_solver_params(tol, max_iter)
    kernel = LogKernel.from_cost(cost, eta)
    log_mu_s, log_mu_t = safe_log(mu_s), safe_log(mu_t)

    f = np.zeros(cost.shape[0])
    g = np.zeros(cost.shape[1])
    row = kernel.row_lse(g, f)
    converged = False
    it = 0
    for it in range(1, int(max_iter) + 1):
        f = log_mu_s - row
        col = kernel.col_lse(f, g)
        g = log_mu_t - col
        row = kernel.row_lse(g, f)
        check_finite(it, f, g)
        err = np.abs(np.exp(f + row) - mu_s).sum() + np.abs(np.exp(g + col) - mu_t).sum()
        if err <= tol:
            converged = True
            break

    coupling = kernel.coupling(f, g)
    return TransportPlan(
        coupling=coupling,
        potentials=DualPotentials(f, g),
        marginal_error=marginal_error(coupling, mu_s, mu_t),
        iterations=it,
        converged=converged,
    )
