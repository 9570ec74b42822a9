"""Rejection of unknown-class target samples by learning the target marginal.

The transport plan and the target marginal are optimised jointly; target points
that end up receiving (almost) no mass from the source are flagged as unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .ot_core import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Dataset,
    DualPotentials,
    LogKernel,
    TransportPlan,
    check_finite,
    cost_matrix,
    marginal_error,
    uniform,
)

# tolerances of the optimality diagnostics
G_BOUND_TOL = 1e-6
F_RESIDUAL_TOL = 1e-8
INEQUALITY_TOL = 1e-8


@dataclass(frozen=True)
class RejectionConfig:
    """Hyperparameters of the rejection solver.

    ``literal_clamp`` switches the marginal clamp to the bound
    ``exp(-1) * sum_i K_ij * exp(g_j)`` instead of ``exp(-1) * sum_i K_ij * exp(f_i)``.
    """

    eta: float = 0.1
    alpha: float = 1.0
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    normalize_cost: bool = False
    literal_clamp: bool = False

    def __post_init__(self):
        for name in ("eta", "alpha", "tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive, got {value}")
        if int(self.max_iter) < 1:
            raise InvalidParameterError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class RejectionResult:
    plan: TransportPlan
    mu_t_star: np.ndarray
    threshold: float
    rejected: np.ndarray
    mu_s: np.ndarray
    # clamped target marginal as held by the solver at exit
    mu_t_working: np.ndarray = field(repr=False)
    log_kernel: np.ndarray = field(repr=False)

    @property
    def kept_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.rejected)

    @property
    def converged(self) -> bool:
        return self.plan.converged


def threshold(eta, alpha, n_s, n_t) -> float:
    """Mass threshold ``alpha * eta / (n_s + n_t)``."""
    for name, value in (("eta", eta), ("alpha", alpha), ("n_s", n_s), ("n_t", n_t)):
        if not value > 0:
            raise InvalidParameterError(f"{name} must be positive, got {value}")
    return alpha * eta / (n_s + n_t)


def solve_rejection(log_kernel: LogKernel, mu_s, tol, max_iter, literal_clamp=False):
    """Run the rejection iterations on a prepared kernel.

    Returns ``(f, g, log_mu_t, iterations, converged)``. The target marginal is
    kept in log form so that entries far below ``1e-300`` stay exact.
    """
    n_s, n_t = log_kernel.shape
    log_mu_s = np.log(mu_s)
    f = np.zeros(n_s)
    g = -np.ones(n_t)
    log_mu_t = np.full(n_t, -np.log(n_t))
    if literal_clamp:
        log_k_colsum = log_kernel.exact_col_lse(np.zeros(n_s))

    row = log_kernel.row_lse(g, f)
    converged = False
    it = 0
    for it in range(1, int(max_iter) + 1):
        f = log_mu_s - row
        col = log_kernel.col_lse(f, g)
        log_mu_t = g + col
        if literal_clamp:
            bound = g - 1.0 + log_k_colsum
        else:
            bound = col - 1.0
        log_mu_t = np.minimum(log_mu_t, bound)
        g = log_mu_t - col
        row = log_kernel.row_lse(g, f)
        check_finite(it, f, g)
        err = np.abs(np.exp(f + row) - mu_s).sum() + np.abs(np.exp(g + col) - np.exp(log_mu_t)).sum()
        if err <= tol:
            converged = True
            break
    return f, g, log_mu_t, it, converged


def reject(source: Dataset, target: Dataset, cfg: RejectionConfig = RejectionConfig(),
           threshold_value: float | None = None) -> RejectionResult:
    """Learn the plan and target marginal, then flag targets at or below the threshold.

    The source marginal is uniform. ``threshold_value`` overrides the default
    ``alpha * eta / (n_s + n_t)``.
    """
    if source.dim != target.dim:
        raise InvalidInputError(
            f"dimension mismatch: source has d={source.dim}, target has d={target.dim}"
        )
    cost = cost_matrix(source, target, normalize=cfg.normalize_cost)
    kernel = LogKernel.from_cost(cost, cfg.eta)
    mu_s = uniform(source.n)
    f, g, log_mu_t, iterations, converged = solve_rejection(
        kernel, mu_s, cfg.tol, cfg.max_iter, cfg.literal_clamp
    )
    coupling = kernel.coupling(f, g)
    mu_t_working = np.exp(log_mu_t)
    mu_t_star = coupling.sum(axis=0)
    lam = threshold(cfg.eta, cfg.alpha, source.n, target.n) if threshold_value is None else threshold_value
    plan = TransportPlan(
        coupling=coupling,
        potentials=DualPotentials(f, g),
        marginal_error=marginal_error(coupling, mu_s, mu_t_working),
        iterations=iterations,
        converged=converged,
    )
    return RejectionResult(
        plan=plan,
        mu_t_star=mu_t_star,
        threshold=float(lam),
        rejected=mu_t_star <= lam,
        mu_s=mu_s,
        mu_t_working=mu_t_working,
        log_kernel=kernel.log_k,
    )


@dataclass
class KKTReport:
    max_g: float
    f_residual: float
    inequality_residual: float

    @property
    def g_bound_ok(self) -> bool:
        return self.max_g <= -1.0 + G_BOUND_TOL

    @property
    def f_residual_ok(self) -> bool:
        return self.f_residual <= F_RESIDUAL_TOL

    @property
    def inequality_ok(self) -> bool:
        return self.inequality_residual <= INEQUALITY_TOL

    @property
    def passed(self) -> bool:
        return self.g_bound_ok and self.f_residual_ok and self.inequality_ok

    def as_dict(self) -> dict:
        return {
            "max_g": float(self.max_g),
            "f_residual": float(self.f_residual),
            "inequality_residual": float(self.inequality_residual),
            "g_bound_ok": self.g_bound_ok,
            "f_residual_ok": self.f_residual_ok,
            "inequality_ok": self.inequality_ok,
        }


def kkt_check(f, g, log_kernel, mu_s) -> KKTReport:
    """Optimality diagnostics of the rejection dual for arbitrary potentials.

    * ``max_g``: largest entry of ``g`` (sufficient condition ``g <= -1``),
    * ``f_residual``: max-norm gap between ``f`` and its closed form
      ``log mu_s - log(K e^g)``,
    * ``inequality_residual``: ``max_i sum_j e^{f_i} K_ij e^{g_j} (1 + g_j)``,
      which must be nonpositive.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    kernel = log_kernel if isinstance(log_kernel, LogKernel) else LogKernel(log_kernel)
    closed_form = np.log(np.asarray(mu_s, dtype=float)) - kernel.exact_row_lse(g)
    coupling = kernel.coupling(f, g)
    weighted = coupling @ (1.0 + g)
    return KKTReport(
        max_g=float(g.max()),
        f_residual=float(np.max(np.abs(f - closed_form))),
        inequality_residual=float(weighted.max()),
    )


def kkt_report(result: RejectionResult) -> KKTReport:
    pot = result.plan.potentials
    return kkt_check(pot.f, pot.g, result.log_kernel, result.mu_s)
