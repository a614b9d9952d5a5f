"""Adaptive drivers: level initialization, per-level iteration budgets, the
refinement loop, and the a-priori constants used as runtime diagnostics.

Both drivers share one skeleton. The starting level is the smallest n >= 1
with

    (1 + 2^{r+3}) 2^{-2rn} n < gamma delta / (2 rho),

and the per-level budget K_n is the largest integer satisfying the same
inequality with rho replaced by K_n rho. At each level the two-step
recursion restarts from scratch (iterates of different levels live in
different dimensions) against the data truncated to the level window; the
driver then either stops -- residual norm at or below tau delta for the
discrepancy variant, nonempty admissible set for the balancing variant --
or refines the discretization by one level, computing only the new Galerkin
entries.

Safety caps convert non-termination under violated assumptions into
reported errors: ``n_max`` bounds the level, ``k_abs_max`` the total number
of iteration steps across levels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .coeffs import CoeffVec, norm
from .hypercross import assemble, refine
from .methods import MethodSpec, init_state, step
from .problems import Problem, perturb
from .stopping import BalancingWindow, balancing_admissible_set, balancing_stop_index

__all__ = [
    "ConfigError",
    "CapExceededError",
    "RunParams",
    "RunReport",
    "admissibility_threshold",
    "initial_level",
    "max_iter_count",
    "theoretical_constants",
    "run_discrepancy",
    "run_balancing",
]


class ConfigError(ValueError):
    """Invalid run configuration (e.g. tau below the admissibility
    threshold)."""


class CapExceededError(RuntimeError):
    """A safety cap was hit; ``kind`` is "level" or "iterations"."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class RunParams:
    """Control parameters of one adaptive run.

    delta      noise level (norm units of the scaled right-hand side)
    rho        source-set radius used by the budget rule
    gamma      discretization control parameter
    tau        discrepancy parameter (must exceed the admissibility
               threshold for discrepancy runs)
    r          operator smoothness class exponent
    k_sec      balancing look-ahead length
    seed       noise generator seed
    n_max      level safety cap
    k_abs_max  total-iteration safety cap
    noise_dim  ambient dimension the data perturbation lives in; fixed per
               run so that refinement reveals more coefficients of one and
               the same perturbed right-hand side
    """

    delta: float
    rho: float = 1.0
    gamma: float = 0.5
    tau: float = 2.0
    r: float = 2.0
    k_sec: int = 20
    seed: int = 0
    n_max: int = 12
    k_abs_max: int = 10 ** 6
    noise_dim: int = 2 ** 20

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.rho <= 0 or self.gamma <= 0 or self.r <= 0:
            raise ConfigError("rho, gamma and r must be positive")
        if self.k_sec < 1:
            raise ConfigError("k_sec must be >= 1")
        if self.n_max < 1 or self.k_abs_max < 1 or self.noise_dim < 1:
            raise ConfigError("safety caps must be positive")


@dataclass(frozen=True)
class RunReport:
    """Record of one adaptive run."""

    algorithm: int
    method: str
    delta: float
    rho: float
    gamma: float
    tau: float
    r: float
    k_sec: int
    seed: int
    levels: tuple
    budgets: tuple
    final_level: int
    stop_index: int
    total_iterations: int
    solution: CoeffVec
    residual_norms: tuple
    info_count: int
    rhs_norm: float
    abs_error: float
    rel_error: float
    exact_norm: float
    diagnostics: dict | None


def admissibility_threshold(spec: MethodSpec, gamma: float) -> float:
    """Smallest admissible discrepancy parameter,
    kappa0 (1 + sqrt(1/2 + kappa2/kappa0) gamma)."""
    return spec.kappa0 * (
        1.0 + math.sqrt(0.5 + spec.kappa2 / spec.kappa0) * gamma
    )


def _level_lhs(r: float, n: int) -> float:
    return (1.0 + 2.0 ** (r + 3.0)) * 2.0 ** (-2.0 * r * n) * n


def initial_level(p: RunParams) -> int:
    """Smallest level n >= 1 with (1+2^{r+3}) 2^{-2rn} n < gamma delta/(2 rho)."""
    target = p.gamma * p.delta / (2.0 * p.rho)
    for n in range(1, p.n_max + 1):
        if _level_lhs(p.r, n) < target:
            return n
    raise CapExceededError(
        "level", f"no admissible start level up to n_max={p.n_max}"
    )


def max_iter_count(n: int, p: RunParams) -> int:
    """Largest K with (1+2^{r+3}) 2^{-2rn} n < gamma delta/(2 K rho);
    0 signals an inconsistent level (the caller must refine).

    The strict inequality is preserved exactly: an integral bound yields
    bound - 1.
    """
    bound = p.gamma * p.delta * 2.0 ** (2.0 * p.r * n) / (
        2.0 * p.rho * (1.0 + 2.0 ** (p.r + 3.0)) * n
    )
    k = int(math.floor(bound))
    if k == bound:
        k -= 1
    return max(k, 0)


def theoretical_constants(spec: MethodSpec, p: RunParams, mu: float,
                          n: int) -> dict:
    """A-priori constants of the error and cost bounds at smoothness mu and
    level n.

    Returns c1, c2, c_alg1 (discrepancy-driver error constant), c_alg2
    (balancing-driver error constant), k_opt, and the cost-bound constants
    c3, c4, c5. The constants tied to the discrepancy analysis (c2, c_alg1,
    c3, c4) additionally require mu <= qualification - 1 with qualification
    >= 2 and tau above the admissibility threshold; tau at or below the
    threshold raises ConfigError.
    """
    if mu <= 0 or mu > spec.qualification:
        raise ValueError(
            f"mu must lie in (0, {spec.qualification}], got {mu}"
        )
    if n < 1:
        raise ValueError("n must be >= 1")
    k0 = spec.kappa0
    k2 = spec.kappa2
    kmu = spec.kappa_mu(mu)
    thr = admissibility_threshold(spec, p.gamma)
    c1 = k0 + 2.0 + (math.sqrt(k0 * (k0 / 2.0 + k2)) + 1.0 / (2.0 * n)) * p.gamma
    c_alg2 = 12.0 * kmu ** (1.0 / (mu + 1.0)) * (
        2.0 * (1.0 + p.gamma) * k0
    ) ** (mu / (mu + 1.0))
    k_opt = math.ceil(
        (2.0 * (1.0 + p.gamma) * p.delta / (kmu * p.rho)) ** (-1.0 / (mu + 1.0))
    )
    out = {
        "c1": c1,
        "c_alg2": c_alg2,
        "k_opt": k_opt,
        "tau_threshold": thr,
        "c2": None,
        "c_alg1": None,
        "c3": None,
        "c4": None,
        "c5": None,
    }
    if spec.qualification >= 2.0 and mu <= spec.qualification - 1.0:
        if p.tau <= thr:
            raise ConfigError(
                f"tau={p.tau} at or below admissibility threshold {thr:.6f}"
            )
        c2 = max((kmu / (p.tau - thr)) ** (1.0 / (mu + 1.0)), 1.0)
        c_alg1 = k0 ** (1.0 / (mu + 1.0)) * (p.tau + c1) ** (mu / (mu + 1.0)) \
            + 2.0 * k0 * (1.0 + p.gamma) * c2
        big = 1.0 + 2.0 ** (p.r + 3.0)
        c4 = math.log(
            (c2 / p.gamma) * 2.0 ** (p.r + 1.0) * big / (2.0 ** p.r - 1.0)
        ) / (p.r * math.log(2.0))
        c5 = (mu + 2.0) / ((mu + 1.0) * p.r * math.log(2.0))
        c3 = ((c2 / p.gamma) * 2.0 ** (2.0 * p.r + 1.0) * big) ** (1.0 / p.r)
        out.update({"c2": c2, "c_alg1": c_alg1, "c3": c3, "c4": c4, "c5": c5})
    return out


# ---------------------------------------------------------------------------
# run skeleton
# ---------------------------------------------------------------------------


def _window(fdelta: CoeffVec, dim: int) -> CoeffVec:
    """The data visible at one level: coefficients 1..dim of f_delta."""
    if dim <= fdelta.dim:
        return CoeffVec._wrap(fdelta.coeffs[:dim].copy())
    return CoeffVec._wrap(fdelta.extended(dim))


def _residual_norm(ax: CoeffVec, rhs: CoeffVec) -> float:
    d = ax.coeffs - rhs.coeffs
    return float(np.sqrt(np.sum(d * d)))


class _IterationBudget:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def bump(self):
        self.used += 1
        if self.used > self.cap:
            raise CapExceededError(
                "iterations", f"total iteration cap k_abs_max={self.cap} exceeded"
            )


def _prepare(problem: Problem, p: RunParams):
    if not getattr(problem, "scaled", True):
        warnings.warn(
            "running on the unscaled operator; the smoothness-class "
            "constants behind the level and budget rules are not sharp",
            stacklevel=3,
        )
    f = problem.rhs(p.noise_dim)
    rhs_norm = norm(f)
    if p.delta >= rhs_norm:
        warnings.warn(
            f"noise level delta={p.delta:g} is not below ||f||={rhs_norm:g}; "
            "the stopping-index and error bounds are not guaranteed",
            stacklevel=3,
        )
    fdelta = perturb(f, p.delta, p.seed)
    src = problem.fresh_source(dim_hint=p.noise_dim)
    return fdelta, rhs_norm, src


def _finish(problem: Problem, spec: MethodSpec, p: RunParams, algorithm: int,
            levels, budgets, stop_index, solution, residuals, total, src,
            rhs_norm, mu):
    dim_ref = max(solution.dim, p.noise_dim)
    exact = problem.exact(dim_ref)
    exact_norm = norm(exact)
    abs_error = norm(solution - exact)
    rel_error = abs_error / exact_norm if exact_norm > 0.0 else math.nan
    diagnostics = None
    if mu is not None:
        diagnostics = _diagnostics(spec, p, mu, levels)
    return RunReport(
        algorithm=algorithm,
        method=spec.name,
        delta=p.delta,
        rho=p.rho,
        gamma=p.gamma,
        tau=p.tau,
        r=p.r,
        k_sec=p.k_sec,
        seed=p.seed,
        levels=tuple(levels),
        budgets=tuple(budgets),
        final_level=levels[-1],
        stop_index=stop_index,
        total_iterations=total,
        solution=solution,
        residual_norms=tuple(residuals),
        info_count=src.eval_count,
        rhs_norm=rhs_norm,
        abs_error=abs_error,
        rel_error=rel_error,
        exact_norm=exact_norm,
        diagnostics=diagnostics,
    )


def _diagnostics(spec: MethodSpec, p: RunParams, mu: float, levels) -> dict:
    n_final = levels[-1]
    cons = theoretical_constants(spec, p, mu, n_final)
    diag = dict(cons)
    diag["mu"] = mu
    rate = p.rho ** (1.0 / (mu + 1.0)) * p.delta ** (mu / (mu + 1.0))
    diag["error_bound_alg2"] = cons["c_alg2"] * rate
    diag["error_bound_alg1"] = (
        cons["c_alg1"] * rate if cons["c_alg1"] is not None else None
    )
    diag["k_bound"] = (
        cons["c2"] * p.rho ** (1.0 / (mu + 1.0)) * p.delta ** (-1.0 / (mu + 1.0))
        if cons["c2"] is not None else None
    )
    diag["n_bound"] = None
    diag["info_bound"] = None
    if len(levels) > 1 and cons["c4"] is not None:
        logratio = math.log(p.rho / p.delta)
        diag["n_bound"] = cons["c4"] + cons["c5"] * logratio
        diag["info_bound"] = (
            cons["c3"]
            * (p.rho / p.delta) ** ((mu + 2.0) / (p.r * (mu + 1.0)))
            * (1.0 + cons["c4"] + cons["c5"] * logratio) ** (1.0 + 1.0 / p.r)
        )
    return diag


def run_discrepancy(problem: Problem, spec: MethodSpec, p: RunParams,
                    mu: float | None = None) -> RunReport:
    """Adaptive run stopped by the residual discrepancy test.

    Requires a method of qualification >= 2 and tau above the admissibility
    threshold. Per level, iterates k = 1..K_n are tested in order against
    the data truncated to the level window; the first residual norm at or
    below tau delta stops the run. ``mu`` attaches a-priori bound
    diagnostics to the report.
    """
    if spec.qualification < 2.0:
        raise ConfigError(
            f"discrepancy driver needs qualification >= 2, got {spec.qualification}"
        )
    thr = admissibility_threshold(spec, p.gamma)
    if p.tau <= thr:
        raise ConfigError(
            f"tau={p.tau} must exceed the admissibility threshold {thr:.6f}"
        )
    fdelta, rhs_norm, src = _prepare(problem, p)
    budget_guard = _IterationBudget(p.k_abs_max)
    n = initial_level(p)
    op = assemble(src, n)
    levels: list = []
    budgets: list = []
    residuals: list = []
    while True:
        k_n = max_iter_count(n, p)
        levels.append(n)
        budgets.append(k_n)
        if k_n >= 1:
            rhs_n = _window(fdelta, op.dim)
            state = init_state(op, rhs_n, spec)
            ax = op.apply(state.x_curr)
            for k in range(1, k_n + 1):
                budget_guard.bump()
                state = step(state, op, rhs_n, spec, ax_curr=ax)
                ax = op.apply(state.x_curr)
                res = _residual_norm(ax, rhs_n)
                residuals.append(res)
                if res <= p.tau * p.delta:
                    return _finish(problem, spec, p, 1, levels, budgets, k,
                                   state.x_curr, residuals, budget_guard.used,
                                   src, rhs_norm, mu)
        if n >= p.n_max:
            raise CapExceededError(
                "level", f"level cap n_max={p.n_max} reached without stopping"
            )
        op = refine(op, src)
        n += 1


def run_balancing(problem: Problem, spec: MethodSpec, p: RunParams,
                  mu: float | None = None) -> RunReport:
    """Adaptive run stopped by the balancing principle.

    Per level, K_n + k_sec iterates are computed and the admissible set with
    bound 8 (1 + gamma) kappa0 j delta is evaluated; an empty set triggers
    refinement, otherwise the smallest admissible index is returned. The
    iterate window is stored restricted to the operator's nonzero column
    support (every iterate vanishes off it), which bounds memory without
    changing any norm.
    """
    fdelta, rhs_norm, src = _prepare(problem, p)
    budget_guard = _IterationBudget(p.k_abs_max)
    bound_factor = 8.0 * (1.0 + p.gamma) * spec.kappa0 * p.delta
    n = initial_level(p)
    op = assemble(src, n)
    levels: list = []
    budgets: list = []
    residuals: list = []
    while True:
        k_n = max_iter_count(n, p)
        levels.append(n)
        budgets.append(k_n)
        if k_n >= 1:
            rhs_n = _window(fdelta, op.dim)
            support = op.column_support()
            idx = support - 1 if support.size else np.array([0])
            state = init_state(op, rhs_n, spec)
            ax = op.apply(state.x_curr)
            stored = []
            for k in range(1, k_n + p.k_sec + 1):
                budget_guard.bump()
                state = step(state, op, rhs_n, spec, ax_curr=ax)
                ax = op.apply(state.x_curr)
                residuals.append(_residual_norm(ax, rhs_n))
                stored.append(CoeffVec._wrap(state.x_curr.coeffs[idx].copy()))
            window = BalancingWindow(
                iterates=tuple(stored), k_n=k_n, k_sec=p.k_sec,
                bound_factor=bound_factor,
            )
            stop = balancing_stop_index(balancing_admissible_set(window))
            if stop is not None:
                full = np.zeros(op.dim)
                full[idx] = stored[stop - 1].coeffs
                return _finish(problem, spec, p, 2, levels, budgets, stop,
                               CoeffVec._wrap(full), residuals,
                               budget_guard.used, src, rhs_norm, mu)
        if n >= p.n_max:
            raise CapExceededError(
                "level", f"level cap n_max={p.n_max} reached without stopping"
            )
        op = refine(op, src)
        n += 1
