"""Semiiterative two-step regularization methods from monic orthogonal
polynomials.

A method is generated by the recursion coefficients ``alpha_k``, ``beta_k``
of a family of monic polynomials orthogonal on [-1, 1],

    P_{k+1}(x) = (x - alpha_k) P_k(x) - beta_k P_{k-1}(x),
    P_0(x) = 1,  P_1(x) = x - alpha_0,  beta_k > 0,

and runs the two-step iteration for an operator equation A x = f,

    x_0 = 2 omega_0 A* f,   x_{-1} = 0,
    x_k = x_{k-1} + ((1 - alpha_k) omega_k - 1)(x_{k-1} - x_{k-2})
               + 2 omega_k A*(f - A x_{k-1}),          k >= 1,

with omega_0 = 1/(1 - alpha_0) and omega_k = 1/(1 - alpha_k -
beta_k omega_{k-1}).  Writing the iterate spectrally, x_k = g(A*A) A* f
where the filter polynomial g of the step-k iterate satisfies

    1 - lam * g(lam) = P_{k+1}(1 - 2 lam) / P_{k+1}(1),

i.e. the iterate produced after k steps carries the normalized polynomial
of index k + 1 (the initial iterate x_0 already carries P_1).
``residual_value`` and ``filter_value`` below are indexed by the polynomial
index, so the oracle identity for a diagonal operator with entries sigma_i
and data g_i reads

    step-k iterate component i == filter_value(spec, k + 1, sigma_i**2)
                                  * sigma_i * g_i.

The nu-methods use the monic Jacobi family with parameters
(2 nu - 1/2, -1/2); their qualification is 2 nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coeffs import CoeffVec

__all__ = [
    "MethodSpec",
    "IterState",
    "NumericalDegeneracyError",
    "nu_method",
    "omega_next",
    "init_state",
    "step",
    "residual_value",
    "residual_profile",
    "filter_value",
]

#: omega recursion denominators smaller than this signal a degenerate method
_DEGENERACY_EPS = 1e-14

#: filter evaluation point substituted for lam == 0 (one-sided limit)
_FILTER_EPS = 1e-12


class NumericalDegeneracyError(ArithmeticError):
    """The omega recursion hit a (near-)zero denominator."""


@dataclass(frozen=True)
class MethodSpec:
    """A semiiterative method and its regularization constants.

    ``alpha``/``beta`` generate the monic three-term recurrence; ``kappa0``
    bounds the residual polynomials on [0, 1], ``kappa_mu(mu)`` is the
    constant in the saturation bound |lam^(mu/2) r_k(lam)| <=
    kappa_mu / (k+1)^mu for 0 < mu <= qualification, and ``kappa2`` is
    kappa_mu at mu = 2 (meaningful when the qualification is >= 2; it feeds
    the admissibility threshold of the discrepancy-principle driver).
    """

    name: str
    alpha: Callable[[int], float]
    beta: Callable[[int], float]
    kappa0: float
    kappa2: float
    kappa_mu: Callable[[float], float]
    qualification: float


@dataclass(frozen=True)
class IterState:
    """State of one run of the two-step iteration.

    ``k`` counts completed steps; ``x_curr`` is the step-k iterate and
    ``x_prev`` the step-(k-1) one (the zero vector right after
    initialization, realizing x_{-1} = 0).
    """

    k: int
    x_curr: CoeffVec
    x_prev: CoeffVec
    omega: float


def nu_method(nu: float) -> MethodSpec:
    """The nu-method: monic Jacobi polynomials with parameters
    (2 nu - 1/2, -1/2).

    Closed-form recursion coefficients in the Jacobi parameters (a, b):

        alpha_0 = (b - a)/(a + b + 2),
        alpha_k = (b^2 - a^2)/((2k+a+b)(2k+a+b+2)),       k >= 1,
        beta_k  = 4k(k+a)(k+b)(k+a+b)
                  / ((2k+a+b)^2 (2k+a+b+1)(2k+a+b-1)),    k >= 1.

    The k = 0 case is split out because the generic alpha formula is 0/0
    when a + b = 0 (nu = 1/2, the Chebyshev method, where the family
    degenerates to alpha_k = 0, beta_k = 1/4 for k >= 1).

    Constants: kappa0 = 1; kappa_mu is the constant max(1, (2 nu)!) with the
    factorial read as Gamma(2 nu + 1) for non-integer 2 nu; qualification
    2 nu.
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    a = 2.0 * nu - 0.5
    b = -0.5

    def alpha(k: int) -> float:
        if k == 0:
            return (b - a) / (a + b + 2.0)
        s = 2.0 * k + a + b
        return (b * b - a * a) / (s * (s + 2.0))

    def beta(k: int) -> float:
        if k < 1:
            raise ValueError("beta is defined for k >= 1")
        s = 2.0 * k + a + b
        return 4.0 * k * (k + a) * (k + b) * (k + a + b) / (
            s * s * (s + 1.0) * (s - 1.0)
        )

    kap = max(1.0, math.gamma(2.0 * nu + 1.0))
    return MethodSpec(
        name=f"nu-{nu:g}",
        alpha=alpha,
        beta=beta,
        kappa0=1.0,
        kappa2=kap,
        kappa_mu=lambda mu, _kap=kap: _kap,
        qualification=2.0 * nu,
    )


def omega_next(spec: MethodSpec, k: int, omega_prev: float) -> float:
    """Advance the omega recursion: omega_0 = 1/(1 - alpha_0), then
    omega_k = 1/(1 - alpha_k - beta_k omega_{k-1}).

    ``omega_prev`` is ignored for k == 0.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        den = 1.0 - spec.alpha(0)
    else:
        den = 1.0 - spec.alpha(k) - spec.beta(k) * omega_prev
    if abs(den) < _DEGENERACY_EPS:
        raise NumericalDegeneracyError(
            f"omega recursion denominator {den:.3e} at k={k} ({spec.name})"
        )
    return 1.0 / den


def init_state(op, rhs: CoeffVec, spec: MethodSpec) -> IterState:
    """Initial state: k = 0, x_{-1} = 0 and x_0 = 2 omega_0 A* f."""
    if rhs.dim > op.dim:
        raise ValueError(
            f"rhs dimension {rhs.dim} exceeds operator dimension {op.dim}"
        )
    omega0 = omega_next(spec, 0, 0.0)
    x0 = (2.0 * omega0) * op.apply_adjoint(rhs)
    return IterState(k=0, x_curr=x0, x_prev=CoeffVec.zeros(op.dim), omega=omega0)


def step(state: IterState, op, rhs: CoeffVec, spec: MethodSpec,
         ax_curr: CoeffVec | None = None) -> IterState:
    """Advance the iteration by one step.

    ``ax_curr`` may pass a precomputed A x_curr (drivers keep it around for
    the residual of the previous iterate); omitted, it is recomputed.
    """
    k = state.k + 1
    omega = omega_next(spec, k, state.omega)
    if ax_curr is None:
        ax_curr = op.apply(state.x_curr)
    residual = rhs - ax_curr
    update = op.apply_adjoint(residual)
    mu_k = (1.0 - spec.alpha(k)) * omega - 1.0
    x_new = state.x_curr + mu_k * (state.x_curr - state.x_prev) + (2.0 * omega) * update
    return IterState(k=k, x_curr=x_new, x_prev=state.x_curr, omega=omega)


def _joint_recurrence(spec: MethodSpec, k: int, lam: np.ndarray) -> np.ndarray:
    """Ratio P_k(1-2 lam)/P_k(1) by running both recurrences side by side.

    The single division happens at the end; intermediate joint rescaling by
    powers of two (exact in binary floating point) guards against under- or
    overflow of the monic values for large k without touching the ratio.
    """
    x = 1.0 - 2.0 * lam
    if k == 0:
        return np.ones_like(x)
    u_prev = np.ones_like(x)
    u = x - spec.alpha(0)
    v_prev = 1.0
    v = 1.0 - spec.alpha(0)
    for j in range(1, k):
        a_j = spec.alpha(j)
        b_j = spec.beta(j)
        u_prev, u = u, (x - a_j) * u - b_j * u_prev
        v_prev, v = v, (1.0 - a_j) * v - b_j * v_prev
        mag = abs(v)
        if mag < 1e-140 or mag > 1e140:
            scale = 2.0 ** (-math.frexp(mag)[1])
            u_prev = u_prev * scale
            u = u * scale
            v_prev *= scale
            v *= scale
    return u / v


def residual_value(spec: MethodSpec, k: int, lam):
    """Residual polynomial value r_k(lam) = P_k(1-2 lam)/P_k(1), r_0 = 1.

    ``lam`` may be a scalar or an array with entries in [0, 1].
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    arr = np.asarray(lam, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("lam must lie in [0, 1]")
    out = _joint_recurrence(spec, k, np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out


def residual_profile(spec: MethodSpec, k_max: int, lam) -> np.ndarray:
    """All residual polynomial values r_0..r_{k_max} on a grid.

    Returns an array of shape (k_max + 1, len(lam)); row k is r_k. One run
    of the joint recurrence serves every row, which keeps sweep-style
    diagnostics (condition suites, Lipschitz samples) cheap.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("lam must lie in [0, 1]")
    x = 1.0 - 2.0 * arr
    rows = np.empty((k_max + 1, arr.size))
    rows[0] = 1.0
    if k_max == 0:
        return rows
    u_prev = np.ones_like(x)
    u = x - spec.alpha(0)
    v_prev = 1.0
    v = 1.0 - spec.alpha(0)
    rows[1] = u / v
    for j in range(1, k_max):
        a_j = spec.alpha(j)
        b_j = spec.beta(j)
        u_prev, u = u, (x - a_j) * u - b_j * u_prev
        v_prev, v = v, (1.0 - a_j) * v - b_j * v_prev
        mag = abs(v)
        if mag < 1e-140 or mag > 1e140:
            scale = 2.0 ** (-math.frexp(mag)[1])
            u_prev = u_prev * scale
            u = u * scale
            v_prev *= scale
            v *= scale
        rows[j + 1] = u / v
    return rows


def filter_value(spec: MethodSpec, k: int, lam):
    """Filter polynomial value g_k(lam) = (1 - r_k(lam))/lam for k >= 1.

    At lam == 0 the one-sided value at 1e-12 is substituted; the analytic
    limit is never needed by the drivers.
    """
    if k < 1:
        raise ValueError("filter index k must be >= 1")
    arr = np.asarray(lam, dtype=float)
    eff = np.where(arr == 0.0, _FILTER_EPS, arr)
    r = residual_value(spec, k, eff)
    out = (1.0 - np.asarray(r)) / eff
    return float(out) if arr.ndim == 0 else out
