"""Shared test fixtures: tiny operators and reference oracles."""

import numpy as np

from semicross.coeffs import CoeffVec
from semicross.hypercross import GalerkinInfoSource


class DiagonalOperator:
    """Plain diagonal operator on a fixed dimension (self-adjoint for real
    diagonals, which is all the tests need)."""

    def __init__(self, diag):
        self.diag = np.asarray(diag, dtype=float)
        self.dim = self.diag.size

    def apply(self, v: CoeffVec) -> CoeffVec:
        if v.dim > self.dim:
            raise ValueError("dimension mismatch")
        return CoeffVec(self.diag * v.extended(self.dim))

    apply_adjoint = apply


class ZeroOperator:
    def __init__(self, dim):
        self.dim = dim

    def apply(self, v: CoeffVec) -> CoeffVec:
        return CoeffVec.zeros(self.dim)

    apply_adjoint = apply


class HashSource(GalerkinInfoSource):
    """Deterministic dense pseudo-random information source: the entry at
    (i, j) is a fixed function of the indices. Used to exercise assembly
    against the dense projector-composition oracle."""

    def __init__(self, r=2.0, salt=0):
        super().__init__(r)
        self.salt = salt

    def _value(self, i, j):
        return float(self._values(np.asarray([i]), np.asarray([j]))[0])

    def _values(self, rows, cols):
        mixed = (rows.astype(np.int64) * 2654435761 + cols.astype(np.int64) * 40503
                 + self.salt) % 1000003
        return (mixed.astype(float) / 1000003.0) - 0.5


def cheb4_residual(k: int, lam):
    """Closed-form fourth-kind Chebyshev residual for the nu = 1/2 method:
    W_k(1 - 2 lam)/(2k + 1) with W_k(cos t) = sin((k + 1/2) t)/sin(t/2)."""
    lam = np.asarray(lam, dtype=float)
    out = np.ones_like(lam)
    pos = lam > 0
    theta = np.arccos(np.clip(1.0 - 2.0 * lam[pos], -1.0, 1.0))
    out[pos] = np.sin((k + 0.5) * theta) / np.sin(theta / 2.0) / (2 * k + 1)
    return out


def monomial_sine_coeffs(powers: dict, kk) -> np.ndarray:
    """Oracle: sine coefficients of a polynomial sum(c_m t^m) through the
    antiderivative recurrence

        I_0 = (1 - (-1)^k)/a,  J_0 = 0,  a = pi k,
        I_m = -(-1)^k/a + (m/a) J_{m-1},   J_m = -(m/a) I_{m-1},

    with I_m/J_m the integrals of t^m sin(a t) / t^m cos(a t) over [0, 1].
    Accurate to ~1e-12 relative for k up to a few hundred."""
    kk = np.asarray(kk, dtype=np.int64)
    a = np.pi * kk.astype(float)
    sgn = np.where(kk % 2 == 0, 1.0, -1.0)
    ii = [(1.0 - sgn) / a]
    jj = [np.zeros_like(a)]
    for m in range(1, max(powers) + 1):
        ii.append(-sgn / a + (m / a) * jj[m - 1])
        jj.append(-(m / a) * ii[m - 1])
    total = np.zeros(kk.size)
    for m, c in powers.items():
        total += c * ii[m]
    return np.sqrt(2.0) * total


def dense_cross_assembly(src, n: int) -> np.ndarray:
    """Reference dense assembly: literally compose the projector sum

        sum_{k=1}^{2n} (P_{2^k} - P_{2^{k-1}}) A P_{2^{2n-k}}  +  P_1 A P_{2^{2n}}

    on the full matrix of source entries. Independent of the index-set
    generator; n <= 4 keeps it cheap."""
    dim = 1 << (2 * n)
    ii = np.arange(1, dim + 1)
    full = src._values(np.repeat(ii, dim), np.tile(ii, dim)).reshape(dim, dim)

    def proj(m):
        p = np.zeros((dim, dim))
        d = min(m, dim)
        p[:d, :d] = np.eye(d)
        return p

    total = proj(1) @ full @ proj(dim)
    for k in range(1, 2 * n + 1):
        band = proj(1 << k) - proj(1 << (k - 1))
        total += band @ full @ proj(1 << (2 * n - k))
    return total
