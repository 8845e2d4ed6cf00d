"""Hot loops of the Bethe solvers and the b-operator recurrence.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy
version.  Setting ``SPINBOSON_FBA_NO_NUMBA=1`` (or running without numba
installed) selects the numpy path.  Both paths return identical results up
to rounding; ``benchmarks/bench_kernels.py`` times them against each other.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("SPINBOSON_FBA_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:  # pragma: no cover - import guard
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference implementations


def pair_terms_numpy(roots, sigma, shift, expo):
    """Log of the pair product and its Jacobian.

    For every ``b`` this computes ``sum_{a != b} sum_j expo[j] *
    log(roots[b] + sigma[j] * roots[a] + shift[j])`` (principal branches,
    accumulated factor by factor) and the derivative matrix
    ``d/d roots[c]`` of that sum.
    """
    x = np.asarray(roots, dtype=np.complex128)
    m = x.size
    logs = np.zeros(m, dtype=np.complex128)
    jac = np.zeros((m, m), dtype=np.complex128)
    off = ~np.eye(m, dtype=bool)
    for s, c, e in zip(sigma, shift, expo):
        arg = x[:, None] + s * x[None, :] + c
        arg = np.where(off, arg, 1.0)
        inv = np.where(off, e / arg, 0.0)
        logs += np.where(off, e * np.log(arg), 0.0).sum(axis=1)
        jac += np.diag(inv.sum(axis=1)) + s * inv
    return logs, jac


def rational_terms_numpy(x, zeros, poles):
    """``sum log(x - zeros) - sum log(x - poles)`` and its derivative, per x."""
    x = np.asarray(x, dtype=np.complex128)
    dz = x[:, None] - np.asarray(zeros, dtype=np.complex128)[None, :]
    dp = x[:, None] - np.asarray(poles, dtype=np.complex128)[None, :]
    val = np.log(dz).sum(axis=1) - np.log(dp).sum(axis=1)
    der = (1.0 / dz).sum(axis=1) - (1.0 / dp).sum(axis=1)
    return val, der


def block_back_substitution_numpy(diag_blocks, upper, rhs_top, level, energy):
    """Downward recursion for an operator that is upper block-triangular in n.

    ``diag_blocks[n]`` is the 2x2 spin block at boson level ``n`` and
    ``upper[n, k]`` the 2x2 block coupling level ``n`` to ``k > n``.  The
    vector is fixed at ``level`` to ``rhs_top`` and every lower level solves
    ``(D_n - E) psi_n = -sum_{k>n} U_{n,k} psi_k``.
    """
    nlev = diag_blocks.shape[0]
    psi = np.zeros((nlev, 2), dtype=np.complex128)
    psi[level] = rhs_top
    eye = np.eye(2)
    for n in range(level - 1, -1, -1):
        rhs = np.zeros(2, dtype=np.complex128)
        for k in range(n + 1, level + 1):
            rhs -= upper[n, k] @ psi[k]
        psi[n] = np.linalg.solve(diag_blocks[n] - energy * eye, rhs)
    return psi


# ---------------------------------------------------------------------------
# numba versions

if HAVE_NUMBA:

    @njit(cache=True)
    def _pair_terms_nb(roots, sigma, shift, expo):
        m = roots.size
        logs = np.zeros(m, dtype=np.complex128)
        jac = np.zeros((m, m), dtype=np.complex128)
        for b in range(m):
            for a in range(m):
                if a == b:
                    continue
                for j in range(sigma.size):
                    arg = roots[b] + sigma[j] * roots[a] + shift[j]
                    logs[b] += expo[j] * np.log(arg)
                    inv = expo[j] / arg
                    jac[b, b] += inv
                    jac[b, a] += sigma[j] * inv
        return logs, jac

    @njit(cache=True)
    def _rational_terms_nb(x, zeros, poles):
        val = np.zeros(x.size, dtype=np.complex128)
        der = np.zeros(x.size, dtype=np.complex128)
        for i in range(x.size):
            for z in zeros:
                val[i] += np.log(x[i] - z)
                der[i] += 1.0 / (x[i] - z)
            for p in poles:
                val[i] -= np.log(x[i] - p)
                der[i] -= 1.0 / (x[i] - p)
        return val, der

    @njit(cache=True)
    def _block_back_substitution_nb(diag_blocks, upper, rhs_top, level, energy):
        nlev = diag_blocks.shape[0]
        psi = np.zeros((nlev, 2), dtype=np.complex128)
        psi[level] = rhs_top
        for n in range(level - 1, -1, -1):
            r0 = 0j
            r1 = 0j
            for k in range(n + 1, level + 1):
                r0 -= upper[n, k, 0, 0] * psi[k, 0] + upper[n, k, 0, 1] * psi[k, 1]
                r1 -= upper[n, k, 1, 0] * psi[k, 0] + upper[n, k, 1, 1] * psi[k, 1]
            a = diag_blocks[n, 0, 0] - energy
            b = diag_blocks[n, 0, 1]
            c = diag_blocks[n, 1, 0]
            d = diag_blocks[n, 1, 1] - energy
            det = a * d - b * c
            psi[n, 0] = (d * r0 - b * r1) / det
            psi[n, 1] = (a * r1 - c * r0) / det
        return psi


def _c(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.complex128))


def pair_terms(roots, sigma, shift, expo):
    if HAVE_NUMBA:
        return _pair_terms_nb(_c(roots), _c(sigma), _c(shift), _c(expo))
    return pair_terms_numpy(roots, sigma, shift, expo)


def rational_terms(x, zeros, poles):
    if HAVE_NUMBA:
        return _rational_terms_nb(_c(np.atleast_1d(x)), _c(zeros), _c(poles))
    return rational_terms_numpy(np.atleast_1d(x), zeros, poles)


def block_back_substitution(diag_blocks, upper, rhs_top, level, energy):
    if HAVE_NUMBA:
        return _block_back_substitution_nb(_c(diag_blocks), _c(upper), _c(rhs_top), int(level), complex(energy))
    return block_back_substitution_numpy(diag_blocks, upper, rhs_top, level, energy)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
