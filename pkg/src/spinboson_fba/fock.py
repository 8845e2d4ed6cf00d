"""Truncated boson (x) spin-1/2 operators and polynomials in the spectral parameter.

Basis convention: the spin index is the outer Kronecker factor and the
boson number the inner one, so the basis vector ``|n, s>`` sits at index
``s * N + n`` with ``s = 0`` for spin up and ``s = 1`` for spin down.
The creation operator is cut off hard, ``a^dag |N-1> = 0``; identities
involving ``[a, a^dag] = 1`` are therefore only exact on states whose boson
number stays below ``N - margin`` (the *edge-safe* subspace).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConfigurationError, DimensionError

SPIN_UP = 0
SPIN_DOWN = 1
DEFAULT_MARGIN = 4
MIN_TRUNCATION = 4

#: Scalar polynomials (quantum determinants, eigenvalue polynomials, Delta
#: factors) are plain numpy polynomials with complex coefficients.
ScalarPolynomial = Polynomial


def scalar_poly(coeffs) -> Polynomial:
    """Complex numpy polynomial from low-to-high coefficients, trimmed."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    return Polynomial(np.trim_zeros(c, "b") if np.any(c) else c[:1])


def poly_from_roots(roots, leading=1.0) -> Polynomial:
    p = Polynomial.fromroots(np.asarray(roots, dtype=complex)) if len(roots) else Polynomial([1.0 + 0j])
    return Polynomial(p.coef.astype(complex) * leading)


# ---------------------------------------------------------------------------
# elementary operators


def make_boson_ops(dim_boson: int):
    """Return ``(a, a_dag, n)`` as ``N x N`` arrays on the boson factor."""
    if int(dim_boson) != dim_boson or dim_boson < MIN_TRUNCATION:
        raise ConfigurationError(f"boson truncation must be an integer >= {MIN_TRUNCATION}, got {dim_boson}")
    a = np.diag(np.sqrt(np.arange(1, dim_boson, dtype=float)), 1).astype(complex)
    a_dag = a.T.copy()
    n = np.diag(np.arange(dim_boson, dtype=float)).astype(complex)
    return a, a_dag, n


def make_spin_ops():
    """Return ``(S^z, S^+, S^-, sigma^y)`` in the (up, down) basis."""
    sz = np.diag([0.5, -0.5]).astype(complex)
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = sp.T.copy()
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    return sz, sp, sm, sy


def tensor_embed(boson_op, spin_op) -> "FockSpinOperator":
    """Kronecker composite ``spin_op (x) boson_op`` on the joint space."""
    boson_op = np.asarray(boson_op, dtype=complex)
    spin_op = np.asarray(spin_op, dtype=complex)
    if boson_op.ndim != 2 or boson_op.shape[0] != boson_op.shape[1]:
        raise DimensionError(f"boson operator must be square, got {boson_op.shape}")
    if spin_op.shape != (2, 2):
        raise DimensionError(f"spin operator must be 2x2, got {spin_op.shape}")
    return FockSpinOperator(np.kron(spin_op, boson_op), boson_op.shape[0])


def boson_numbers(dim_boson: int) -> np.ndarray:
    """Boson number of every joint basis index."""
    return np.tile(np.arange(dim_boson), 2)


def edge_safe_mask(dim_boson: int, margin: int = DEFAULT_MARGIN) -> np.ndarray:
    if not 0 <= margin < dim_boson:
        raise ConfigurationError(f"margin must satisfy 0 <= margin < N_t, got {margin}")
    return boson_numbers(dim_boson) < dim_boson - margin


def edge_leak(v, margin: int = DEFAULT_MARGIN, dim_boson: int | None = None):
    """Fraction of ``|v|^2`` carried by the top ``margin`` boson levels.

    ``v`` may be a single state (1-d) or a matrix whose columns are states;
    in the latter case one weight per column is returned.
    """
    v = np.asarray(v)
    if dim_boson is None:
        dim_boson = v.shape[0] // 2
    if v.shape[0] != 2 * dim_boson:
        raise DimensionError(f"state length {v.shape[0]} does not match 2*N_t = {2 * dim_boson}")
    if not 0 <= margin < dim_boson:
        raise ConfigurationError(f"margin must satisfy 0 <= margin < N_t, got {margin}")
    edge = boson_numbers(dim_boson) >= dim_boson - margin
    w = np.abs(v) ** 2
    total = w.sum(axis=0)
    return w[edge].sum(axis=0) / total


def shift_bandwidth(matrix, dim_boson: int, tol: float = 0.0) -> int:
    """Largest ``|n' - n|`` over entries with magnitude above ``tol``."""
    rows, cols = np.nonzero(np.abs(matrix) > tol)
    if rows.size == 0:
        return 0
    nb = boson_numbers(dim_boson)
    return int(np.max(np.abs(nb[rows] - nb[cols])))


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class FockSpinOperator:
    """Dense complex matrix on the truncated boson (x) spin-1/2 space."""

    matrix: np.ndarray
    dim_boson: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2 * self.dim_boson, 2 * self.dim_boson):
            raise DimensionError(f"matrix shape {m.shape} != (2N_t, 2N_t) for N_t={self.dim_boson}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @cached_property
    def shift_bandwidth(self) -> int:
        return shift_bandwidth(self.matrix, self.dim_boson)

    @property
    def dim(self) -> int:
        return 2 * self.dim_boson

    def _check(self, other: "FockSpinOperator"):
        if other.dim_boson != self.dim_boson:
            raise DimensionError(f"truncations differ: {self.dim_boson} vs {other.dim_boson}")

    def __matmul__(self, other):
        if isinstance(other, FockSpinOperator):
            self._check(other)
            return FockSpinOperator(self.matrix @ other.matrix, self.dim_boson)
        return self.matrix @ np.asarray(other)

    def __add__(self, other):
        if isinstance(other, FockSpinOperator):
            self._check(other)
            return FockSpinOperator(self.matrix + other.matrix, self.dim_boson)
        return FockSpinOperator(self.matrix + other * np.eye(self.dim), self.dim_boson)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, scalar):
        return FockSpinOperator(self.matrix * scalar, self.dim_boson)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def commutator(self, other: "FockSpinOperator") -> "FockSpinOperator":
        return self @ other - other @ self

    def dagger(self) -> "FockSpinOperator":
        return FockSpinOperator(self.matrix.conj().T, self.dim_boson)

    def edge_safe_norm(self, margin: int = DEFAULT_MARGIN) -> float:
        """Max-norm of the columns acting on edge-safe states."""
        return edge_safe_residual(self.matrix, self.dim_boson, margin)


def edge_safe_residual(matrix, dim_boson: int, margin: int = DEFAULT_MARGIN) -> float:
    """Max absolute entry of ``matrix`` restricted to edge-safe input states.

    Every operator built here changes the boson number by a bounded amount,
    so an identity that is exact off the cutoff has vanishing columns for all
    inputs with ``n < N_t - margin`` once ``margin`` exceeds the total shift.
    """
    mask = edge_safe_mask(dim_boson, margin)
    m = np.asarray(matrix)
    if m.ndim == 2:
        return float(np.max(np.abs(m[:, mask]))) if m.size else 0.0
    return float(np.max(np.abs(m[..., mask])))


@dataclass(frozen=True)
class FockSpace:
    """Cached elementary operators for one truncation level.

    All attributes are full joint-space arrays (``2N x 2N``).
    """

    dim_boson: int
    margin: int = DEFAULT_MARGIN

    def __post_init__(self):
        make_boson_ops(self.dim_boson)  # validates N_t
        edge_safe_mask(self.dim_boson, self.margin)

    @property
    def dim(self) -> int:
        return 2 * self.dim_boson

    @cached_property
    def _ops(self):
        a, ad, n = make_boson_ops(self.dim_boson)
        sz, sp, sm, sy = make_spin_ops()
        ib, i2 = np.eye(self.dim_boson), np.eye(2)
        k = np.kron
        return dict(
            a=k(i2, a), ad=k(i2, ad), n=k(i2, n), sz=k(sz, ib), sp=k(sp, ib), sm=k(sm, ib),
            sy=k(sy, ib), eye=np.eye(self.dim, dtype=complex),
        )

    def __getattr__(self, name):
        if name.startswith("__") or name == "_ops":
            raise AttributeError(name)
        ops = self._ops
        if name in ops:
            return ops[name]
        raise AttributeError(name)

    @cached_property
    def safe(self) -> np.ndarray:
        return edge_safe_mask(self.dim_boson, self.margin)

    @cached_property
    def numbers(self) -> np.ndarray:
        return boson_numbers(self.dim_boson)

    @cached_property
    def charge(self) -> np.ndarray:
        """Eigenvalues of ``n - S^z`` on the basis."""
        return self.numbers - np.repeat([0.5, -0.5], self.dim_boson)

    def residual(self, matrix) -> float:
        return edge_safe_residual(matrix, self.dim_boson, self.margin)

    def leak(self, v):
        return edge_leak(v, self.margin, self.dim_boson)

    def basis_state(self, n: int, spin: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[spin * self.dim_boson + n] = 1.0
        return v


# ---------------------------------------------------------------------------
# polynomials with operator coefficients


def compose_linear(coeffs: np.ndarray, scale, offset) -> np.ndarray:
    """Coefficients of ``P(scale * x + offset)`` along axis 0."""
    coeffs = np.asarray(coeffs)
    k = coeffs.shape[0]
    out = np.zeros_like(coeffs, dtype=complex)
    for deg in range(k):
        for j in range(deg + 1):
            out[j] = out[j] + comb(deg, j) * scale**j * offset ** (deg - j) * coeffs[deg]
    return out


def _trim(coeffs: np.ndarray, tol: float = 0.0) -> np.ndarray:
    k = coeffs.shape[0]
    while k > 1 and np.max(np.abs(coeffs[k - 1])) <= tol:
        k -= 1
    return coeffs[:k]


def _horner(coeffs: np.ndarray, lam) -> np.ndarray:
    out = np.array(coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        out = out * lam + c
    return out


@dataclass(frozen=True, eq=False)
class OperatorPolynomial:
    """``sum_k coeffs[k] * lam**k`` with ``coeffs`` of shape ``(K, 2N, 2N)``."""

    coeffs: np.ndarray
    dim_boson: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.shape[1:] != (2 * self.dim_boson, 2 * self.dim_boson):
            raise DimensionError(f"coefficient shape {c.shape[1:]} does not match N_t={self.dim_boson}")
        object.__setattr__(self, "coeffs", _trim(c))

    @classmethod
    def constant(cls, op) -> "OperatorPolynomial":
        if isinstance(op, FockSpinOperator):
            return cls(op.matrix[None], op.dim_boson)
        op = np.asarray(op)
        return cls(op[None], op.shape[0] // 2)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def coefficient(self, k: int) -> FockSpinOperator:
        if k > self.degree:
            return FockSpinOperator(np.zeros_like(self.coeffs[0]), self.dim_boson)
        return FockSpinOperator(self.coeffs[k], self.dim_boson)

    def __call__(self, lam) -> FockSpinOperator:
        return FockSpinOperator(_horner(self.coeffs, lam), self.dim_boson)

    def _check(self, other):
        if other.dim_boson != self.dim_boson:
            raise DimensionError(f"truncations differ: {self.dim_boson} vs {other.dim_boson}")

    def __add__(self, other):
        self._check(other)
        k = max(self.coeffs.shape[0], other.coeffs.shape[0])
        out = np.zeros((k,) + self.coeffs.shape[1:], dtype=complex)
        out[: self.coeffs.shape[0]] += self.coeffs
        out[: other.coeffs.shape[0]] += other.coeffs
        return OperatorPolynomial(out, self.dim_boson)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            self._check(other)
            return OperatorPolynomial(cauchy_product(self.coeffs, other.coeffs), self.dim_boson)
        return OperatorPolynomial(self.coeffs * other, self.dim_boson)

    def __rmul__(self, scalar):
        return OperatorPolynomial(self.coeffs * scalar, self.dim_boson)

    def compose_linear(self, scale, offset) -> "OperatorPolynomial":
        return OperatorPolynomial(compose_linear(self.coeffs, scale, offset), self.dim_boson)

    def trim(self, tol: float) -> "OperatorPolynomial":
        return OperatorPolynomial(_trim(self.coeffs, tol), self.dim_boson)

    def commutator(self, other: "OperatorPolynomial", lam, mu) -> FockSpinOperator:
        """``[P(lam), Q(mu)]`` evaluated pointwise."""
        self._check(other)
        return self(lam).commutator(other(mu))


def cauchy_product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cauchy product of coefficient stacks; matrix order ``x @ y`` preserved.

    Works for any trailing shape understood by ``np.matmul``.
    """
    kx, ky = x.shape[0], y.shape[0]
    shape = np.broadcast_shapes(x.shape[1:-2], y.shape[1:-2]) + (x.shape[-2], y.shape[-1])
    out = np.zeros((kx + ky - 1,) + shape, dtype=complex)
    for i in range(kx):
        for j in range(ky):
            out[i + j] += x[i] @ y[j]
    return out


@dataclass(frozen=True, eq=False)
class AuxMatrix:
    """2x2 auxiliary-space matrix with operator-polynomial entries.

    ``coeffs`` has shape ``(K, 2, 2, D, D)``: power of lambda, the two
    auxiliary indices, then the quantum-space matrix.
    """

    coeffs: np.ndarray
    dim_boson: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 5 or c.shape[1:3] != (2, 2) or c.shape[3:] != (2 * self.dim_boson,) * 2:
            raise DimensionError(f"bad auxiliary-matrix coefficient shape {c.shape}")
        object.__setattr__(self, "coeffs", _trim(c))

    @classmethod
    def from_entries(cls, entries, dim_boson: int) -> "AuxMatrix":
        """Build from a nested 2x2 list of ``(K, D, D)`` coefficient stacks."""
        k = max(np.asarray(e).shape[0] for row in entries for e in row)
        d = 2 * dim_boson
        out = np.zeros((k, 2, 2, d, d), dtype=complex)
        for i in range(2):
            for j in range(2):
                e = np.asarray(entries[i][j], dtype=complex)
                out[: e.shape[0], i, j] = e
        return cls(out, dim_boson)

    @classmethod
    def scalar(cls, coeffs, dim_boson: int) -> "AuxMatrix":
        """Lift a c-number matrix polynomial, ``coeffs`` shape ``(K, 2, 2)``."""
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        eye = np.eye(2 * dim_boson)
        return cls(c[..., None, None] * eye, dim_boson)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def entry(self, i: int, j: int) -> OperatorPolynomial:
        return OperatorPolynomial(self.coeffs[:, i, j], self.dim_boson)

    def __call__(self, lam) -> np.ndarray:
        return _horner(self.coeffs, lam)

    def __matmul__(self, other: "AuxMatrix") -> "AuxMatrix":
        if other.dim_boson != self.dim_boson:
            raise DimensionError(f"truncations differ: {self.dim_boson} vs {other.dim_boson}")
        kx, ky = self.coeffs.shape[0], other.coeffs.shape[0]
        d = 2 * self.dim_boson
        out = np.zeros((kx + ky - 1, 2, 2, d, d), dtype=complex)
        for p in range(kx):
            for q in range(ky):
                x, y = self.coeffs[p], other.coeffs[q]
                for i in range(2):
                    for j in range(2):
                        out[p + q, i, j] += x[i, 0] @ y[0, j] + x[i, 1] @ y[1, j]
        return AuxMatrix(out, self.dim_boson)

    def compose_linear(self, scale, offset) -> "AuxMatrix":
        return AuxMatrix(compose_linear(self.coeffs, scale, offset), self.dim_boson)

    def aux_transpose(self) -> "AuxMatrix":
        return AuxMatrix(self.coeffs.transpose(0, 2, 1, 3, 4), self.dim_boson)

    def sigma_y_conjugate(self) -> "AuxMatrix":
        """``sigma^y M^t sigma^y`` = ``[[D, -B], [-C, A]]`` entrywise."""
        c = self.coeffs
        out = np.empty_like(c)
        out[:, 0, 0] = c[:, 1, 1]
        out[:, 0, 1] = -c[:, 0, 1]
        out[:, 1, 0] = -c[:, 1, 0]
        out[:, 1, 1] = c[:, 0, 0]
        return AuxMatrix(out, self.dim_boson)

    def trace(self) -> OperatorPolynomial:
        return OperatorPolynomial(self.coeffs[:, 0, 0] + self.coeffs[:, 1, 1], self.dim_boson)

    def similarity(self, s) -> "AuxMatrix":
        """Apply ``X -> s^{-1} X s`` to every quantum-space coefficient."""
        s = np.asarray(s)
        sinv = np.linalg.inv(s)
        return AuxMatrix(sinv @ self.coeffs @ s, self.dim_boson)
