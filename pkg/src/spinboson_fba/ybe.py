"""Rational R-matrix, boson and spin Lax operators, K-matrices and their checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, IdentityViolation, SingularityError
from .fock import DEFAULT_MARGIN, AuxMatrix, FockSpace, scalar_poly

#: Lax matrices are auxiliary 2x2 matrices of degree-1 operator polynomials.
LaxMatrix = AuxMatrix


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the boson and spin Lax operators plus truncation data."""

    eta: complex = 1.0
    z0: complex = 0.0
    z1: complex = 0.0
    beta_c: complex = 1.0
    gamma_c: complex = 1.0
    dim_boson: int = 24
    margin: int = DEFAULT_MARGIN

    def __post_init__(self):
        if self.eta == 0:
            raise ConfigurationError("eta must be nonzero")
        if self.beta_c * self.gamma_c == 0:
            raise ConfigurationError("beta_c * gamma_c must be nonzero")
        if int(self.dim_boson) != self.dim_boson or self.dim_boson < 8:
            raise ConfigurationError(f"dim_boson must be an integer >= 8, got {self.dim_boson}")
        if not 0 <= self.margin < self.dim_boson:
            raise ConfigurationError(f"margin must lie in [0, dim_boson), got {self.margin}")

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim_boson, self.margin)

    def replace(self, **kw) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **kw)


def r_matrix(lam, mu, eta) -> np.ndarray:
    den = lam - mu + eta
    if abs(den) < 1e-300:
        raise SingularityError(f"R-matrix pole at lam - mu = -eta (lam={lam}, mu={mu})")
    b = (lam - mu) / den
    c = eta / den
    return np.array(
        [[1, 0, 0, 0], [0, b, c, 0], [0, c, b, 0], [0, 0, 0, 1]],
        dtype=complex,
    )


def lax_boson(p: ModelParams, displacement=(0.0, 0.0)) -> LaxMatrix:
    """Boson Lax operator; ``displacement=(s, t)`` substitutes a -> a + s, a^dag -> a^dag + t."""
    sp = p.space
    s, t = displacement
    a = sp.a + s * sp.eye
    ad = sp.ad + t * sp.eye
    eye = sp.eye
    zero = np.zeros_like(eye)
    entries = [
        [np.stack([-p.eta * p.z1 * eye - p.eta * (ad @ a), eye]), np.stack([p.beta_c * ad])],
        [np.stack([p.gamma_c * a]), np.stack([-p.beta_c * p.gamma_c / p.eta * eye, zero])],
    ]
    return AuxMatrix.from_entries(entries, p.dim_boson)


def lax_spin(p: ModelParams) -> LaxMatrix:
    sp = p.space
    eye = sp.eye
    entries = [
        [np.stack([-p.eta * p.z0 * eye + p.eta * sp.sz, eye]), np.stack([p.eta * sp.sm])],
        [np.stack([p.eta * sp.sp]), np.stack([-p.eta * p.z0 * eye - p.eta * sp.sz, eye])],
    ]
    return AuxMatrix.from_entries(entries, p.dim_boson)


def bulk_monodromy(p: ModelParams, displacement=(0.0, 0.0)) -> AuxMatrix:
    return lax_boson(p, displacement) @ lax_spin(p)


def operator_qdet(m: AuxMatrix, eta):
    """``A(l+eta/2) D(l-eta/2) - B(l+eta/2) C(l-eta/2)`` as an operator polynomial."""
    up = m.compose_linear(1.0, eta / 2)
    dn = m.compose_linear(1.0, -eta / 2)
    return up.entry(0, 0) * dn.entry(1, 1) - up.entry(0, 1) * dn.entry(1, 0)


def scalar_part(coeffs, space: FockSpace, tol: float, what: str = "operator"):
    """Scalar c_k with ``coeffs[k] = c_k * Id`` on the edge-safe subspace.

    Raises :class:`IdentityViolation` when the remainder exceeds ``tol``
    relative to the largest scalar.
    """
    coeffs = np.asarray(coeffs)
    safe = space.safe
    diag = np.einsum("kii->ki", coeffs)[:, safe]
    scal = diag.mean(axis=1)
    dev = space.residual(coeffs - scal[:, None, None] * space.eye)
    scale = max(1.0, float(np.max(np.abs(scal))))
    if dev > tol * scale:
        raise IdentityViolation(f"{what} is not proportional to the identity", dev)
    return scal


def qdet_lax(L: LaxMatrix, p: ModelParams, tol: float = 1e-10):
    """Quantum determinant of a Lax (or monodromy) matrix as a scalar polynomial."""
    q = operator_qdet(L, p.eta)
    return scalar_poly(scalar_part(q.coeffs, p.space, tol, "quantum determinant"))


def qdet_boson_closed(p: ModelParams):
    return scalar_poly([p.beta_c * p.gamma_c / p.eta * (p.z1 - 0.5) * p.eta, -p.beta_c * p.gamma_c / p.eta])


def qdet_spin_closed(p: ModelParams):
    e, z = p.eta, p.z0
    return scalar_poly([(-e * z - e) * (-e * z + e), -2 * e * z, 1.0])


# ---------------------------------------------------------------------------
# RLL and reflection relations


def _aux_pair(lval: np.ndarray):
    """Embed an auxiliary 2x2 block operator into slots 1 and 2 of V(x)V(x)H."""
    d = lval.shape[-1]
    eye2 = np.eye(2)
    l1 = np.zeros((2, 2, 2, 2, d, d), dtype=complex)
    l2 = np.zeros_like(l1)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                l1[i, k, j, k] = lval[i, j]
                l2[k, i, k, j] = lval[i, j]
    shape = (4 * d, 4 * d)
    return (
        l1.transpose(0, 1, 4, 2, 3, 5).reshape(shape),
        l2.transpose(0, 1, 4, 2, 3, 5).reshape(shape),
    )


def check_rll(L: LaxMatrix, lam, lam2, p: ModelParams, full_space: bool = False) -> float:
    """Residual of ``R(l-l') L1(l) L2(l') - L2(l') L1(l) R(l-l')``."""
    d = 2 * p.dim_boson
    r = np.kron(r_matrix(lam, lam2, p.eta), np.eye(d))
    l1, _ = _aux_pair(L(lam))
    _, l2 = _aux_pair(L(lam2))
    diff = r @ l1 @ l2 - l2 @ l1 @ r
    if full_space:
        return float(np.max(np.abs(diff)))
    safe = np.tile(p.space.safe, 4)
    return float(np.max(np.abs(diff[:, safe])))


def _k1(k):
    return np.kron(k, np.eye(2))


def _k2(k):
    return np.kron(np.eye(2), k)


_P = np.eye(4)[[0, 2, 1, 3]]


def _r21(u, eta):
    return _P @ r_matrix(u, 0.0, eta) @ _P


def check_reflection(k, lam, lam2, eta, side: str = "minus") -> float:
    """Max-norm residual of the (dual) reflection equation for a c-number K.

    ``k`` is a callable returning a 2x2 matrix.  For ``side='plus'`` the
    transposed matrix ``K_+^t`` enters with the ``-2 eta`` shifted arguments.
    """
    def r12(u):
        return r_matrix(u, 0.0, eta)

    if side == "minus":
        ka, kb = k(lam), k(lam2)
        lhs = r12(lam - lam2) @ _k1(ka) @ _r21(lam + lam2, eta) @ _k2(kb)
        rhs = _k2(kb) @ r12(lam + lam2) @ _k1(ka) @ _r21(lam - lam2, eta)
    elif side == "plus":
        ka, kb = k(lam).T, k(lam2).T
        lhs = _r21(-lam + lam2, eta) @ _k1(ka) @ r12(-lam - lam2 - 2 * eta) @ _k2(kb)
        rhs = _k2(kb) @ _r21(-lam - lam2 - 2 * eta, eta) @ _k1(ka) @ r12(-lam + lam2)
    else:
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# boundary matrices


@dataclass(frozen=True)
class BoundarySide:
    """One K-matrix ``(1/xi) [[l + xi, 2 kappa e^theta l], [2 kappa e^-theta l, xi - l]]``.

    ``kappa = 0`` is the diagonal boundary (the ``beta -> infinity`` limit).
    """

    xi: complex
    kappa: complex = 0.0
    theta: complex = 0.0

    def __post_init__(self):
        if self.xi == 0:
            raise ConfigurationError("boundary xi must be nonzero")

    @classmethod
    def diagonal(cls, xi) -> "BoundarySide":
        return cls(xi, 0.0, 0.0)

    @property
    def is_diagonal(self) -> bool:
        return self.kappa == 0

    @property
    def beta(self) -> complex:
        """Principal branch of ``arcsinh(1 / (2 kappa))``; infinite when diagonal."""
        if self.is_diagonal:
            return complex(np.inf)
        return complex(np.arcsinh(1.0 / (2.0 * complex(self.kappa))))

    @property
    def sinh_beta(self) -> complex:
        return complex(np.inf) if self.is_diagonal else 1.0 / (2.0 * self.kappa)

    @property
    def cosh_beta(self) -> complex:
        return complex(np.inf) if self.is_diagonal else complex(np.cosh(self.beta))

    @property
    def tanh_beta(self) -> complex:
        return 1.0 + 0j if self.is_diagonal else complex(np.tanh(self.beta))

    @property
    def alpha(self) -> complex:
        """``xi / (2 kappa cosh beta)``, which tends to ``xi`` on the diagonal."""
        if self.is_diagonal:
            return complex(self.xi)
        return complex(self.xi / (2.0 * self.kappa * self.cosh_beta))

    @property
    def mu(self) -> complex:
        return 2 * self.kappa * np.exp(self.theta)

    @property
    def nu(self) -> complex:
        return 2 * self.kappa * np.exp(-self.theta)

    def coeffs(self, shift=0.0, scale=1.0) -> np.ndarray:
        """Coefficients ``(2, 2, 2)`` of ``scale * K(lam + shift)`` in powers of lam."""
        x = self.xi
        lin = np.array([[1, self.mu], [self.nu, -1]], dtype=complex) / x
        const = np.eye(2, dtype=complex) + shift * lin
        return scale * np.stack([const, lin])

    def __call__(self, lam) -> np.ndarray:
        c = self.coeffs()
        return c[0] + lam * c[1]

    def alt_form(self, lam) -> np.ndarray:
        """The (alpha, beta, theta) form of the same matrix."""
        sb, ab = self.sinh_beta, self.alpha * self.cosh_beta
        return np.array(
            [[lam * sb + ab, lam * np.exp(self.theta)], [lam * np.exp(-self.theta), -lam * sb + ab]]
        ) / ab


@dataclass(frozen=True)
class ReflectionParams:
    plus: BoundarySide
    minus: BoundarySide

    @property
    def is_diagonal(self) -> bool:
        return self.plus.is_diagonal and self.minus.is_diagonal

    def k_minus(self, lam) -> np.ndarray:
        return self.minus(lam)

    def k_plus(self, lam, eta) -> np.ndarray:
        """``K_+(lam) = K(lam + eta, +) / 2``."""
        return 0.5 * self.plus(lam + eta)
