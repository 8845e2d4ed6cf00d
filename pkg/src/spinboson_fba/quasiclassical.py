"""Quasi-classical (small eta) expansions of the transfer matrices.

Coefficients in eta are extracted numerically: the exact operator builders
are sampled on a ring in the complex eta plane and a discrete Fourier
transform gives the Laurent coefficients, cross-checked at a held-out eta.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize

from .errors import ConfigurationError, IdentityViolation, InterpolationError, SingularityError
from .fock import AuxMatrix, FockSpace, OperatorPolynomial
from .open_chain import OpenChain
from .spectral import biorthogonal_eigen
from .ybe import BoundarySide, ModelParams, ReflectionParams, bulk_monodromy

_Z = Polynomial([0.0, 1.0])


# ---------------------------------------------------------------------------
# eta expansion


@dataclass
class EtaExpansion:
    orders: dict
    k_min: int
    m_max: int
    holdout_error: float
    radius: float

    def __getitem__(self, j):
        return self.orders.get(j, np.zeros_like(next(iter(self.orders.values()))))

    def operator(self, j: int, dim_boson: int) -> OperatorPolynomial:
        return OperatorPolynomial(self[j], dim_boson)

    def lowest_nonscalar(self, space: FockSpace, tol: float = 1e-10) -> int:
        for j in sorted(self.orders):
            if _scalar_deviation(self.orders[j], space) > tol * max(1.0, _norm(self.orders[j], space)):
                return j
        raise IdentityViolation("every order is scalar", 0.0)

    def scalar_deviation(self, j: int, space: FockSpace) -> float:
        return _scalar_deviation(self[j], space)

    def evaluate(self, eta):
        return sum(c * eta**j for j, c in self.orders.items())


def _norm(c, space):
    c = np.asarray(c)
    s = space.safe
    return float(np.max(np.abs(c[..., :, s]))) if c.size else 0.0


def _scalar_deviation(c, space: FockSpace) -> float:
    c = np.asarray(c)
    if c.ndim == 2:
        c = c[None]
    safe = space.safe
    diag = np.einsum("kii->ki", c)[:, safe].mean(axis=1)
    return space.residual(c - diag[:, None, None] * space.eye)


def eta_expand(
    builder: Callable,
    k_min: int,
    samples: int = 32,
    radius: float = 0.3,
    holdout: complex | None = None,
    tol: float = 1e-8,
    trim: float = 1e-11,
) -> EtaExpansion:
    """Laurent coefficients of ``builder(eta)`` from ``k_min`` upward.

    ``builder`` returns an array (a matrix, or a stack of lambda
    coefficients).  The function ``eta**(-k_min) * builder(eta)`` is sampled
    at ``samples`` points on ``|eta| = radius``; orders whose norm falls
    below ``trim`` times the largest sample-level Fourier mode are dropped.  The reconstruction is
    checked at ``holdout`` (default inside the ring, off the sample rays).
    """
    ring = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = np.array([np.asarray(builder(e), dtype=complex) * e ** (-k_min) for e in ring])
    four = np.fft.fft(vals, axis=0) / samples
    orders = {}
    big = float(np.max(np.abs(four)))
    for j in range(samples):
        # noise sits at rounding level of the samples, before the radius rescaling
        if np.max(np.abs(four[j])) > trim * big:
            orders[j + k_min] = four[j] / radius**j
    if not orders:
        raise InterpolationError("builder vanishes identically on the sample ring")
    if max(orders) - k_min > samples // 2:
        raise InterpolationError("expansion does not terminate well inside the sample count; increase samples")
    h = 0.61 * radius * np.exp(0.37j) if holdout is None else holdout
    ref = np.asarray(builder(h), dtype=complex)
    rec = sum(c * h**j for j, c in orders.items())
    err = float(np.max(np.abs(rec - ref)) / max(np.max(np.abs(ref)), 1e-300))
    if err > tol:
        raise InterpolationError(f"held-out eta reconstruction error {err:.2e} exceeds {tol:.0e}")
    return EtaExpansion(orders, min(orders), max(orders), err, radius)


def _pad(c: np.ndarray, length: int) -> np.ndarray:
    if c.shape[0] >= length:
        return c[:length]
    return np.concatenate([c, np.zeros((length - c.shape[0],) + c.shape[1:], dtype=c.dtype)])


def raw_k(xi, mu, nu, shift=0.0, scale=1.0) -> np.ndarray:
    """Coefficients of ``scale * [[xi + l, l mu], [l nu, xi - l]]`` at ``l + shift``."""
    lin = np.array([[1, mu], [nu, -1]], dtype=complex)
    const = xi * np.eye(2, dtype=complex) + shift * lin
    return scale * np.stack([const, lin])


def open_transfer_raw(p: ModelParams, k_minus: np.ndarray, k_plus: np.ndarray) -> OperatorPolynomial:
    """``tr K_+(l - eta/2) U(l)`` with explicit K coefficient stacks.

    ``k_minus`` is the stack of ``K_-(l - eta/2)`` and ``k_plus`` that of
    ``K_+(l - eta/2)``.
    """
    e, n = p.eta, p.dim_boson
    t = bulk_monodromy(p)
    u = t.compose_linear(1.0, -e / 2) @ AuxMatrix.scalar(k_minus, n) @ t.compose_linear(-1.0, -e / 2).sigma_y_conjugate()
    return (AuxMatrix.scalar(k_plus, n) @ u).trace()


# ---------------------------------------------------------------------------
# diagonal open boundaries


@dataclass(frozen=True)
class QcDiagParams:
    """Diagonal open chain with ``z0 = 0``; the transfer matrix is normalized
    by ``eta^2 xi^+ xi^- / (beta gamma)``."""

    z1: float
    beta_c: float
    gamma_c: float
    xi_plus: complex
    xi_minus: complex
    dim_boson: int = 24
    margin: int = 4

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim_boson, self.margin)

    def builder(self, eta) -> np.ndarray:
        p = ModelParams(eta, 0.0, self.z1, self.beta_c, self.gamma_c, self.dim_boson, self.margin)
        r = ReflectionParams(BoundarySide.diagonal(self.xi_plus), BoundarySide.diagonal(self.xi_minus))
        t = OpenChain(p, r).transfer.coeffs
        norm = eta**2 * self.xi_plus * self.xi_minus / (self.beta_c * self.gamma_c)
        return _pad(t, 5) * norm

    def expand(self, **kw) -> EtaExpansion:
        return eta_expand(self.builder, 0, **kw)

    def tau1_closed(self) -> np.ndarray:
        """lambda coefficients of the scalar first order."""
        return np.array([0, 0, 0, 0, self.xi_plus + self.xi_minus], dtype=complex)

    def printed_tau2(self) -> OperatorPolynomial:
        sp = self.space
        xx = self.xi_plus * self.xi_minus
        c = np.zeros((5,) + sp.eye.shape, dtype=complex)
        c[4] = 2 * sp.sz - 2 * sp.n - (self.z1 + 1) * sp.eye
        c[2] = xx * (2 * sp.sz - self.z1 * sp.eye) + 2 * self.xi_minus * self.beta_c * sp.ad @ sp.sp
        return OperatorPolynomial(c, self.dim_boson)

    def printed_lambda2(self, k: int, branch: str) -> Polynomial:
        xx = self.xi_plus * self.xi_minus
        sgn = 1.0 if branch == "a" else -1.0
        return Polynomial([0, 0, -xx * (self.z1 + sgn), 0, -(2 * k + self.z1)])


@dataclass
class QcSector:
    k: int
    states: list
    polys: list
    leakage: float
    labels: list = field(default_factory=list)
    errors: list = field(default_factory=list)


def qc_diag_tau2_spectrum(q: QcDiagParams, k_max: int = 6, tau2: OperatorPolynomial | None = None, tol: float = 1e-9):
    """Blockwise eigenvalue polynomials of the second order in sectors ``n - S^z = k - 1/2``.

    Each eigenvalue is labelled by the printed closed form (``a``: ``z1 + 1``,
    ``b``: ``z1 - 1``) it matches.
    """
    sp = q.space
    if tau2 is None:
        tau2 = q.expand().operator(2, q.dim_boson)
    c = tau2.coeffs
    nb = sp.numbers
    spin = np.repeat([0.5, -0.5], q.dim_boson)
    charge = nb - spin
    out = []
    for k in range(k_max + 1):
        idx = np.nonzero(np.isclose(charge, k - 0.5) & sp.safe)[0]
        rest = np.nonzero(~np.isclose(charge, k - 0.5) & sp.safe)[0]
        leak = float(np.max(np.abs(c[:, rest][:, :, idx]), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(c[:, idx][:, :, idx]))))
        if leak > tol * scale:
            raise IdentityViolation(f"sector k={k} couples to other charges", leak)
        blk = c[:, idx][:, :, idx]
        lam0 = 0.37 + 0.21j
        eig = biorthogonal_eigen(sum(blk[j] * lam0**j for j in range(blk.shape[0])), warn=False)
        proj = np.einsum("ia,kij,jb->kab", eig.left.conj(), blk, eig.right)
        off = proj - np.einsum("kaa->ka", proj)[:, :, None] * np.eye(len(idx))
        if np.max(np.abs(off), initial=0.0) > tol * scale:
            raise IdentityViolation(f"sector k={k} block is not simultaneously diagonal", float(np.max(np.abs(off))))
        polys = [Polynomial(np.einsum("kaa->ka", proj)[:, a]) for a in range(len(idx))]
        states = [(int(nb[i]), "up" if spin[i] > 0 else "down") for i in idx]
        sec = QcSector(k, states, polys, leak)
        for poly in polys:
            best = min(
                ("a", "b"),
                key=lambda br: np.max(np.abs(_coef(poly, 5) - _coef(q.printed_lambda2(k, br), 5))),
            )
            sec.labels.append(best)
            sec.errors.append(float(np.max(np.abs(_coef(poly, 5) - _coef(q.printed_lambda2(k, best), 5)))))
        out.append(sec)
    return out


def _coef(p: Polynomial, n: int) -> np.ndarray:
    c = np.zeros(n, dtype=complex)
    c[: len(p.coef)] = p.coef[:n]
    return c


def qc_diag_q_check(k: int, branch: str, xx: complex, pairing: str = "consistent") -> Polynomial:
    """Residual polynomial (in ``z = lambda^2``) of the first-order ODE of a branch.

    ODE ``a``: ``z (z + xx) Q' - (k z + xx) Q = 0``; ODE ``b``: ``(z + xx) Q' - k Q = 0``.
    ``consistent`` pairs ODE ``a`` with ``z (z + xx)^(k-1)`` and ODE ``b`` with
    ``(z + xx)^k``; ``printed`` uses the opposite assignment of the two
    solutions.
    """
    if k < 0:
        raise ConfigurationError("k must be non-negative")
    base = _Z + xx
    sol_a = _Z * base ** (k - 1) if k >= 1 else None
    sol_b = base**k
    if pairing == "printed":
        sol_a, sol_b = sol_b, (_Z * base ** (k - 1) if k >= 1 else None)
    elif pairing != "consistent":
        raise ConfigurationError(f"unknown pairing {pairing!r}")
    if branch == "a":
        if sol_a is None:
            raise ConfigurationError("branch a has no state at k = 0")
        return _Z * base * sol_a.deriv() - (k * _Z + xx) * sol_a
    if branch == "b":
        if sol_b is None:
            raise ConfigurationError("branch b has no state at k = 0 in this pairing")
        return base * sol_b.deriv() - k * sol_b
    raise ConfigurationError(f"branch must be 'a' or 'b', got {branch!r}")


def qc_diag_exponents(k: int, xx: complex, branch: str):
    """Local exponents ``(at z = 0, at z = -xx)`` of the general solution of a branch ODE."""
    if xx == 0:
        raise SingularityError("xi^+ xi^- = 0 merges the singular points")
    if branch == "a":
        # (k z + xx) / (z (z + xx)) = 1/z + (k - 1)/(z + xx)
        return 1, k - 1
    return 0, k


# ---------------------------------------------------------------------------
# twisted chain: Gaudin limit


def gaudin_c1(U, V, X) -> complex:
    """``(X sqrt(U) + 2 (U - 1) sqrt(V)) / (sqrt(V) (V - U))``."""
    if U == V:
        raise SingularityError("U = V is a pole of the Gaudin coupling")
    if np.sign(U) != np.sign(V):
        raise ConfigurationError("U and V must have the same sign")
    su, sv = np.sqrt(complex(U)), np.sqrt(complex(V))
    return (X * su + 2 * (U - 1) * sv) / (sv * (V - U))


def qc_gaudin_twisted(roots, U, V, X) -> np.ndarray:
    """``1/2 + c1/2 l_k - l_k^2 - sum_{l != k} l_k / (l_k - l_l)`` per root."""
    c1 = gaudin_c1(U, V, X)
    x = np.asarray(roots, dtype=complex)
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    if np.min(np.abs(d), initial=np.inf) < 1e-12:
        raise SingularityError("coincident Gaudin roots")
    s = x[:, None] / d
    np.fill_diagonal(s, 0.0)
    return 0.5 + 0.5 * c1 * x - x**2 - s.sum(axis=1)


def gaudin_zeta(roots) -> complex:
    """``-Q'(0)/Q(0)`` for ``Q = prod(l - r)``, which is ``+sum 1/r``."""
    return complex(np.sum(1.0 / np.asarray(roots, dtype=complex)))


def printed_gaudin_zeta(roots) -> complex:
    """``-sum 1/r`` (opposite sign to ``-Q'(0)/Q(0)``)."""
    return -gaudin_zeta(roots)


def gaudin_ode_residual(q: Polynomial, zeta, M: int, c1, form: str = "derived") -> Polynomial:
    """Second-order ODE residual.

    ``derived``: ``l Q'' - (1 + c1 l - 2 l^2) Q' - (2 M l + zeta) Q``.
    ``printed``: ``l Q'' - (1 + c1 l + 2 l^2) Q' + (M l - zeta) Q``.
    """
    lam = Polynomial([0.0, 1.0])
    if form == "derived":
        return lam * q.deriv(2) - (1 + c1 * lam - 2 * lam**2) * q.deriv() - (2 * M * lam + zeta) * q
    if form == "printed":
        return lam * q.deriv(2) - (1 + c1 * lam + 2 * lam**2) * q.deriv() + (M * lam - zeta) * q
    raise ConfigurationError(f"unknown form {form!r}")


@dataclass
class GaudinState:
    roots: np.ndarray
    zeta: complex
    bethe_residual: float
    ode_residual: float


def gaudin_states(M: int, U, V, X, polish: bool = True) -> list[GaudinState]:
    """All degree-``M`` polynomial solutions of the derived ODE.

    The operator ``Q -> l Q'' - (1 + c1 l - 2 l^2) Q' - 2 M l Q`` preserves
    degree ``M``; its eigenpairs ``(zeta, Q)`` are the on-shell states.
    Roots are Newton-polished on the Bethe equations.
    """
    c1 = gaudin_c1(U, V, X)
    op = np.zeros((M + 1, M + 1), dtype=complex)
    for j in range(M + 1):
        e = np.zeros(M + 1)
        e[j] = 1.0
        q = Polynomial(e)
        lam = Polynomial([0.0, 1.0])
        img = lam * q.deriv(2) - (1 + c1 * lam - 2 * lam**2) * q.deriv() - 2 * M * lam * q
        c = np.zeros(M + 2, dtype=complex)
        c[: len(img.coef)] = img.coef
        if abs(c[M + 1]) > 1e-10:
            raise IdentityViolation("ODE operator does not preserve the degree", abs(c[M + 1]))
        op[:, j] = c[: M + 1]
    zetas, vecs = np.linalg.eig(op)
    out = []
    for a in range(M + 1):
        q = Polynomial(vecs[:, a] / vecs[M, a])
        roots = q.roots() if M else np.zeros(0, dtype=complex)
        if M and _degenerate_roots(roots):
            # a root at the origin or a double root: not a solution of the Bethe system
            continue
        if polish and M:
            roots = _gaudin_newton(roots, c1)
        qq = Polynomial([1.0 + 0j])
        for r in roots:
            qq = qq * Polynomial([-r, 1.0])
        z = gaudin_zeta(roots) if M else complex(zetas[a])
        res_b = float(np.max(np.abs(qc_gaudin_twisted(roots, U, V, X)), initial=0.0))
        ode = gaudin_ode_residual(qq, z, M, c1)
        out.append(GaudinState(np.sort_complex(roots), z, res_b, float(np.max(np.abs(ode.coef)))))
    return out


def _degenerate_roots(x, tol: float = 1e-7) -> bool:
    x = np.asarray(x)
    d = np.abs(x[:, None] - x[None, :]) + np.eye(len(x))
    return bool(np.min(np.abs(x)) < tol or np.min(d) < tol)


def _gaudin_newton(x, c1, iters: int = 30):
    x = np.asarray(x, dtype=complex).copy()
    for _ in range(iters):
        d = x[:, None] - x[None, :]
        np.fill_diagonal(d, 1.0)
        s = x[:, None] / d
        np.fill_diagonal(s, 0.0)
        f = 0.5 + 0.5 * c1 * x - x**2 - s.sum(axis=1)
        jac = -x[:, None] / d**2
        np.fill_diagonal(jac, 0.0)
        w = x[None, :] / d**2
        np.fill_diagonal(w, 0.0)
        jac[np.diag_indices_from(jac)] = 0.5 * c1 - 2 * x + w.sum(axis=1)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        x = x + step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(np.abs(x))):
            break
    return x


@dataclass(frozen=True)
class AmicoHikamiParams:
    U: float
    V: float
    X: float
    dim_boson: int = 24
    margin: int = 4

    def builder(self, eta) -> np.ndarray:
        U, V, X = self.U, self.V, self.X
        k = np.array(
            [[-U - V + np.sqrt(V / U) * X * eta, X * eta], [X * eta, -U - V + np.sqrt(U / V) * X * eta]],
            dtype=complex,
        )
        p = ModelParams(eta, 0.0, 1.0 / eta**2, 1.0, 1.0, self.dim_boson, self.margin)
        t = (AuxMatrix.scalar(k[None], self.dim_boson) @ bulk_monodromy(p)).trace()
        return _pad(t.coeffs, 3)

    def expand(self, **kw) -> EtaExpansion:
        kw.setdefault("radius", 0.2)
        return eta_expand(self.builder, -4, **kw)


# ---------------------------------------------------------------------------
# non-diagonal open boundaries


@dataclass(frozen=True)
class QcParamsNonDiag:
    """Scaled non-diagonal boundaries: ``mu^- = eta mu1``, ``nu^- = eta nu1``,
    ``xi^- = eta xi1m``, ``mu^+ = eta beta/gamma (mu1 + nu1)``, ``nu^+ = 0``,
    ``xi^+ = -beta^2/eta + xi0p + eta xi1p`` and ``z0 -> z0/eta``."""

    mu1: complex
    nu1: complex
    xi1m: complex
    xi0p: complex
    xi1p: complex
    z0: complex
    z1: complex
    beta_c: complex
    gamma_c: complex
    lam: complex = 0.6
    dim_boson: int = 24
    margin: int = 4

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim_boson, self.margin)

    def couplings(self, lam=None) -> dict:
        lam = self.lam if lam is None else lam
        b, z0 = self.beta_c, self.z0
        return {
            "omega0": 2 * (z0**2 - lam**2),
            "delta_sz": 2 * (lam**2 - b**2 * (self.xi1m - self.z1)),
            "delta_sx": -2 * b**2 * z0 * self.nu1,
            "g": 2 * b * z0,
            "alpha_drive": b / 2 * self.nu1 * (lam**2 - z0**2),
        }

    def displacement(self) -> complex:
        return self.beta_c * self.nu1 / 2

    def hamiltonian(self, lam=None, displaced: bool = False) -> np.ndarray:
        sp = self.space
        c = self.couplings(lam)
        a, ad = sp.a, sp.ad
        if displaced:
            d = self.displacement()
            a, ad = a + d * sp.eye, ad + d * sp.eye
        n = ad @ a
        return (
            c["omega0"] * n
            + c["delta_sz"] * sp.sz
            + 0.5 * c["delta_sx"] * (sp.sp + sp.sm)
            + c["g"] * (sp.sp @ ad + sp.sm @ a)
            + 2 * c["alpha_drive"] * (a + ad)
        )

    def hermiticity_residual(self) -> float:
        h = self.hamiltonian()
        return float(np.max(np.abs(h - h.conj().T)))

    def charge_residual(self) -> float:
        """Edge-safe ``[H', n - S^z]`` for the displaced hamiltonian."""
        sp = self.space
        h = self.hamiltonian(displaced=True)
        q = sp.n - sp.sz
        return sp.residual(h @ q - q @ h)

    def builder(self, eta) -> np.ndarray:
        b, g = self.beta_c, self.gamma_c
        p = ModelParams(eta, self.z0 / eta, self.z1, b, g, self.dim_boson, self.margin)
        km = raw_k(eta * self.xi1m, eta * self.mu1, eta * self.nu1, shift=-eta / 2)
        xip = -(b**2) / eta + self.xi0p + eta * self.xi1p
        kp = raw_k(xip, eta * b / g * (self.mu1 + self.nu1), 0.0, shift=eta / 2, scale=0.5)
        return _pad(open_transfer_raw(p, km, kp).coeffs, 7)

    def expand(self, **kw) -> EtaExpansion:
        return eta_expand(self.builder, -4, **kw)

    def hamiltonian_fit(self, expansion: EtaExpansion | None = None, lam=None):
        """Fit the first non-scalar order at ``lam`` to ``c H + d`` on edge-safe columns.

        Returns ``(order, c, d, residual)``; ``residual`` is relative to ``|c H|``.
        """
        lam = self.lam if lam is None else lam
        sp = self.space
        ex = self.expand() if expansion is None else expansion
        j = ex.lowest_nonscalar(sp)
        tau = ex.operator(j, self.dim_boson)(lam).matrix
        h = self.hamiltonian(lam)
        s = sp.safe
        basis = np.stack([h[:, s].ravel(), sp.eye[:, s].ravel()], 1)
        coef, *_ = np.linalg.lstsq(basis, tau[:, s].ravel(), rcond=None)
        res = float(np.max(np.abs(tau[:, s].ravel() - basis @ coef)))
        return j, complex(coef[0]), complex(coef[1]), res / max(abs(coef[0]) * np.max(np.abs(h[:, s])), 1e-300)


@dataclass(frozen=True)
class FuchsianData:
    """``H = 1/2 L_{-2} d^2 + R d + U`` with the printed polynomials (``omega = 1``).

    ``chi`` of the Gamma-function ansatz does not enter these polynomials; it
    is kept as an input for completeness.
    """

    q: QcParamsNonDiag
    chi: complex = 1.0

    @property
    def lam_m2(self) -> Polynomial:
        q = self.q
        b, g, z0 = q.beta_c, q.gamma_c, q.z0
        return -(b**3) * g * Polynomial([0, 0, -(z0**2), 0, 1.0])

    @property
    def r(self) -> Polynomial:
        q = self.q
        b, g, z0, z1, x1 = q.beta_c, q.gamma_c, q.z0, q.z1, q.xi1m
        inner = Polynomial([b**2 * z0**2 * (1 + 2 * z1 - 2 * x1), 0, -(2 * z0**2 + b**2 * (1 - 2 * z1 + 2 * x1)), 0, 2.0])
        return -b * g / 2 * Polynomial([0, 1.0]) * inner

    @property
    def u(self) -> Polynomial:
        q = self.q
        b, g, z0, z1 = q.beta_c, q.gamma_c, q.z0, q.z1
        x1m, x0p, x1p = q.xi1m, q.xi0p, q.xi1p
        mn = q.mu1 * q.nu1
        c4 = mn * b**2 + 2 * (z1 - x1m - x1p)
        c2 = b * g / 4 * (
            -4 * z0 * x0p + b**2 * (3 - 4 * x1m + 4 * z1 * (1 + x1m)) + 2 * z0**2 * (2 * z1 + mn * b**2 + 2 * (1 - x1m - x1p))
        )
        c0 = -(b**3) * g / 4 * z0**2 * (1 + 4 * z1 * x1m)
        return -b * g / 2 * Polynomial([c0, 0, c2, 0, c4])

    def apply(self, qt: Polynomial) -> Polynomial:
        return 0.5 * self.lam_m2 * qt.deriv(2) + self.r * qt.deriv() + self.u * qt

    def residual(self, qt: Polynomial, lam0_coeffs) -> Polynomial:
        l0, l1, l2 = lam0_coeffs
        return self.apply(qt) - Polynomial([l0, 0, l1, 0, l2]) * qt

    def residual_norm(self, qt: Polynomial, lam0_coeffs) -> float:
        return float(np.max(np.abs(self.residual(qt, lam0_coeffs).coef)))

    def constant_solution(self):
        """``Lambda_0`` for ``Q = 1``: the even coefficients of ``U``."""
        c = np.zeros(5, dtype=complex)
        c[: len(self.u.coef)] = self.u.coef
        return c[0], c[2], c[4]

    def quantize(self, M: int, starts: int = 24, seed: int = 0, tol: float = 1e-10):
        """Polynomial solutions ``Q`` of degree ``M`` with parity of ``M``.

        Solves the square system for the free coefficients of ``Q`` together
        with ``Lambda_0^(0)`` and ``Lambda_0^(1)``; ``Lambda_0^(2)`` follows
        from the top power.
        """
        if M == 0:
            return [(Polynomial([1.0 + 0j]), self.constant_solution())]
        free = list(range(M % 2, M, 2))
        lead_r = _coef(self.r, 6)[5]
        lead_u = _coef(self.u, 5)[4]
        l2 = lead_u + M * lead_r
        powers = list(range(M % 2, M + 3, 2))

        def unpack(z):
            c = z[: len(z) // 2] + 1j * z[len(z) // 2 :]
            qc = np.zeros(M + 1, dtype=complex)
            qc[M] = 1.0
            qc[free] = c[: len(free)]
            return Polynomial(qc), (c[-2], c[-1], l2)

        def fun(z):
            qt, lam0 = unpack(z)
            res = _coef(self.residual(qt, lam0), M + 5)[powers]
            return np.concatenate([res.real, res.imag])

        rng = np.random.default_rng(seed)
        sols = []
        n = len(free) + 2
        for _ in range(starts):
            z0 = rng.normal(size=2 * n) * 2
            sol = optimize.root(fun, z0, method="hybr", options={"xtol": 1e-14})
            qt, lam0 = unpack(sol.x)
            if self.residual_norm(qt, lam0) < tol * max(1.0, np.max(np.abs(qt.coef))):
                if not any(np.allclose(qt.coef, s.coef, atol=1e-8) for s, _ in sols):
                    sols.append((qt, lam0))
        return sols

    def u_with_product(self, mu1, nu1) -> Polynomial:
        return FuchsianData(replace(self.q, mu1=mu1, nu1=nu1), self.chi).u
