"""Open spin-boson chain: double-row transfer matrix, B-operator zeros, TQ relations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial

from . import _kernels
from .errors import (
    ConfigurationError,
    DecompositionError,
    DegeneracyError,
    DegeneracyWarning,
    IdentityViolation,
)
from .fock import AuxMatrix, OperatorPolynomial, poly_from_roots
from .spectral import BetheSystem
from .ybe import ModelParams, ReflectionParams, bulk_monodromy, qdet_lax, scalar_part

_LAM = Polynomial([0.0, 1.0])


@dataclass(frozen=True)
class OpenLattice:
    delta_s: complex
    delta_b: complex
    x_s_minus: complex
    x_s_plus: complex
    x_b: np.ndarray


@dataclass
class BSymm:
    """Even part of ``B`` split into operator coefficients.

    ``leading`` is the measured scalar ``B_4``; ``printed_prefactor`` is the
    closed-form zero-expansion prefactor for comparison.
    """

    leading: complex
    b4: np.ndarray
    b2: np.ndarray
    b0: np.ndarray
    b1_op: np.ndarray
    b2_op: np.ndarray
    printed_prefactor: complex
    parity_residual: float
    remainder: float


@dataclass
class BSpectrumEntry:
    m: int
    branch: int
    energy: complex
    closed_form: complex
    vector: np.ndarray
    residual: float
    top_ratio: complex | None = None


class OpenChain:
    """``U(l) = T(l - eta/2) K_-(l - eta/2) sigma^y T^t(-l - eta/2) sigma^y`` and
    ``t(l) = tr K_+(l - eta/2) U(l)`` with ``K_+(l) = K(l + eta, +) / 2``."""

    def __init__(self, p: ModelParams, r: ReflectionParams):
        self.p = p
        self.r = r

    # -- construction -----------------------------------------------------

    @cached_property
    def bulk(self) -> AuxMatrix:
        return bulk_monodromy(self.p)

    @cached_property
    def u_matrix(self) -> AuxMatrix:
        e, n = self.p.eta, self.p.dim_boson
        t = self.bulk
        km = AuxMatrix.scalar(self.r.minus.coeffs(shift=-e / 2), n)
        return t.compose_linear(1.0, -e / 2) @ km @ t.compose_linear(-1.0, -e / 2).sigma_y_conjugate()

    @cached_property
    def transfer(self) -> OperatorPolynomial:
        e, n = self.p.eta, self.p.dim_boson
        kp = AuxMatrix.scalar(self.r.plus.coeffs(shift=e / 2, scale=0.5), n)
        return (kp @ self.u_matrix).trace()

    def transfer_at(self, lam) -> np.ndarray:
        return self.transfer(lam).matrix

    def commutator_residual(self, lam, mu) -> float:
        a, b = self.transfer_at(lam), self.transfer_at(mu)
        return self.p.space.residual(a @ b - b @ a)

    def b_commutator_residual(self, lam, mu) -> float:
        b = self.u_matrix.entry(0, 1)
        x, y = b(lam).matrix, b(mu).matrix
        return self.p.space.residual(x @ y - y @ x)

    # -- asymptotics ---------------------------------------------------------

    def leading_coefficient(self, tol: float = 1e-10) -> complex:
        """Scalar lambda^6 coefficient of the transfer matrix (0 if absent)."""
        c = self.transfer.coeffs
        if c.shape[0] < 7:
            return 0j
        return complex(scalar_part(c[6:7], self.p.space, tol, "lambda^6 coefficient")[0])

    def printed_asymptotic(self) -> complex:
        pl, mi = self.r.plus, self.r.minus
        if pl.is_diagonal or mi.is_diagonal:
            return 0j
        return 2 * np.exp(-pl.theta) * np.exp(mi.theta) / (pl.alpha * mi.alpha * pl.cosh_beta * mi.cosh_beta)

    def derived_asymptotic(self) -> complex:
        """Closed form of the measured lambda^6 coefficient."""
        return self.printed_asymptotic() / 4

    # -- B operator ----------------------------------------------------------

    def b_symm_decompose(self, tol: float = 1e-10) -> BSymm:
        mi, pl = self.r.minus, self.r.plus
        if mi.is_diagonal:
            raise DegeneracyError("diagonal K_-: B has no lambda^4 operator zeros to separate")
        e = self.p.eta
        sp = self.p.space
        bc = self.u_matrix.entry(0, 1).coeffs
        deg = bc.shape[0] - 1
        # synthetic division by (2 lam - eta)
        q = np.zeros((deg,) + bc.shape[1:], dtype=complex)
        rem = bc.copy()
        for k in range(deg, 0, -1):
            q[k - 1] = rem[k] / 2
            rem[k] = rem[k] - 2 * q[k - 1]
            rem[k - 1] = rem[k - 1] + e * q[k - 1]
        remainder = sp.residual(rem[0])
        pref = -mi.tanh_beta / mi.alpha
        sym = q / pref
        if sym.shape[0] < 5:
            raise DecompositionError("B_symm has degree below 4")
        scale = max(1.0, np.max(np.abs(sym[:, :, sp.safe])))
        parity = max(sp.residual(sym[1]), sp.residual(sym[3])) / scale
        b4 = sym[4]
        lead = complex(np.mean(np.diag(b4)[sp.safe]))
        if sp.residual(b4 - lead * sp.eye) > tol * max(1.0, abs(lead)) or abs(lead) < 1e-14:
            raise DecompositionError("B_4 is not a nonzero multiple of the identity")
        printed = (mi.sinh_beta - np.sinh(mi.theta - pl.theta - pl.beta)) / (2 * mi.sinh_beta * pl.cosh_beta)
        return BSymm(lead, b4, sym[2], sym[0], -sym[2] / lead, sym[0] / lead, printed, parity, remainder)

    def b_daggers(self):
        """``(b1^dag, b2^dag)``; the dagger is the plain transpose so complex
        parameters keep the same spectrum."""
        bs = self.b_symm_decompose()
        return bs.b1_op.T, bs.b2_op.T

    def b_spectrum_recurrence(self, m_max: int | None = None, which: str = "b1"):
        """Terminating eigenvectors of ``b^dag`` built by downward recursion.

        For each top boson level ``m`` both branches are constructed: branch 1
        ends in ``psi_{m, down} = 0``, branch 2 in the kernel vector of the
        level-``m`` spin block for the second eigenvalue.
        """
        p = self.p
        ds, db = p.z0 + 0.5, p.z1 + 0.5
        if abs(ds) < 1e-12:
            raise DegeneracyError("delta_s = 0 (z0 = -1/2) makes the b spectra massively degenerate")
        n = p.dim_boson
        m_max = n - p.margin - 1 if m_max is None else m_max
        if m_max > n - p.margin - 1:
            raise ConfigurationError(f"m_max={m_max} reaches into the truncation edge")
        b1d, b2d = self.b_daggers()
        op = b1d if which == "b1" else b2d
        blocks = op.reshape(2, n, 2, n).transpose(1, 3, 0, 2)  # [n_row, n_col, s_row, s_col]
        lower = np.max(np.abs(np.tril(np.abs(blocks).max(axis=(2, 3)), -1))[: n - p.margin, : n - p.margin])
        if lower > 1e-9 * max(1.0, np.max(np.abs(op))):
            raise DecompositionError("b^dag is not upper triangular in the boson number")
        diag = np.array([blocks[k, k] for k in range(n)])
        e = p.eta
        out = []
        mi = self.r.minus
        for m in range(m_max + 1):
            dm = diag[m]
            for branch in (1, 2):
                energy = dm[0, 0] if branch == 1 else dm[1, 1]
                if branch == 1:
                    top = np.array([1.0, 0.0], dtype=complex)
                    ratio = None
                else:
                    gap = dm[1, 1] - dm[0, 0]
                    if abs(gap) < 1e-12:
                        warnings.warn(f"degenerate spin block at m={m}", DegeneracyWarning, stacklevel=2)
                        continue
                    ratio = dm[0, 1] / gap
                    top = np.array([ratio, 1.0], dtype=complex)
                gaps = [min(abs(np.linalg.eigvals(diag[k]) - energy)) for k in range(m)]
                if gaps and min(gaps) < 1e-10:
                    warnings.warn(f"accidental degeneracy below level m={m}", DegeneracyWarning, stacklevel=2)
                    continue
                psi = _kernels.block_back_substitution(diag, blocks, top, m, energy)
                vec = np.concatenate([psi[:, 0], psi[:, 1]])
                res = float(np.linalg.norm(op @ vec - energy * vec) / np.linalg.norm(vec))
                sgn = -0.5 if branch == 1 else 0.5
                if which == "b1":
                    closed = e**2 * ((db + m) ** 2 + (ds + sgn) ** 2)
                else:
                    closed = e**4 * (db + m) ** 2 * (ds + sgn) ** 2
                out.append(BSpectrumEntry(m, branch, complex(energy), complex(closed), vec, res, ratio))
        return out

    def printed_branch_ratio(self) -> complex:
        """``psi_up / psi_down`` at the top level of branch 2, read with the minus-side
        boundary parameters."""
        mi, p = self.r.minus, self.p
        ds = p.z0 + 0.5
        return np.exp(-mi.theta) * (ds - mi.xi / p.eta) / (2 * mi.kappa * ds)

    def open_lattice(self, count: int | None = None, check: bool = True) -> OpenLattice:
        p, e = self.p, self.p.eta
        count = p.dim_boson - p.margin if count is None else count
        ds, db = p.z0 + 0.5, p.z1 + 0.5
        lat = OpenLattice(ds, db, e * (ds - 0.5), e * (ds + 0.5), e * (db + np.arange(count)))
        if check and not self.r.minus.is_diagonal:
            nsafe = p.dim_boson - p.margin
            b1d, b2d = self.b_daggers()
            s = p.space.safe
            ev1 = np.linalg.eigvals(b1d[np.ix_(s, s)])
            ev2 = np.linalg.eigvals(b2d[np.ix_(s, s)])
            xb2 = lat.x_b[:nsafe] ** 2
            xs2 = np.array([lat.x_s_minus, lat.x_s_plus]) ** 2
            want1 = (xb2[:, None] + xs2[None, :]).ravel()
            want2 = (xb2[:, None] * xs2[None, :]).ravel()
            from .twisted import _set_distance

            for got, want, name in ((ev1, want1, "b1"), (ev2, want2, "b2")):
                dev = _set_distance(got, want)
                if dev > 1e-8 * max(1.0, np.max(np.abs(want))):
                    raise IdentityViolation(f"{name} spectrum inconsistent with the lattice pairing", dev)
        return lat

    # -- quantum determinant ------------------------------------------------

    def qdet_u(self, tol: float = 1e-8) -> Polynomial:
        """``A(l+eta/2) Dt(l-eta/2) - B(l+eta/2) Ct(l-eta/2)`` with ``Dt = 2 l D - eta A``
        and ``Ct = (2 l + eta) C``; scalar on the edge-safe subspace."""
        e, n = self.p.eta, self.p.dim_boson
        u = self.u_matrix
        eye = self.p.space.eye
        lam = OperatorPolynomial(np.stack([0 * eye, eye]), n)
        a, b, c, d = u.entry(0, 0), u.entry(0, 1), u.entry(1, 0), u.entry(1, 1)
        dt = lam * d * 2 - a * e
        ct = c * (lam * 2 + OperatorPolynomial(e * eye, n))
        q = a.compose_linear(1, e / 2) * dt.compose_linear(1, -e / 2) - b.compose_linear(1, e / 2) * ct.compose_linear(1, -e / 2)
        return Polynomial(scalar_part(q.coeffs, self.p.space, tol, "open quantum determinant"))

    def deltas(self):
        """``(Delta^+, Delta^-)`` as printed (sextic and quintic)."""
        p, e = self.p, self.p.eta
        am = self.r.minus.alpha
        ds, db = p.z0 + 0.5, p.z1 + 0.5
        bg = p.beta_c * p.gamma_c
        dm = poly_from_roots([e / 2 - am, e * (ds - 0.5), -e * (ds + 0.5), db * e], bg / (e * am))
        dp = poly_from_roots([e / 2, am - e / 2, e * (ds + 0.5), -e * (ds - 0.5), -db * e], 2 * bg / (e * am))
        return dp, dm

    def qdet_factorization_open(self, npts: int = 7, tol: float = 1e-9, seed: int = 0):
        """Printed Delta pair, verified against the operator quantum determinant."""
        dp, dm = self.deltas()
        q = self.qdet_u()
        rng = np.random.default_rng(seed)
        xs = rng.normal(size=npts) + 1j * rng.normal(size=npts)
        e = self.p.eta
        lhs = dp(xs - e / 2) * dm(xs + e / 2)
        rel = float(np.max(np.abs(lhs - q(xs)) / np.abs(q(xs))))
        if rel > tol:
            raise IdentityViolation("Delta^+ Delta^- does not reproduce Det_q U", rel)
        return dp, dm, rel

    def boundary_zeros(self):
        """``(Delta^+(x_s^+), Delta^-(x_s^-), Delta^-(x_b^0))``."""
        dp, dm = self.deltas()
        lat = self.open_lattice(check=False)
        return dp(lat.x_s_plus), dm(lat.x_s_minus), dm(lat.x_b[0])

    @cached_property
    def qdet_bulk(self) -> Polynomial:
        return qdet_lax(self.bulk, self.p)

    def qdet_constraint(self, lam_poly) -> float:
        """Relative ``|Lambda(eta/2) - Det_q T(-eta/2)|``."""
        e = self.p.eta
        ref = self.qdet_bulk(-e / 2)
        return float(abs(Polynomial(lam_poly.coef)(e / 2) - ref) / max(abs(ref), 1e-300))

    # -- TQ relations -----------------------------------------------------------

    def delta_bar_minus_numerator(self) -> Polynomial:
        """``lam * DeltaBar^-(lam)``."""
        p, e = self.p, self.p.eta
        ap, am = self.r.plus.alpha, self.r.minus.alpha
        ds, db = p.z0 + 0.5, p.z1 + 0.5
        lead = p.beta_c * p.gamma_c / (2 * e * ap * am)
        roots = [-e / 2, e / 2 - ap, e / 2 - am, -e * (ds + 0.5), e * (ds - 0.5), e * db]
        return poly_from_roots(roots, lead)

    def delta_bar(self, lam, sign: int):
        num = self.delta_bar_minus_numerator()
        x = lam if sign < 0 else -lam
        return num(x) / x

    def delta_bar_leading(self) -> complex:
        """Leading (lambda^5) coefficient of ``DeltaBar^+``."""
        return -self.delta_bar_minus_numerator().coef[-1]

    def tq_lattice_residual(self, lam_poly, q, n_max: int | None = None) -> dict:
        """Residuals of the lattice TQ relation at ``x_s^+-`` and ``x_b^n``.

        ``q`` maps lattice arguments to values (callable or dict keyed by
        rounded argument).  The coefficient of ``Q(x - eta)`` is
        ``(x + eta/2)(x + alpha^+ - eta/2)/(2 x alpha^+) Delta^-(x)`` and that of
        ``Q(x + eta)`` is ``-(x - alpha^+ + eta/2)/(4 x alpha^+) Delta^+(x)``.
        """
        e = self.p.eta
        ap = self.r.plus.alpha
        dp, dm = self.deltas()
        lat = self.open_lattice(check=False)
        n_max = len(lat.x_b) - 2 if n_max is None else n_max
        get = _lookup(q)
        lam = Polynomial(np.asarray(lam_poly.coef))

        def rel(x):
            cm = (x + e / 2) * (x + ap - e / 2) / (2 * x * ap) * dm(x)
            cp = -(x - ap + e / 2) / (4 * x * ap) * dp(x)
            lhs = lam(x) * get(x)
            rhs = (cm * get(x - e) if cm != 0 else 0) + (cp * get(x + e) if cp != 0 else 0)
            return complex(lhs - rhs)

        out = {"s_plus": rel(lat.x_s_plus), "s_minus": rel(lat.x_s_minus)}
        out["b"] = np.array([rel(x) for x in lat.x_b[: n_max + 1]])
        return out

    def diagonal_bethe_system(self, form: str = "derived") -> BetheSystem:
        """Bethe equations from pole cancellation in the even-Q TQ relation.

        ``derived``: ``prod_5 (x + a_i)/(x - a_i) = -prod'``.  ``printed``
        includes the extra factor ``(x + eta/2)/(x - eta/2)``.
        """
        a = self._bethe_shifts(form)
        return BetheSystem(
            scale=-1.0,
            zeros=-a,
            poles=a,
            sigma=np.array([-1, -1, 1, 1], dtype=complex),
            shift=np.array([self.p.eta, -self.p.eta, self.p.eta, -self.p.eta], dtype=complex),
            expo=np.array([-1, 1, -1, 1], dtype=complex),
            variant=f"open-diagonal-{form}",
            symmetric=True,
        )

    def _bethe_shifts(self, form: str) -> np.ndarray:
        p, e = self.p, self.p.eta
        ap, am = self.r.plus.alpha, self.r.minus.alpha
        ds, db = p.z0 + 0.5, p.z1 + 0.5
        a = [ap - e / 2, am - e / 2, e * (ds + 0.5), -e * (ds - 0.5), -e * db]
        if form == "printed":
            a = [e / 2] + a
        elif form != "derived":
            raise ValueError(f"unknown form {form!r}")
        return np.asarray(a, dtype=complex)

    def diagonal_bethe_residual(self, roots, form: str = "derived") -> np.ndarray:
        return self.diagonal_bethe_system(form).residual(roots)

    def even_q_from_eigenvalue(self, lam_poly, M: int, npts: int = 40):
        """Least-singular even ``Q`` of degree ``2M`` solving the TQ relation for a
        given ``Lambda``; returns ``(Q, relative singular value)``."""
        e = self.p.eta
        xs = np.linspace(-1.3, 1.7, npts) + 0.3j
        num = self.delta_bar_minus_numerator()
        lam = Polynomial(lam_poly.coef)
        cols = []
        for j in range(M + 1):
            cols.append(xs * lam(xs) * xs ** (2 * j) - num(xs) * (xs - e) ** (2 * j) + num(-xs) * (xs + e) ** (2 * j))
        a = np.array(cols).T
        _, s, vh = np.linalg.svd(a)
        c = vh[-1].conj()
        coef = np.zeros(2 * M + 1, dtype=complex)
        coef[::2] = c / c[-1]
        return Polynomial(coef), float(s[-1] / s[0])

    def diagonal_eigenvalue_from_roots(self, roots):
        """``Lambda`` from even ``Q = prod(l^2 - r^2)``, with the division remainder."""
        e = self.p.eta
        q = Polynomial([1.0 + 0j])
        for r in roots:
            q = q * Polynomial([-r * r, 0, 1])
        num = self.delta_bar_minus_numerator()
        top = num * q(_LAM - e) - num(-_LAM) * q(_LAM + e)
        quo, rem = divmod(top, _LAM * q)
        return quo, float(np.max(np.abs(rem.coef)) / max(np.max(np.abs(top.coef)), 1e-300))


@dataclass(frozen=True)
class ModifiedFactorization:
    """``Q = F(l/eta) Qt(l)`` with ``F(z+1) = p(z) F(z)``.

    ``minus2``: ``p(u) = p_inf u eta + chi`` (deg Dt^- = deg Dt^+ - 2);
    ``plus2``: ``p(u) = 1 / (p_inf u eta + chi + p_inf)``.
    The Gamma functions in ``F`` are never evaluated; only ``p`` enters.
    """

    chain: OpenChain
    variant: str
    p_inf: complex
    chi: complex

    def __post_init__(self):
        if self.variant not in ("minus2", "plus2"):
            raise ConfigurationError(f"variant must be 'minus2' or 'plus2', got {self.variant!r}")
        if self.p_inf == 0:
            raise ConfigurationError("p_inf must be nonzero (use the diagonal equations for the limit)")

    @property
    def zeta(self) -> complex:
        return self.chi / (self.p_inf * self.chain.p.eta)

    def p(self, u):
        e = self.chain.p.eta
        if self.variant == "minus2":
            return self.p_inf * u * e + self.chi
        return 1.0 / (self.p_inf * u * e + self.chi + self.p_inf)

    def delta_tilde(self, lam, sign: int):
        e = self.chain.p.eta
        if sign > 0:
            return self.chain.delta_bar(lam, +1) * self.p(lam / e)
        return self.chain.delta_bar(lam, -1) / self.p(lam / e - 1)

    def telescoping_residual(self, xs) -> float:
        e = self.chain.p.eta
        xs = np.asarray(xs, dtype=complex)
        lhs = self.delta_tilde(xs - e / 2, +1) * self.delta_tilde(xs + e / 2, -1)
        rhs = self.chain.delta_bar(xs - e / 2, +1) * self.chain.delta_bar(xs + e / 2, -1)
        return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))

    def degrees(self) -> tuple[int, int]:
        """Asymptotic degrees ``(deg Dt^+, deg Dt^-)``."""
        return (6, 4) if self.variant == "minus2" else (4, 6)

    def leading_lambda6(self) -> complex:
        """lambda^6 coefficient of ``Lambda`` implied by the dominant Dt term."""
        lead_plus = self.chain.delta_bar_leading()
        if self.variant == "minus2":
            return lead_plus * self.p_inf
        return -lead_plus * self.p_inf

    def asymptotic_mismatch(self, a6: complex) -> float:
        return float(abs(self.leading_lambda6() - a6) / max(abs(a6), 1e-300))

    def constraint_residual(self, roots, lam_func) -> complex:
        """``-p_inf eta Lambda(u) Qt(u) - Dt^-(u) Qt(u - eta)`` at ``u = -chi / p_inf``."""
        e = self.chain.p.eta
        u = -self.chi / self.p_inf
        qt = _q_even(roots)
        return complex(-self.p_inf * e * lam_func(u) * qt(u) - self.delta_tilde(u, -1) * qt(u - e))

    def eigenvalue(self, roots, lam):
        """``Lambda`` from the modified TQ relation."""
        e = self.chain.p.eta
        qt = _q_even(roots)
        lam = np.asarray(lam, dtype=complex)
        return (self.delta_tilde(lam, +1) * qt(lam + e) + self.delta_tilde(lam, -1) * qt(lam - e)) / qt(lam)


def printed_p_inf(chain: OpenChain, variant: str = "minus2") -> complex:
    p, pl, mi = chain.p, chain.r.plus, chain.r.minus
    val = 4 * p.eta * np.exp(mi.theta - pl.theta) / (p.beta_c * p.gamma_c * pl.cosh_beta * mi.cosh_beta)
    return -val if variant == "minus2" else val


def conjectured_bethe_residual(chain: OpenChain, roots, p_inf, zeta, chi=None, form: str = "derived"):
    """Residuals ``ratio - 1`` of the two-parameter Bethe system.

    ``derived`` follows from pole cancellation in the modified TQ relation:
    ``prod_5 (x + a_i)/(x - a_i) = -p_inf^2 (x + zeta eta)(x + (zeta - 1) eta) prod'``.
    ``printed`` carries the extra ``(x + eta/2)/(x - eta/2)`` on the left.
    ``p_inf * zeta`` is formed before multiplying by ``x`` so the diagonal
    limit ``p_inf -> 0`` stays well conditioned.
    """
    e = chain.p.eta
    roots = np.asarray(roots, dtype=complex)
    a = chain._bethe_shifts(form)
    pz = p_inf * zeta
    out = np.empty(roots.size, dtype=complex)
    for b, x in enumerate(roots):
        lhs = np.prod((x + a) / (x - a))
        rhs = -(p_inf * x + pz * e) * (p_inf * x + pz * e - p_inf * e)
        for c, y in enumerate(roots):
            if c != b:
                rhs *= (x - y + e) / (x - y - e) * (x + y + e) / (x + y - e)
        out[b] = lhs / rhs - 1.0
    return out


def diagonal_limit_path(k: int, chi_offset: float = 1.0):
    """Point ``k`` of the path ``p_inf = 10^-k``, ``chi = 1 + chi_offset p_inf``,
    ``zeta = chi / (p_inf eta)`` (eta supplied by the caller)."""
    p_inf = 10.0 ** (-k)
    return p_inf, 1.0 + chi_offset * p_inf


def _q_even(roots):
    q = Polynomial([1.0 + 0j])
    for r in np.asarray(roots, dtype=complex):
        q = q * Polynomial([-r * r, 0, 1])
    return q


def _lookup(q):
    if callable(q):
        return q
    table = {(round(complex(k).real, 9), round(complex(k).imag, 9)): v for k, v in q.items()}

    def get(x):
        key = (round(complex(x).real, 9), round(complex(x).imag, 9))
        if key not in table:
            raise ConfigurationError(f"missing Q value at lattice point {x}")
        return table[key]

    return get

