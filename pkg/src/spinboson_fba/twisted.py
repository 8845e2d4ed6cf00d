"""Twisted (quasi-periodic) spin-boson chain: operator zeros, TQ relation and Bethe roots."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (
    ConfigurationError,
    DegeneracyWarning,
    GaugeError,
    IdentityViolation,
    SingularityError,
)
from .fock import AuxMatrix, OperatorPolynomial, poly_from_roots, scalar_poly
from .spectral import BetheState, BetheSystem, NewtonOptions, newton_multistart
from .ybe import ModelParams, bulk_monodromy, qdet_boson_closed, qdet_spin_closed

GAUGE_TOL = 1e-12


@dataclass(frozen=True)
class TwistConfig:
    """Twist ``K`` and the right gauge ``G_R = [[1, g_b], [g_c, g_d]]``.

    The transfer matrix is ``tr(G_L L_b L_s G_R)``, which equals
    ``tr(K L_b L_s)`` whenever ``G_R G_L = K``.  If ``gauge_left`` is not
    given it is taken as ``G_R^{-1} K``.
    """

    K: np.ndarray
    gauge_right: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    gauge_left: np.ndarray | None = None

    def __post_init__(self):
        k = np.asarray(self.K, dtype=complex)
        gr = np.asarray(self.gauge_right, dtype=complex)
        if k.shape != (2, 2) or gr.shape != (2, 2):
            raise ConfigurationError("twist and gauges must be 2x2")
        if abs(np.linalg.det(k)) < GAUGE_TOL:
            raise ConfigurationError("twist matrix K is singular")
        if abs(np.linalg.det(gr)) < GAUGE_TOL:
            raise ConfigurationError("right gauge is singular")
        gl = np.linalg.solve(gr, k) if self.gauge_left is None else np.asarray(self.gauge_left, dtype=complex)
        if abs(np.linalg.det(gl)) < GAUGE_TOL:
            raise ConfigurationError("left gauge is singular")
        object.__setattr__(self, "K", k)
        object.__setattr__(self, "gauge_right", gr)
        object.__setattr__(self, "gauge_left", gl)

    @property
    def effective_twist(self) -> np.ndarray:
        return self.gauge_right @ self.gauge_left

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.effective_twist))

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.effective_twist))

    @property
    def k11(self) -> complex:
        return complex(self.effective_twist[0, 0])

    def xi_pair(self) -> tuple[complex, complex]:
        """``(Xi^+, Xi^-) = (det K / K_11, K_11)``: the weights that enter the TQ relation."""
        if abs(self.k11) < GAUGE_TOL:
            raise GaugeError("K_11 vanishes; the TQ weights are undefined")
        return self.det / self.k11, self.k11

    def eigen_pair(self) -> tuple[complex, complex]:
        """``(tr K +- sqrt((tr K)^2 - 4 det K)) / 2`` for comparison with :meth:`xi_pair`."""
        tr, det = self.trace, self.det
        root = np.sqrt(complex(tr * tr - 4 * det))
        return (tr + root) / 2, (tr - root) / 2


@dataclass(frozen=True)
class TwistedLattice:
    x_s_plus: complex
    x_s_minus: complex
    x_b: np.ndarray

    def c1_values(self) -> np.ndarray:
        return np.concatenate([self.x_s_plus + self.x_b, self.x_s_minus + self.x_b])

    def c2_values(self) -> np.ndarray:
        return np.concatenate([self.x_s_plus * self.x_b, self.x_s_minus * self.x_b])


def twisted_lattice(p: ModelParams, count: int | None = None) -> TwistedLattice:
    count = p.dim_boson if count is None else count
    e = p.eta
    return TwistedLattice(e * (p.z0 + 0.5), e * (p.z0 - 0.5), e * (np.arange(count) + p.z1))


def qdet_factorization_twisted(p: ModelParams, tol: float = 1e-12):
    """``(Delta^+, Delta^-)`` with ``Delta^+(l - eta/2) Delta^-(l + eta/2)`` equal to the
    product of the two Lax quantum determinants."""
    e, bg = p.eta, p.beta_c * p.gamma_c
    dp = scalar_poly([bg / e * e * (p.z0 + 0.5), -bg / e])
    dm = poly_from_roots([e * (p.z0 - 0.5), e * p.z1])
    lhs = dp(Polynomial([-e / 2, 1])) * dm(Polynomial([e / 2, 1]))
    rhs = qdet_boson_closed(p) * qdet_spin_closed(p)
    dev = np.max(np.abs(np.pad(lhs.coef, (0, 4 - len(lhs.coef))) - np.pad(rhs.coef, (0, 4 - len(rhs.coef)))))
    if dev > tol * max(1.0, np.max(np.abs(rhs.coef))):
        raise IdentityViolation("twisted quantum-determinant factorization failed", dev)
    return dp, dm


def random_twisted_setup(seed: int, dim_boson: int = 24, margin: int = 4, twist_scale: float = 1.0):
    """Generic parameters used by the acceptance run: O(1) couplings and twist."""
    rng = np.random.default_rng(seed)
    p = ModelParams(
        eta=0.5 + 0.3 * rng.random(),
        z0=rng.uniform(-0.4, 0.4),
        z1=rng.uniform(-0.4, 0.4),
        beta_c=rng.uniform(0.6, 1.2),
        gamma_c=rng.uniform(0.6, 1.2),
        dim_boson=dim_boson,
        margin=margin,
    )
    k = np.eye(2) + twist_scale * (rng.normal(size=(2, 2)) + 0.3j * rng.normal(size=(2, 2)))
    return p, TwistConfig(k)


class TwistedChain:
    """Gauged twisted monodromy ``G_L L_b(l) L_s(l) G_R`` and everything built on it."""

    def __init__(self, p: ModelParams, twist: TwistConfig):
        self.p = p
        self.twist = twist

    # -- monodromy and transfer -------------------------------------------

    def monodromy(self, displacement=(0.0, 0.0)) -> AuxMatrix:
        n = self.p.dim_boson
        gl = AuxMatrix.scalar(self.twist.gauge_left, n)
        gr = AuxMatrix.scalar(self.twist.gauge_right, n)
        return gl @ bulk_monodromy(self.p, displacement) @ gr

    @cached_property
    def transfer(self) -> OperatorPolynomial:
        return self.monodromy().trace()

    def transfer_at(self, lam) -> np.ndarray:
        return self.transfer(lam).matrix

    def commutator_residual(self, lam, mu) -> float:
        t1, t2 = self.transfer_at(lam), self.transfer_at(mu)
        return self.p.space.residual(t1 @ t2 - t2 @ t1)

    # -- operator zeros of C ------------------------------------------------

    @property
    def c_leading(self) -> complex:
        """Scalar lambda^2 coefficient of ``C``: ``G_L[1,0] * G_R[0,0]``."""
        return complex(self.twist.gauge_left[1, 0] * self.twist.gauge_right[0, 0])

    @property
    def displacement(self) -> tuple[complex, complex]:
        """``(s, t)`` for ``a -> a + s``, ``a^dag -> a^dag + t`` removing the linear
        boson terms from the lambda coefficient of ``C``."""
        u = self.twist.gauge_left[1]
        v = self.twist.gauge_right[:, 0]
        if abs(u[0]) < GAUGE_TOL or abs(v[0]) < GAUGE_TOL:
            raise GaugeError("C has no lambda^2 term: the separation of variables breaks down")
        c, c_star = v[1] / v[0], u[1] / u[0]
        return c * self.p.beta_c / self.p.eta, c_star * self.p.gamma_c / self.p.eta

    def c_zero_ops(self, check_tol: float = 1e-10, shifted: bool = True):
        """``(c1, c2)`` from ``C(l) = lead * (l^2 - c1 l + c2)`` as dense matrices."""
        lead = self.c_leading
        if abs(lead) < GAUGE_TOL:
            raise GaugeError("C has no lambda^2 term: the separation of variables breaks down")
        disp = self.displacement if shifted else (0.0, 0.0)
        cpoly = self.monodromy(disp).entry(1, 0)
        co = np.zeros((3,) + cpoly.coeffs.shape[1:], dtype=complex)
        co[: cpoly.coeffs.shape[0]] = cpoly.coeffs
        sp = self.p.space
        if sp.residual(co[2] - lead * sp.eye) > check_tol * max(1.0, abs(lead)):
            raise IdentityViolation("lambda^2 coefficient of C is not scalar", sp.residual(co[2] - lead * sp.eye))
        c1, c2 = -co[1] / lead, co[0] / lead
        comm = sp.residual(c1 @ c2 - c2 @ c1)
        if comm > check_tol * max(1.0, np.max(np.abs(c2[:, sp.safe]))):
            raise IdentityViolation("c1 and c2 do not commute", comm)
        return c1, c2

    def c_spectra(self):
        """Eigenvalues of ``c1`` and ``c2`` restricted to the edge-safe block."""
        c1, c2 = self.c_zero_ops()
        s = self.p.space.safe
        return np.linalg.eigvals(c1[np.ix_(s, s)]), np.linalg.eigvals(c2[np.ix_(s, s)])

    def lattice(self) -> TwistedLattice:
        """Closed-form lattice, cross-checked against the c1/c2 spectra."""
        p = self.p
        nsafe = p.dim_boson - p.margin
        lat = twisted_lattice(p, nsafe)
        e1, e2 = self.c_spectra()
        for got, want, name in ((e1, lat.c1_values(), "c1"), (e2, lat.c2_values(), "c2")):
            dev = _set_distance(got, want)
            if dev > 1e-8 * max(1.0, np.max(np.abs(want))):
                raise IdentityViolation(f"{name} spectrum does not match the lattice pairing", dev)
        pairs = np.stack([lat.c1_values(), lat.c2_values()], axis=1)
        gaps = np.abs(pairs[:, None, :] - pairs[None, :, :]).max(axis=2) + np.eye(len(pairs)) * 1e9
        if np.min(gaps) < 1e-8:
            warnings.warn("joint (c1, c2) spectrum is degenerate", DegeneracyWarning, stacklevel=2)
        return lat

    def rl_basis(self, m: int):
        """Closed-form right eigenvectors ``|+,m>`` and ``|-,m>`` of the shifted ``c1``."""
        p, sp = self.p, self.p.space
        c = self.twist.gauge_right[1, 0] / self.twist.gauge_right[0, 0]
        up, dn = sp.basis_state, sp.basis_state
        minus = up(m, 0) + c * dn(m, 1)
        coef = 2 * np.sqrt(m + 1) / (2 * (m + p.z1 - p.z0) + 1)
        plus = dn(m, 1) + coef * (up(m + 1, 0) + c * dn(m + 1, 1))
        return plus, minus

    # -- TQ relation and Bethe roots ---------------------------------------

    def factorization(self):
        return qdet_factorization_twisted(self.p)

    def bethe_system(self) -> BetheSystem:
        p = self.p
        xp, xm = self.twist.xi_pair()
        e = p.eta
        return BetheSystem(
            scale=xp / xm * (-p.beta_c * p.gamma_c / e),
            zeros=np.array([e * (p.z0 + 0.5)], dtype=complex),
            poles=np.array([e * (p.z0 - 0.5), e * p.z1], dtype=complex),
            sigma=np.array([-1.0, -1.0], dtype=complex),
            shift=np.array([e, -e], dtype=complex),
            expo=np.array([1.0, -1.0], dtype=complex),
            variant="twisted",
        )

    def bethe_residual(self, roots) -> np.ndarray:
        """Pole cancellation ``Xi^+ D^+(x) Q(x+eta) + Xi^- D^-(x) Q(x-eta) = 0`` at each root,
        written as ``ratio - 1``."""
        roots = np.asarray(roots, dtype=complex)
        _check_roots(roots, self.p.eta)
        return self.bethe_system().residual(roots)

    def printed_bethe_residual(self, roots) -> np.ndarray:
        """The alternative form with ``K_11`` written out, for comparison only."""
        p, e = self.p, self.p.eta
        k11, det = self.twist.k11, self.twist.det
        roots = np.asarray(roots, dtype=complex)
        out = []
        for b, x in enumerate(roots):
            lhs = e * k11**2 * (x - e * p.z0 - e / 2) * (x - e * p.z1)
            lhs /= p.beta_c * p.gamma_c * det * (x - e * p.z0 - e / 2)
            rhs = np.prod([(x - y + e) / (x - y - e) for a, y in enumerate(roots) if a != b])
            out.append(lhs / rhs - 1)
        return np.array(out)

    def eigenvalue_from_roots(self, roots):
        """``Lambda`` as a polynomial and the remainder left after dividing by ``Q``."""
        p, e = self.p, self.p.eta
        xp, xm = self.twist.xi_pair()
        dp, dm = self.factorization()
        q = poly_from_roots(roots)
        num = xp * dp * q(Polynomial([e, 1])) + xm * dm * q(Polynomial([-e, 1]))
        quo, rem = divmod(num, q)
        scale = max(np.max(np.abs(num.coef)), 1e-300)
        return Polynomial(quo.coef.astype(complex)), float(np.max(np.abs(rem.coef)) / scale)

    def lambda_from_roots(self, roots, lam) -> complex:
        roots = np.asarray(roots, dtype=complex)
        if roots.size and np.min(np.abs(lam - roots)) < 1e-14:
            raise SingularityError("evaluation at a Bethe root")
        e = self.p.eta
        xp, xm = self.twist.xi_pair()
        dp, dm = self.factorization()
        q = poly_from_roots(roots)
        return complex((xp * dp(lam) * q(lam + e) + xm * dm(lam) * q(lam - e)) / q(lam))

    def printed_lambda_from_roots(self, roots, lam) -> complex:
        p, e = self.p, self.p.eta
        k11, det = self.twist.k11, self.twist.det
        q = poly_from_roots(roots)
        t1 = -p.beta_c * p.gamma_c / (e * k11) * det * (lam - e * p.z0 - e / 2) * q(lam + e) / q(lam)
        t2 = k11 * (lam - e * p.z0 - e / 2) * (lam - e * p.z1) * q(lam - e) / q(lam)
        return complex(t1 + t2)

    def tq_polynomial_solutions(self, M: int):
        """All degree-``M`` polynomial solutions of the TQ relation.

        With the lambda^2 and lambda coefficients of ``Lambda`` fixed by ``M``,
        the constant term is an eigenvalue of a linear map on degree-``M``
        polynomials.  Returns ``[(Lambda, Q)]`` with monic ``Q``.
        """
        e = self.p.eta
        xp, xm = self.twist.xi_pair()
        dp, dm = self.factorization()
        lam2 = xm
        lam1 = xp * dp.coef[1] + xm * (dm.coef[1] - M * e)
        shift_up, shift_dn = Polynomial([e, 1]), Polynomial([-e, 1])
        cols = []
        for j in range(M + 1):
            b = Polynomial(np.eye(M + 1)[j])
            img = xp * dp * b(shift_up) + xm * dm * b(shift_dn) - Polynomial([0, lam1, lam2]) * b
            c = np.zeros(M + 3, dtype=complex)
            c[: len(img.coef)] = img.coef
            cols.append(c)
        mat = np.array(cols).T
        top = np.max(np.abs(mat[M + 1 :]))
        if top > 1e-9 * max(1.0, np.max(np.abs(mat))):
            raise IdentityViolation("TQ leading coefficients do not cancel", top)
        vals, vecs = np.linalg.eig(mat[: M + 1])
        out = []
        for k in range(M + 1):
            q = vecs[:, k]
            if abs(q[M]) < 1e-10 * np.max(np.abs(q)):
                continue
            out.append((Polynomial([vals[k], lam1, lam2]), Polynomial(q / q[M])))
        return out

    def lattice_seeds(self, M: int, width: int = 4, offset=0.13 + 0.07j):
        """Root seeds placed next to the lattice points and the Delta zeros."""
        if M == 0:
            return [np.zeros(0, dtype=complex)]
        p, e = self.p, self.p.eta
        pts = list(e * (p.z1 + np.arange(M + width))) + [e * (p.z0 + 0.5), e * (p.z0 - 0.5)]
        pts = np.asarray(pts, dtype=complex) + offset * e
        return [np.array(c) for c in itertools.combinations(pts, M)]

    def solve_bethe(self, M_max: int = 4, seeding: str = "both", opts: NewtonOptions | None = None):
        """Bethe states for ``M = 0..M_max`` with their eigenvalue polynomials."""
        system = self.bethe_system()
        states: list[BetheState] = []
        for M in range(M_max + 1):
            seeds = []
            if seeding in ("tq", "both"):
                seeds += [np.asarray(q.roots(), dtype=complex) for _, q in self.tq_polynomial_solutions(M)]
            if seeding in ("lattice", "both"):
                seeds += self.lattice_seeds(M)
            for st in newton_multistart(system, seeds, opts):
                lam, rem = self.eigenvalue_from_roots(st.roots)
                st.meta.update(eigenvalue=lam, remainder=rem)
                states.append(st)
        return states


def _check_roots(roots, eta, tol=1e-12):
    if roots.size < 2:
        return
    d = roots[:, None] - roots[None, :]
    np.fill_diagonal(d, 1.0)
    if np.min(np.abs(d)) < tol:
        raise SingularityError("coincident Bethe roots")
    if min(np.min(np.abs(d - eta)), np.min(np.abs(d + eta))) < tol:
        raise SingularityError("two roots differ by eta: the pair factor has a pole")


def _set_distance(got, want) -> float:
    """Max distance after optimal one-to-one assignment of two point sets."""
    from scipy.optimize import linear_sum_assignment

    got, want = np.asarray(got), np.asarray(want)
    cost = np.abs(got[:, None] - want[None, :])
    r, c = linear_sum_assignment(cost)
    if len(r) < min(len(got), len(want)):
        return float("inf")
    return float(cost[r, c].max())
