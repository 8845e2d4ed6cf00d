"""Non-hermitian eigensolution, eigenvalue polynomials, Newton multistart and matching."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .errors import DefectiveSpectrumWarning, InterpolationError, SingularityError
from .fock import FockSpace, OperatorPolynomial, scalar_poly

DEFAULT_LEAK_TOL = 1e-8
DEFECTIVE_COND = 1e10


# ---------------------------------------------------------------------------
# records


@dataclass
class SpectrumRecord:
    """One eigenvalue polynomial of a commuting family."""

    coeffs: Polynomial
    leak: float
    trusted: bool
    sector_charge: float | None = None
    holdout_error: float = 0.0
    condition: float = 1.0

    def as_row(self, degree: int) -> list:
        c = np.zeros(degree + 1, dtype=complex)
        k = min(len(self.coeffs.coef), degree + 1)
        c[:k] = self.coeffs.coef[:k]
        return list(c) + [self.leak, self.trusted]


@dataclass
class BetheState:
    roots: np.ndarray
    residual_inf: float
    variant: str = "twisted"
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return int(len(self.roots))


def canonical_roots(roots, symmetric: bool = False) -> np.ndarray:
    """Sort roots by (real, imag); with ``symmetric`` fold each onto Re > 0 first."""
    r = np.asarray(roots, dtype=complex).copy()
    if symmetric:
        flip = (r.real < -1e-10) | ((np.abs(r.real) <= 1e-10) & (r.imag < 0))
        r[flip] = -r[flip]
    order = np.lexsort((np.round(r.imag, 10), np.round(r.real, 10)))
    return r[order]


# ---------------------------------------------------------------------------
# eigen-decomposition


@dataclass
class Eigensystem:
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: np.ndarray
    defective: np.ndarray


def biorthogonal_eigen(a, cond_limit: float = DEFECTIVE_COND, warn: bool = True) -> Eigensystem:
    """Right and left eigenvectors with ``left[:, i]^H right[:, j] = delta_ij``.

    ``condition`` is the eigenvalue condition number ``1 / |w^H v|`` for unit
    vectors; entries above ``cond_limit`` are flagged defective.
    """
    a = np.asarray(getattr(a, "matrix", a), dtype=complex)
    vals, wl, vr = scipy.linalg.eig(a, left=True, right=True)
    vr = vr / np.linalg.norm(vr, axis=0)
    wl = wl / np.linalg.norm(wl, axis=0)
    overlap = np.einsum("ij,ij->j", wl.conj(), vr)
    with np.errstate(divide="ignore"):
        cond = 1.0 / np.abs(overlap)
    defective = ~np.isfinite(cond) | (cond > cond_limit)
    safe = np.where(defective, 1.0, overlap)
    wl = wl / safe.conj()
    if warn and defective.any():
        warnings.warn(
            f"defective or near-defective eigenvalues at indices {np.nonzero(defective)[0].tolist()}",
            DefectiveSpectrumWarning,
            stacklevel=2,
        )
    return Eigensystem(vals, vr, wl, cond, defective)


def default_nodes(count: int, radius: float = 1.0, phase: float = 0.37) -> np.ndarray:
    return radius * np.exp(1j * (phase + 2 * np.pi * np.arange(count) / count))


def _builder(t_builder):
    if isinstance(t_builder, OperatorPolynomial):
        return lambda lam: t_builder(lam).matrix
    return lambda lam: np.asarray(getattr(t_builder(lam), "matrix", t_builder(lam)))


def eigenvalue_polynomials(
    t_builder,
    degree: int,
    space: FockSpace,
    nodes: Sequence[complex] | None = None,
    lam0: complex | None = None,
    parity_hint: str | None = None,
    leak_tol: float = DEFAULT_LEAK_TOL,
    holdout_tol: float = 1e-7,
    charge_conserving: bool = False,
) -> list[SpectrumRecord]:
    """Eigenvalue polynomials of a commuting family ``t(lam)``.

    ``t(lam0)`` is diagonalized once; each eigenvalue is tracked through the
    diagonal matrix elements ``<w|t(lam_j)|v>`` at the nodes and fitted by
    exact interpolation on the first ``degree + 1`` nodes, the remaining
    nodes serving as held-out checks.
    """
    build = _builder(t_builder)
    nodes = default_nodes(degree + 2) if nodes is None else np.asarray(nodes, dtype=complex)
    if len(nodes) < degree + 1:
        raise InterpolationError(f"need at least {degree + 1} nodes, got {len(nodes)}")
    if lam0 is None:
        lam0 = 0.4123 + 0.2217j
    eig = biorthogonal_eigen(build(lam0), warn=False)
    v, w = eig.right, eig.left
    vals = np.array([np.einsum("ij,ij->j", w.conj(), build(x) @ v) for x in nodes])
    fit, hold = nodes[: degree + 1], nodes[degree + 1 :]
    vander = np.vander(fit, degree + 1, increasing=True)
    coeffs = np.linalg.solve(vander, vals[: degree + 1])
    leak = space.leak(v)
    records = []
    for k in range(v.shape[1]):
        c = coeffs[:, k]
        p = Polynomial(c)
        scale = max(np.max(np.abs(c)), 1e-300)
        err = 0.0
        if len(hold):
            err = float(np.max(np.abs(p(hold) - vals[degree + 1 :, k])) / max(scale, np.max(np.abs(vals[:, k]))))
        trusted = bool(leak[k] < leak_tol and not eig.defective[k])
        if trusted and err > holdout_tol:
            raise InterpolationError(
                f"held-out node mismatch {err:.2e} for trusted eigenvalue {k}: family not commuting or truncation too small"
            )
        if trusted and parity_hint == "even":
            odd = np.max(np.abs(c[1::2])) if degree >= 1 else 0.0
            if odd > 1e-8 * scale:
                raise InterpolationError(f"odd coefficients {odd:.2e} violate even parity for eigenvalue {k}")
        charge = None
        if charge_conserving:
            wts = np.abs(v[:, k]) ** 2
            mean = float(np.sum(wts * space.charge) / np.sum(wts))
            charge = round(2 * mean) / 2
        records.append(SpectrumRecord(p, float(leak[k]), trusted, charge, err, float(eig.condition[k])))
    return records


# ---------------------------------------------------------------------------
# Bethe systems and Newton


@dataclass(frozen=True)
class BetheSystem:
    """``R_b = scale * prod(x_b - zeros) / prod(x_b - poles) * pair-product = 1``.

    The pair product is ``prod_{a != b} prod_j (x_b + sigma_j x_a + shift_j)**expo_j``.
    Newton works on the principal logarithm of ``R_b`` folded into ``(-pi, pi]``.
    """

    scale: complex
    zeros: np.ndarray
    poles: np.ndarray
    sigma: np.ndarray
    shift: np.ndarray
    expo: np.ndarray
    variant: str = "twisted"
    symmetric: bool = False

    def log_residual(self, roots):
        x = np.asarray(roots, dtype=complex)
        v, d = _kernels.rational_terms(x, self.zeros, self.poles)
        pl, pj = _kernels.pair_terms(x, self.sigma, self.shift, self.expo)
        f = np.log(complex(self.scale)) + v + pl
        f = f - 2j * np.pi * np.round(f.imag / (2 * np.pi))
        jac = pj + np.diag(d)
        return f, jac

    def residual(self, roots) -> np.ndarray:
        """``R_b - 1`` in product form, evaluated directly."""
        x = np.asarray(roots, dtype=complex)
        out = np.empty(x.size, dtype=complex)
        for b in range(x.size):
            r = self.scale * np.prod(x[b] - self.zeros) / np.prod(x[b] - self.poles)
            for a in range(x.size):
                if a != b:
                    r *= np.prod((x[b] + self.sigma * x[a] + self.shift) ** self.expo)
            out[b] = r - 1.0
        return out

    def poles_hit(self, roots, tol: float = 1e-12) -> bool:
        x = np.asarray(roots, dtype=complex)
        if x.size == 0:
            return False
        if self.poles.size and np.min(np.abs(x[:, None] - self.poles[None, :])) < tol:
            return True
        if self.zeros.size and np.min(np.abs(x[:, None] - self.zeros[None, :])) < tol:
            return True
        for s, c in zip(self.sigma, self.shift):
            arg = x[:, None] + s * x[None, :] + c
            np.fill_diagonal(arg, 1.0)
            if np.min(np.abs(arg)) < tol:
                return True
        return False


@dataclass
class NewtonOptions:
    step_tol: float = 1e-12
    max_iter: int = 200
    max_halvings: int = 8
    accept_tol: float = 1e-10
    dedup_tol: float = 1e-8


def newton_solve(system: BetheSystem, seed, opts: NewtonOptions | None = None):
    """Damped Newton from one seed; returns ``(roots, residual_inf, iterations)`` or None."""
    opts = opts or NewtonOptions()
    x = np.asarray(seed, dtype=complex).copy()
    if x.size == 0:
        return x, 0.0, 0
    if system.poles_hit(x):
        return None
    with np.errstate(all="ignore"):
        f, jac = system.log_residual(x)
        norm = np.max(np.abs(f))
        for it in range(1, opts.max_iter + 1):
            try:
                step = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(step)):
                return None
            t = 1.0
            for _ in range(opts.max_halvings + 1):
                trial = x + t * step
                if not system.poles_hit(trial):
                    ft, jt = system.log_residual(trial)
                    nt = np.max(np.abs(ft))
                    if np.isfinite(nt) and nt < norm:
                        break
                t *= 0.5
            else:
                return (x, norm, it) if norm < opts.accept_tol else None
            x, f, jac, norm = trial, ft, jt, nt
            if np.max(np.abs(t * step)) < opts.step_tol * max(1.0, np.max(np.abs(x))) or norm < 1e-15:
                break
    if not np.isfinite(norm):
        return None
    return x, float(norm), it


def newton_multistart(system: BetheSystem, seeds, opts: NewtonOptions | None = None) -> list[BetheState]:
    """Run Newton from every seed, keep converged states, deduplicate.

    States are deduplicated under permutations of the roots (and under
    ``lam -> -lam`` for symmetric systems).  Each kept state is re-verified
    in product form.
    """
    opts = opts or NewtonOptions()
    found: list[BetheState] = []
    keys: list[np.ndarray] = []
    for seed in seeds:
        seed = np.asarray(seed, dtype=complex)
        if not np.all(np.isfinite(seed)):
            continue
        out = newton_solve(system, seed, opts)
        if out is None:
            continue
        x, _, it = out
        if len(x) and (system.poles_hit(x, 1e-9) or _coincident(x, system.symmetric)):
            continue
        with np.errstate(all="ignore"):
            res = float(np.max(np.abs(system.residual(x)))) if len(x) else 0.0
        if not res < opts.accept_tol:
            continue
        key = canonical_roots(x, system.symmetric)
        if any(len(k) == len(key) and np.max(np.abs(k - key), initial=0.0) < opts.dedup_tol for k in keys):
            continue
        keys.append(key)
        found.append(BetheState(key, res, system.variant, it))
    return found


def _coincident(x, symmetric, tol=1e-7) -> bool:
    y = np.concatenate([x, -x]) if symmetric else x
    if symmetric and np.min(np.abs(x), initial=np.inf) < tol:
        return True
    d = np.abs(y[:, None] - y[None, :]) + np.eye(len(y)) * 1e9
    if symmetric:
        n = len(x)
        d[np.arange(n), np.arange(n) + n] = 1e9
        d[np.arange(n) + n, np.arange(n)] = 1e9
    return bool(np.min(d, initial=np.inf) < tol)


# ---------------------------------------------------------------------------
# matching


@dataclass
class MatchReport:
    pairs: list = field(default_factory=list)
    unmatched_exact: list = field(default_factory=list)
    unmatched_bethe: list = field(default_factory=list)
    untrusted: list = field(default_factory=list)
    rel_tol: float = 1e-7

    @property
    def all_matched(self) -> bool:
        return not self.unmatched_exact

    @property
    def worst(self) -> float:
        return max((d for _, _, d in self.pairs), default=0.0)


def coefficient_distance(p, q, floor: float = 1e-6) -> float:
    """``max_i |p_i - q_i| / (|q_i| + floor * max|q|)``, ``q`` the reference."""
    a = np.asarray(getattr(p, "coef", p), dtype=complex)
    b = np.asarray(getattr(q, "coef", q), dtype=complex)
    n = max(len(a), len(b))
    a = np.pad(a, (0, n - len(a)))
    b = np.pad(b, (0, n - len(b)))
    den = np.abs(b) + floor * max(np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b) / den))


def match_spectra(bethe: Sequence, exact: Sequence[SpectrumRecord], rel_tol: float = 1e-7) -> MatchReport:
    """Assign Bethe eigenvalue polynomials to trusted exact records.

    ``bethe`` holds polynomials (or coefficient arrays).  Untrusted exact
    records are listed but never required to match.
    """
    rep = MatchReport(rel_tol=rel_tol)
    trusted = [i for i, r in enumerate(exact) if r.trusted]
    rep.untrusted = [i for i, r in enumerate(exact) if not r.trusted]
    if not bethe or not trusted:
        rep.unmatched_exact = trusted
        rep.unmatched_bethe = list(range(len(bethe)))
        return rep
    cost = np.array([[coefficient_distance(b, exact[i].coeffs) for i in trusted] for b in bethe])
    rows, cols = linear_sum_assignment(np.log10(np.clip(cost, 1e-300, 1e300)))
    matched_b, matched_e = set(), set()
    for r, c in zip(rows, cols):
        if cost[r, c] <= rel_tol:
            rep.pairs.append((int(r), trusted[c], float(cost[r, c])))
            matched_b.add(r)
            matched_e.add(trusted[c])
    rep.unmatched_exact = [i for i in trusted if i not in matched_e]
    rep.unmatched_bethe = [i for i in range(len(bethe)) if i not in matched_b]
    return rep
