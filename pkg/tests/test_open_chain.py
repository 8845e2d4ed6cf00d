import warnings

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from spinboson_fba.errors import ConfigurationError, DegeneracyError
from spinboson_fba.open_chain import (
    ModifiedFactorization,
    OpenChain,
    conjectured_bethe_residual,
    diagonal_limit_path,
    printed_p_inf,
)
from spinboson_fba.spectral import eigenvalue_polynomials, match_spectra, newton_multistart
from spinboson_fba.ybe import BoundarySide, ReflectionParams


@pytest.fixture(scope="module")
def records(open_chain):
    t = open_chain.transfer
    return [r for r in eigenvalue_polynomials(t, t.degree, open_chain.p.space) if r.trusted]


@pytest.fixture(scope="module")
def diag_records(diag_chain):
    t = diag_chain.transfer
    return [r for r in eigenvalue_polynomials(t, t.degree, diag_chain.p.space) if r.trusted]


def test_b_operators_commute(open_chain):
    for a, b in ((0.3, -0.5j), (1.1, 0.2 + 0.4j)):
        assert open_chain.b_commutator_residual(a, b) < 1e-10


def test_leading_coefficient_is_quarter_of_printed(open_chain, records):
    a6 = open_chain.leading_coefficient()
    assert np.isclose(a6, open_chain.derived_asymptotic(), rtol=1e-10)
    assert np.isclose(a6 / open_chain.printed_asymptotic(), 0.25)
    for r in records:
        assert abs(r.coeffs.coef[6] - a6) < 1e-8 * abs(a6)


def test_diagonal_transfer_has_no_lambda6(diag_chain):
    assert diag_chain.leading_coefficient() == 0 or abs(diag_chain.leading_coefficient()) < 1e-12
    assert diag_chain.printed_asymptotic() == 0


def test_eigenvalues_are_even(records):
    # [DERIVED] the transfer matrix of the open chain is even in lambda
    for r in records:
        assert np.max(np.abs(r.coeffs.coef[1::2])) < 1e-8 * np.max(np.abs(r.coeffs.coef))


def test_b_symm_decomposition(open_chain, diag_chain):
    bs = open_chain.b_symm_decompose()
    assert bs.parity_residual < 1e-10
    assert bs.remainder < 1e-10
    sp = open_chain.p.space
    assert sp.residual(bs.b4 - bs.leading * sp.eye) < 1e-10
    with pytest.raises(DegeneracyError):
        diag_chain.b_symm_decompose()


def test_b4_is_minus_kappa_exp_theta(open_chain):
    mi = open_chain.r.minus
    assert np.isclose(open_chain.b_symm_decompose().leading, -mi.kappa * np.exp(mi.theta), rtol=1e-10)


def test_b_recurrence_branch_ratio(open_chain):
    ent = [e for e in open_chain.b_spectrum_recurrence(m_max=5) if e.branch == 2]
    assert np.allclose([e.top_ratio for e in ent], open_chain.printed_branch_ratio(), rtol=1e-10)


def test_b_recurrence_guards(model, reflection):
    chain = OpenChain(model.replace(z0=-0.5), reflection)
    with pytest.raises(DegeneracyError):
        chain.b_spectrum_recurrence()
    chain = OpenChain(model, reflection)
    with pytest.raises(ConfigurationError):
        chain.b_spectrum_recurrence(m_max=model.dim_boson - 1)


def test_open_lattice_checks_spectra(open_chain):
    lat = open_chain.open_lattice()
    assert np.isclose(lat.x_s_plus - lat.x_s_minus, open_chain.p.eta)


def test_qdet_factorization_and_zeros(open_chain):
    _, _, rel = open_chain.qdet_factorization_open()
    assert rel < 1e-9
    assert max(abs(z) for z in open_chain.boundary_zeros()) < 1e-12


def test_lambda_eta_half(open_chain, records):
    assert max(open_chain.qdet_constraint(r.coeffs) for r in records) < 1e-9


def test_diagonal_bethe_states_match_exact(diag_chain, diag_records):
    system = diag_chain.diagonal_bethe_system()
    rng = np.random.default_rng(0)
    states = []
    for M in (0, 1, 2):
        seeds = [np.zeros(0)] if M == 0 else [rng.normal(size=M) + 1j * rng.normal(size=M) for _ in range(40)]
        states += newton_multistart(system, seeds)
    polys = []
    for s in states:
        lam, rem = diag_chain.diagonal_eigenvalue_from_roots(s.roots)
        assert rem < 1e-10
        polys.append(lam)
    rep = match_spectra(polys, diag_records, 1e-7)
    assert len(rep.pairs) >= 2
    assert rep.worst < 1e-7


def test_printed_diagonal_bethe_form_fails(diag_chain):
    system = diag_chain.diagonal_bethe_system()
    st = newton_multistart(system, [np.array([0.1 + 0.3j])])
    assert st
    r = st[0].roots
    assert np.max(np.abs(diag_chain.diagonal_bethe_residual(r))) < 1e-10
    assert np.max(np.abs(diag_chain.diagonal_bethe_residual(r, "printed"))) > 1e-3


def test_even_q_and_lattice_tq(diag_chain, diag_records):
    lat = diag_chain.open_lattice(check=False)
    e = diag_chain.p.eta
    checked = 0
    for r in diag_records:
        for M in range(5):
            q, sv = diag_chain.even_q_from_eigenvalue(r.coeffs, M)
            if sv < 1e-9:
                break
        else:
            continue
        checked += 1
        out = diag_chain.tq_lattice_residual(r.coeffs, q, n_max=4)
        size = max(abs(q(x)) for x in lat.x_b[:6]) * max(1.0, np.max(np.abs(r.coeffs.coef)))
        assert max(abs(out["s_plus"]), abs(out["s_minus"]), np.max(np.abs(out["b"]))) < 1e-8 * size
        assert np.max(np.abs(q.coef[1::2])) == 0
    assert checked >= 3


def test_modified_factorization(open_chain):
    a6 = open_chain.leading_coefficient()
    for variant in ("minus2", "plus2"):
        mf = ModifiedFactorization(open_chain, variant, printed_p_inf(open_chain, variant) / 4, 1.0)
        assert mf.asymptotic_mismatch(a6) < 1e-10
        assert mf.telescoping_residual([0.31 + 0.2j, -0.7 + 0.45j]) < 1e-12
        assert np.isclose(mf.zeta, 1.0 / (mf.p_inf * open_chain.p.eta))
        bad = ModifiedFactorization(open_chain, variant, printed_p_inf(open_chain, variant), 1.0)
        assert bad.asymptotic_mismatch(a6) > 1
    with pytest.raises(ConfigurationError):
        ModifiedFactorization(open_chain, "minus2", 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        ModifiedFactorization(open_chain, "other", 0.1, 1.0)


def test_modified_eigenvalue_with_trivial_q(open_chain):
    mf = ModifiedFactorization(open_chain, "minus2", printed_p_inf(open_chain) / 4, 1.0)
    lam = np.array([0.4 + 0.2j, -1.3])
    e = open_chain.p.eta
    want = mf.delta_tilde(lam, 1) + mf.delta_tilde(lam, -1)
    assert np.allclose(mf.eigenvalue([], lam), want)


@pytest.mark.parametrize("form", ["derived", "printed"])
def test_conjectured_equations_limit(open_chain, form):
    rng = np.random.default_rng(5)
    roots = rng.normal(size=3) + 1j * rng.normal(size=3)
    diffs = []
    for k in (3, 6, 9, 12):
        p_inf, chi = diagonal_limit_path(k)
        zeta = chi / (p_inf * open_chain.p.eta)
        a = conjectured_bethe_residual(open_chain, roots, p_inf, zeta, chi, form)
        b = open_chain.diagonal_bethe_residual(roots, form)
        diffs.append(np.max(np.abs(a - b) / np.maximum(1, np.abs(b + 1))))
    assert diffs[-1] < 1e-10
    assert all(y < x for x, y in zip(diffs, diffs[1:]))
