import numpy as np
import pytest
from numpy.polynomial import Polynomial

from spinboson_fba.errors import ConfigurationError, GaugeError
from spinboson_fba.spectral import eigenvalue_polynomials, match_spectra
from spinboson_fba.twisted import (
    TwistConfig,
    TwistedChain,
    _set_distance,
    qdet_factorization_twisted,
    random_twisted_setup,
    twisted_lattice,
)
from spinboson_fba.ybe import qdet_boson_closed, qdet_spin_closed


def test_xi_pair_and_gauge():
    k = np.array([[1.2, 0.3], [0.1, 0.9]])
    tw = TwistConfig(k, gauge_right=np.array([[1.0, 0.4], [0.2, 1.1]]))
    assert np.allclose(tw.effective_twist, k)
    xp, xm = tw.xi_pair()
    assert np.isclose(xp * xm, np.linalg.det(k))
    assert np.isclose(xm, 1.2)
    # the TQ weights are not the eigenvalues of K
    assert not np.allclose(sorted(np.abs(tw.eigen_pair())), sorted(np.abs([xp, xm])))


def test_twist_validation():
    with pytest.raises(ConfigurationError):
        TwistConfig(np.zeros((2, 2)))
    with pytest.raises(ConfigurationError):
        TwistConfig(np.eye(3))
    with pytest.raises(GaugeError):
        TwistConfig(np.array([[0.0, 1.0], [1.0, 0.5]])).xi_pair()


def test_transfer_is_gauge_invariant(model):
    k = np.array([[1.2, 0.3], [0.1 + 0.2j, 0.9]])
    a = TwistedChain(model, TwistConfig(k)).transfer_at(0.37 - 0.2j)
    b = TwistedChain(model, TwistConfig(k, np.array([[1.0, 0.5], [-0.3, 0.8]]))).transfer_at(0.37 - 0.2j)
    assert model.space.residual(a - b) < 1e-10


def test_qdet_factorization(model):
    dp, dm = qdet_factorization_twisted(model)
    e = model.eta
    lhs = dp(Polynomial([-e / 2, 1])) * dm(Polynomial([e / 2, 1]))
    rhs = qdet_boson_closed(model) * qdet_spin_closed(model)
    assert np.allclose(lhs.coef, rhs.coef)


def test_c_operator_spectra_match_lattice(twisted_chain, model):
    # [DERIVED] dense diagonalization of c1, c2 against the lattice pairing
    c1, c2 = twisted_chain.c_spectra()
    lat = twisted_lattice(model, model.dim_boson - model.margin)
    assert _set_distance(c1, lat.c1_values()) < 1e-10
    assert _set_distance(c2, lat.c2_values()) < 1e-10
    twisted_chain.lattice()  # internal cross-check does not raise


def test_rl_basis_vectors_are_eigenvectors(model):
    tw = TwistConfig(np.array([[1.2, 0.3], [0.1, 0.9]]), np.array([[1.0, 0.0], [0.35, 1.0]]))
    chain = TwistedChain(model, tw)
    c1, _ = chain.c_zero_ops()
    for m in (0, 3, 7):
        for v in chain.rl_basis(m):
            w = c1 @ v
            mu = np.vdot(v, w) / np.vdot(v, v)
            assert np.linalg.norm(w - mu * v) < 1e-10 * np.linalg.norm(w)


def test_c_needs_lambda_squared(model):
    tw = TwistConfig(np.array([[1.0, 0.3], [0.0, 0.9]]))
    with pytest.raises(GaugeError):
        TwistedChain(model, tw).c_zero_ops()


def test_tq_solutions_satisfy_bethe_equations(twisted_chain):
    for M in (1, 2, 3):
        for lam, q in twisted_chain.tq_polynomial_solutions(M):
            roots = q.roots()
            d = roots[:, None] - roots[None, :] + 10 * np.eye(M)
            e = twisted_chain.p.eta
            if min(np.min(np.abs(d)), np.min(np.abs(d - e)), np.min(np.abs(d + e))) < 1e-6:
                continue  # exact strings are TQ solutions but not regular Bethe states
            poly, rem = twisted_chain.eigenvalue_from_roots(roots)
            assert rem < 1e-9
            assert np.allclose(poly.coef, lam.coef, rtol=1e-7, atol=1e-9)
            assert np.max(np.abs(twisted_chain.bethe_residual(roots))) < 1e-7


def test_lambda_from_roots_pointwise(twisted_chain):
    st = twisted_chain.solve_bethe(2)
    s = next(x for x in st if x.M == 2)
    poly = s.meta["eigenvalue"]
    for lam in (0.3, -0.8 + 0.4j):
        assert np.isclose(twisted_chain.lambda_from_roots(s.roots, lam), poly(lam))


def test_printed_eigenvalue_form_disagrees(twisted_chain):
    # the printed TQ weights give a different function: kept for the record
    s = next(x for x in twisted_chain.solve_bethe(1) if x.M == 1)
    lam = 0.41 + 0.2j
    assert not np.isclose(twisted_chain.printed_lambda_from_roots(s.roots, lam), twisted_chain.lambda_from_roots(s.roots, lam))


def test_full_coverage_with_tq_seeding():
    # [DERIVED] end-to-end oracle: every well-resolved exact eigenvalue is a Bethe state
    p, tw = random_twisted_setup(0, 24, 4)
    chain = TwistedChain(p, tw)
    recs = eigenvalue_polynomials(chain.transfer, chain.transfer.degree, p.space, leak_tol=1e-10)
    states = chain.solve_bethe(12, seeding="tq")
    rep = match_spectra([s.meta["eigenvalue"] for s in states], recs, 1e-7)
    assert sum(r.trusted for r in recs) >= 15
    assert rep.all_matched, rep.unmatched_exact


def test_m_le_4_coverage_is_partial():
    p, tw = random_twisted_setup(0, 24, 4)
    chain = TwistedChain(p, tw)
    recs = eigenvalue_polynomials(chain.transfer, chain.transfer.degree, p.space)
    rep = match_spectra([s.meta["eigenvalue"] for s in chain.solve_bethe(4)], recs, 1e-7)
    # what is matched is matched to machine precision
    assert rep.pairs and rep.worst < 1e-10
    assert max(s.M for s in chain.solve_bethe(12, seeding="tq")) > 4
