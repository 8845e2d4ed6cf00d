import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinboson_fba.errors import ConfigurationError, SingularityError
from spinboson_fba.ybe import (
    BoundarySide,
    ModelParams,
    bulk_monodromy,
    check_reflection,
    check_rll,
    lax_boson,
    lax_spin,
    qdet_boson_closed,
    qdet_lax,
    qdet_spin_closed,
    r_matrix,
)

cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def _r12(u, eta):
    return np.kron(r_matrix(u, 0, eta), np.eye(2))


def _r23(u, eta):
    return np.kron(np.eye(2), r_matrix(u, 0, eta))


def _r13(u, eta):
    perm = np.kron(np.eye(2), np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))
    return perm @ _r12(u, eta) @ perm


@settings(max_examples=30, deadline=None)
@given(cplx, cplx, cplx)
def test_r_matrix_yang_baxter(a, b, c):
    # independent oracle: the rational R-matrix solves the YBE on C^2 x C^2 x C^2
    eta = 0.7
    lhs = _r12(a - b, eta) @ _r13(a - c, eta) @ _r23(b - c, eta)
    rhs = _r23(b - c, eta) @ _r13(a - c, eta) @ _r12(a - b, eta)
    scale = max(1.0, np.max(np.abs(lhs)))
    if scale < 1e6:
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale


def test_r_matrix_pole():
    with pytest.raises(SingularityError):
        r_matrix(0.0, 0.7, 0.7)


def test_model_params_validation():
    with pytest.raises(ConfigurationError):
        ModelParams(0.0, 0.1, 0.1, 1, 1)
    with pytest.raises(ConfigurationError):
        ModelParams(0.5, 0.1, 0.1, 1, 1, dim_boson=8, margin=8)


def test_rll_edge_safe_but_not_full(model):
    lb = lax_boson(model)
    assert check_rll(lb, 0.3 + 0.1j, -0.5, model) < 1e-10
    assert check_rll(lb, 0.3 + 0.1j, -0.5, model, full_space=True) > 1e-3


def test_qdet_matches_closed_forms_all_truncations(model):
    for nt in (8, 16, 24):
        p = model.replace(dim_boson=nt)
        for lax, closed in ((lax_boson(p), qdet_boson_closed(p)), (lax_spin(p), qdet_spin_closed(p))):
            got = qdet_lax(lax, p)
            assert np.allclose(got.coef, closed.coef, atol=1e-12)


def test_bulk_qdet_is_product(model):
    got = qdet_lax(bulk_monodromy(model), model)
    want = qdet_boson_closed(model) * qdet_spin_closed(model)
    assert np.allclose(got.coef, want.coef, atol=1e-11)


def test_boundary_forms_agree():
    k = BoundarySide(0.8, 0.3, -0.4)
    for lam in (0.2, -1.1 + 0.5j):
        assert np.allclose(k(lam), k.alt_form(lam))
    d = BoundarySide.diagonal(0.8)
    assert d.is_diagonal and d.alpha == 0.8
    with pytest.raises(ConfigurationError):
        BoundarySide(0.0)


def test_reflection_detects_wrong_k(model):
    good = BoundarySide(0.8, 0.3, -0.4)
    assert check_reflection(good, 0.3, -0.7 + 0.2j, model.eta) < 1e-12

    def bad(lam):
        return good(lam) + np.array([[0, 0.1], [0, 0]])

    assert check_reflection(bad, 0.3, -0.7 + 0.2j, model.eta) > 1e-4
    with pytest.raises(ValueError):
        check_reflection(good, 0.1, 0.2, model.eta, side="left")


def test_dual_reflection_plus(reflection, model):
    def kp(lam):
        return reflection.k_plus(lam, model.eta)

    assert check_reflection(kp, 0.4, 1.2 - 0.3j, model.eta, "plus") < 1e-12
