import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from su2star.errors import (
    ConstraintViolation,
    DomainError,
    InsufficientDerivatives,
    OrderTooLarge,
)
from su2star.functionals import (
    G_series,
    bernoulli,
    commutative_rep,
    constraint_residuals,
    custom_functionals,
    family_from_f,
    kv_functionals,
    phi_inverse,
    phi_matrix,
    rep_from_json,
    rep_to_json,
    riccati_residual,
    weyl_candidate,
)


def bernoulli_by_recurrence(n):
    # sum_{k<=m} C(m+1, k) B_k = 0, B_0 = 1
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return B


def test_bernoulli_against_recurrence_and_known_values():
    ref = bernoulli_by_recurrence(40)
    assert [bernoulli(n) for n in range(41)] == ref
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(12) == Fraction(-691, 2730)
    with pytest.raises(OrderTooLarge):
        bernoulli(65)


def test_G_series_leading_coefficients():
    G = G_series(4)
    assert G.coeffs[:3] == (Fraction(-1), Fraction(1, 30), Fraction(-1, 630))
    with pytest.raises(OrderTooLarge):
        G_series(31)


def test_riccati_exact_through_order_11():
    res = riccati_residual(G_series(12), 11)
    assert len(res) == 12
    assert all(c == 0 and isinstance(c, Fraction) for c in res)


def test_riccati_detects_a_wrong_coefficient():
    from su2star.functionals import SeriesFunctional

    G = G_series(6)
    bad = SeriesFunctional(list(G.coeffs[:3]) + [G.coeffs[3] * 2] + list(G.coeffs[4:]))
    assert any(c != 0 for c in riccati_residual(bad, 5))


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_kv_constraints_on_grid(theta):
    rep = kv_functionals(theta)
    r1, r2 = constraint_residuals(rep, np.linspace(-4.0, 0.0, 21))
    assert np.max(np.abs(r1)) < 1e-10
    assert np.max(np.abs(r2)) < 1e-10


def test_kv_closed_form_values():
    rep = kv_functionals(1.0)
    assert abs(rep.f(-1.0) - math.cos(1) / math.sin(1)) < 1e-14
    assert abs(rep.g(0.0) + 1 / 3) < 1e-15
    assert abs(rep.f(0.0) - 1) == 0
    # f + t g = 1 holds identically for the subfamily
    t = np.linspace(-2.0, 0.0, 9)
    assert np.max(np.abs(rep.f(t) + t * rep.g(t) - 1)) < 1e-13


def test_kv_series_branch_continuous_at_switch():
    rep = kv_functionals(1.0)
    s = rep.f.switch
    below = rep.f.taylor(-s * (1 - 1e-9), 2)
    above = rep.f.taylor(-s * (1 + 1e-9), 2)
    assert np.max(np.abs(below - above)) < 1e-9


def test_domain_errors():
    rep = kv_functionals(1.0)
    with pytest.raises(DomainError):
        rep.f(0.5)
    with pytest.raises(InsufficientDerivatives):
        G_series(3).taylor(0.0, 5)
    with pytest.raises(ValueError):
        kv_functionals(1.0, order=3)


def test_phi_inverse_random():
    rng = np.random.default_rng(1)
    for theta in (0.5, 1.0):
        rep = kv_functionals(theta)
        for _ in range(50):
            v = rng.normal(size=3)
            p = v / np.linalg.norm(v) * rng.uniform(0, 0.9 * math.pi) / theta
            err = np.max(np.abs(phi_matrix(rep, p) @ phi_inverse(rep, p) - np.eye(3)))
            assert err < 1e-10


def test_family_from_f_constant():
    rep = family_from_f(2.0, [1])
    assert list(rep.g.coeffs[:3]) == [-4, 0, 0]
    assert list(rep.ell.coeffs[:3]) == [-8, 0, 0]


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.3, 0.3), st.floats(-0.2, 0.2), st.floats(0.3, 2.0))
def test_family_from_f_satisfies_constraints(a, b, theta):
    rep = family_from_f(theta, [1.0, a, b], order=12)
    t = np.array([-0.02, -0.01])
    r1, r2 = constraint_residuals(rep, t)
    assert np.max(np.abs(r1)) < 1e-9 and np.max(np.abs(r2)) < 1e-9


def test_custom_rejects_non_solution():
    with pytest.raises(ConstraintViolation):
        custom_functionals(1.0, [1, 0, 0], [0, 0, 0], [0, 0, 0])
    rep = custom_functionals(1.0, [1, 0], [0, 0], [0, 0], is_star_rep=False)
    assert not rep.is_star_rep


def test_weyl_and_commutative():
    w = weyl_candidate(1.0)
    assert not w.is_star_rep
    r1, _ = constraint_residuals(w, -1.0)
    assert abs(r1) > 0.1
    c = commutative_rep()
    assert constraint_residuals(c, -0.7) == (0.0, 0.0)


def test_json_roundtrip():
    kv = kv_functionals(1.5, 10)
    back = rep_from_json(rep_to_json(kv))
    assert back.family == "kv" and back.theta == 1.5 and back.order == 10
    fam = family_from_f(1.0, [1])
    doc = {"family": "custom", "theta": 1.0, "f": ["1", 0], "g": [-1, 0], "ell": ["-2", 0]}
    again = rep_from_json(doc)
    assert again.g(-0.3) == fam.g(-0.3)
    with pytest.raises(ValueError):
        rep_from_json({"family": "moyal", "theta": 1.0})
