import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zener import families
from zener.charpoly import (Polynomial, classify_analytic, factored_charpoly, full_classification,
                            g_at_zero, hurwitz_table, large_xi_relaxation_poly, real_root_brackets,
                            reduced_charpoly)
from zener.model import new_model
from zener.symbol import phi_matrix

from conftest import models


def test_reference_polynomial(ref):
    np.testing.assert_allclose(reduced_charpoly(ref, 1.0).coeffs, [1, 1, 2, 1])


def test_two_element_constant_term():
    m = new_model(3.0, [-1.0, -0.5], [1.0, 2.0], 1)
    p = reduced_charpoly(m, 2.0)
    # xi^2 (c2 b1 b2 + a1 b2 + a2 b1)
    assert p.coefficient(0) == pytest.approx(4 * (6 - 2 - 0.5))
    assert p.coefficient(0) == pytest.approx(g_at_zero(m, 2.0))


def test_zero_frequency_polynomial():
    m = new_model(3.0, [-1.0, -0.5], [1.0, 2.0], 1)
    np.testing.assert_allclose(reduced_charpoly(m, 0.0).coeffs, np.poly([0, 0, -1, -2]))


def test_polynomial_validation():
    with pytest.raises(ValueError):
        Polynomial([2.0, 1.0])
    with pytest.raises(ValueError):
        Polynomial([1.0, 1.0], [0.0])


@given(models(), st.floats(0.0, 20.0))
def test_matches_dense_characteristic_polynomial(m, x):
    xi = np.zeros(m.d)
    xi[0] = x
    fp = factored_charpoly(m, xi)
    assert fp.degree == m.n
    full = fp.reduced.coeffs
    full = np.convolve(full, np.poly(np.zeros(fp.zero_power))) if fp.zero_power else full
    for bi, power in fp.linear_factors:
        for _ in range(power):
            full = np.convolve(full, [1.0, bi])
    # char poly of Phi in lam: det(lam I - Phi)
    dense = np.poly(np.linalg.eigvals(phi_matrix(m, xi)))
    np.testing.assert_allclose(full, dense.real, atol=1e-6 * np.max(np.abs(full)))


@given(models(), st.floats(0.01, 20.0))
def test_constant_term_formula(m, x):
    p = reduced_charpoly(m, x)
    assert p.coefficient(0) == pytest.approx(g_at_zero(m, x), rel=1e-9, abs=1e-12 * p.scale)


def test_hurwitz_reference(ref):
    t = hurwitz_table(reduced_charpoly(ref, 1.0))
    np.testing.assert_allclose(t.deltas, [1, 1, 1])
    assert t.variations == 0 and not t.singular


def test_hurwitz_unstable_cubic():
    t = hurwitz_table(Polynomial([1.0, 1.0, 2.0, 3.0]))
    assert t.deltas[1] == pytest.approx(-1.0)
    assert t.variations == 2


@given(models(), st.floats(0.1, 10.0))
def test_last_hurwitz_determinant(m, x):
    p = reduced_charpoly(m, x)
    t = hurwitz_table(p)
    assert t.deltas[-1] == pytest.approx(p.coefficient(0) * t.deltas[-2], rel=1e-6,
                                         abs=1e-9 * p.scale ** p.degree)


def test_hurwitz_singular_flag():
    t = hurwitz_table(Polynomial.from_roots([-1.0, 1j, -1j]))
    assert t.singular and t.variations is None


@pytest.mark.parametrize("m, expected", [
    (new_model(2.0, [-1.0], [1.0], 1), dict(left=3, zero=0, right=0)),
    (new_model(1.0, [-2.0], [1.0], 1), dict(left=2, zero=0, right=1)),
    (new_model(1.0, [-1.0], [1.0], 1), dict(left=2, zero=1, right=0)),
    (new_model(1.0, [1.0], [1.0], 1), dict(left=1, zero=0, right=2)),
])
def test_classification_examples(m, expected):
    counts = classify_analytic(m, 1.0).counts()
    assert {k: counts[k] for k in expected} == expected


def test_zero_frequency_class(ref):
    c = classify_analytic(ref, 0.0)
    assert (c.n_left, c.n_origin) == (1, 2)
    with pytest.raises(ValueError):
        classify_analytic(ref, -1.0)


@pytest.mark.parametrize("build, counts", [
    (families.imaginary_pair_stable, dict(left=2, imag_pair=2, right=0)),
    (families.imaginary_pair_negative_g0, dict(left=1, imag_pair=2, right=1)),
    (families.real_pair_negative_g0, dict(left=3, imag_pair=0, right=1)),
    (families.zero_with_imaginary_pair, dict(left=1, origin=1, imag_pair=2)),
    (families.three_unstable_negative_g0, dict(left=1, right=3)),
    (families.mixed_k2_zero_constant, dict(origin=1)),
])
def test_constructed_regimes(build, counts):
    for seed in range(5):
        c = classify_analytic(build(seed), 1.0).counts()
        assert {k: c[k] for k in counts} == counts


def test_double_zero_counts():
    c = classify_analytic(families.double_zero(), 1.0)
    assert c.n_origin == 2 and c.n_right == 0


def test_full_classification_adds_factor_roots():
    m = new_model(2.0, [-1.0], [1.0], 2)
    c = full_classification(m, [0.6, 0.8])
    assert (c.n_left, c.n_origin, c.degree) == (4, 1, 5)
    t = families.tuned_zero_equilibrium(0, k=2, d=3)
    assert full_classification(t, [1.0, 0.0, 0.0]).n_origin == 3


@given(models(), st.floats(0.01, 50.0))
def test_counts_sum_to_degree(m, x):
    c = classify_analytic(m, x)
    assert c.n_left + c.n_zero_real_part + c.n_right == m.k + 2


@given(models(), st.floats(0.01, 20.0))
def test_real_root_brackets_change_sign(m, x):
    p = reduced_charpoly(m, x)
    for lo, hi in real_root_brackets(m, p):
        assert p(lo) * p(hi) < 0


def test_large_xi_relaxation_single_element(ref):
    # c2 + a / (r + b) = 0  =>  r = -b - a / c2
    p = large_xi_relaxation_poly(ref)
    np.testing.assert_allclose(p.coeffs, [1.0, 1.0 - 0.5])
