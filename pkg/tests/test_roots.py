import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zener import families
from zener.charpoly import Polynomial, reduced_charpoly
from zener.model import new_model
from zener.roots import (cluster_roots, cross_validate, hausdorff, numeric_counts, phi_eigenvalues,
                         poly_roots, zero_structure)
from zener.symbol import phi_matrix

from conftest import models


def _bisect(f, lo, hi, steps=200):
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_reference_roots(ref):
    p = reduced_charpoly(ref, 1.0)
    rs = poly_roots(p)
    z = rs.expanded()
    real = z[np.abs(z.imag) < 1e-12].real
    assert real.size == 1
    assert real[0] == pytest.approx(_bisect(p, -1.0, 0.0), abs=1e-12)
    assert real[0] == pytest.approx(-0.56984, abs=1e-5)
    pair = z[z.imag > 0][0]
    assert pair.real == pytest.approx(-0.21508, abs=1e-5)
    assert pair.imag == pytest.approx(1.30714, abs=1e-5)
    assert np.max(rs.residuals) <= 1e-12


def test_simple_quadratic():
    z = np.sort(poly_roots(Polynomial([1.0, 0.0, -2.0])).expanded().real)
    np.testing.assert_allclose(z, [-np.sqrt(2), np.sqrt(2)], rtol=1e-14)


def test_triple_root_clustered():
    rs = poly_roots(Polynomial([1.0, 3.0, 3.0, 1.0]))
    assert list(rs.multiplicities) == [3]
    assert abs(rs.roots[0] + 1) < 1e-5


def test_exact_zero_roots():
    rs = poly_roots(Polynomial([1.0, 1.0, 0.0, 0.0]))
    assert sorted(zip(rs.roots.real.round(12), rs.multiplicities)) == [(-1.0, 1), (0.0, 2)]


def test_close_simple_roots_not_merged():
    z = np.array([1.0, 1.0 + 1e-4])
    p = Polynomial.from_roots(z)
    centers, mult = cluster_roots(poly_roots(p).expanded(), p.coeffs, p.coeff_error)
    assert list(mult) == [1, 1]


def test_degree_zero_rejected():
    with pytest.raises(ValueError):
        poly_roots(Polynomial([1.0]))


def test_zero_frequency_eigenvalues(ref):
    rs = phi_eigenvalues(ref, [0.0])
    assert sorted(zip(rs.roots.real, rs.multiplicities)) == [(-1.0, 1), (0.0, 2)]
    m2 = new_model(2.0, [-1.0], [1.0], 2)
    rs2 = phi_eigenvalues(m2, [0.0, 0.0])
    assert sorted(zip(rs2.roots.real, rs2.multiplicities)) == [(-1.0, 2), (0.0, 3)]


def test_factor_roots_in_two_dimensions():
    m = new_model(2.0, [-1.0], [1.0], 2)
    rs = phi_eigenvalues(m, [0.6, 0.8])
    z = rs.expanded()
    assert z.size == 5
    assert np.sum(np.abs(z) < 1e-12) == 1
    assert np.sum(np.abs(z + 1) < 1e-12) == 1
    assert rs.dense_distance < 1e-7


@given(models(), st.integers(0, 10**6), st.floats(0.01, 50.0))
def test_matches_dense_eigensolver(m, seed, scale):
    v = np.random.default_rng(seed).standard_normal(m.d)
    xi = scale * v / np.linalg.norm(v)
    rs = phi_eigenvalues(m, xi)
    assert rs.degree == m.n
    dense = np.linalg.eigvals(phi_matrix(m, xi))
    assert hausdorff(rs.expanded(), dense) <= 1e-6 * (1 + scale)


@given(models(), st.floats(0.01, 30.0))
def test_vieta_relations(m, x):
    p = reduced_charpoly(m, x)
    z = poly_roots(p).expanded()
    assert np.sum(z).real == pytest.approx(-p.coefficient(m.k + 1), abs=1e-8 * p.scale)
    prod = np.prod(z)
    assert prod.real * (-1) ** (m.k + 2) == pytest.approx(p.coefficient(0), rel=1e-6,
                                                          abs=1e-8 * p.scale)


@given(models(), st.floats(0.01, 30.0))
def test_conjugate_symmetry(m, x):
    z = poly_roots(reduced_charpoly(m, x)).expanded()
    np.testing.assert_allclose(np.sort_complex(z), np.sort_complex(z.conj()), atol=1e-12 * (1 + x))


@given(models(), st.floats(0.01, 30.0))
def test_random_cross_validation(m, x):
    assert cross_validate(m, x).agree


@pytest.mark.parametrize("build", [
    families.imaginary_pair_stable, families.imaginary_pair_negative_g0,
    families.real_pair_negative_g0, families.zero_with_imaginary_pair,
    families.three_unstable_negative_g0, families.mixed_k2_zero_constant,
    families.tuned_zero_equilibrium, families.negative_equilibrium,
])
def test_constructed_cross_validation(build):
    for seed in range(10):
        cv = cross_validate(build(seed), 1.0)
        assert cv.agree, cv.mismatch


def test_imaginary_pair_located():
    m = families.imaginary_pair_stable(0)
    z = poly_roots(reduced_charpoly(m, 1.0)).expanded()
    imag = z[np.abs(z.real) < 1e-9]
    assert imag.size == 2
    assert np.max(np.abs(reduced_charpoly(m, 1.0)(imag))) < 1e-10


def test_counts_band():
    rs = poly_roots(Polynomial.from_roots([-1.0, 1e-12, 2j, -2j, 3.0]))
    c = numeric_counts(rs)
    assert (c["left"], c["origin"], c["imag_pair"], c["right"]) == (1, 1, 2, 1)


def test_zero_structure():
    assert zero_structure(new_model(2.0, [-1.0], [1.0], 2), [1.0, 0.0]).trivial_jordan
    tuned = zero_structure(families.tuned_zero_equilibrium(0, k=2), [1.0])
    assert (tuned.algebraic, tuned.geometric) == (1, 1)
    dz = zero_structure(families.double_zero(), [1.0])
    assert (dz.algebraic, dz.geometric) == (2, 1)
    assert not dz.trivial_jordan
