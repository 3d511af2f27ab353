"""Characteristic polynomials of the mode generator and analytic root location.

For a frequency magnitude ``xi`` the eigenvalues of ``Phi`` are the roots of::

    p~(lam) = g(lam) * lam**(d-1) * prod_i (lam + b_i)**(d-1)
    g(lam)  = (lam**2 + c2 xi**2) prod_i (lam + b_i)
              + xi**2 sum_i a_i prod_{j != i} (lam + b_j)

``g`` is monic of degree ``k + 2``.  Its roots are located without computing
them, from coefficient signs, interlacing with the poles ``-b_i`` and
Routh-Hurwitz determinants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ZenerModel, equilibrium_modulus

ZERO_RTOL = 1e-10
EPS = float(np.finfo(float).eps)
EXTENDED_PRECISION_K = 8


@dataclass(frozen=True)
class Polynomial:
    """Monic real polynomial, coefficients in descending degree."""

    coeffs: np.ndarray
    # Absolute rounding error bound per coefficient; defaults to the
    # representation error of each coefficient.
    coeff_error: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        if c[0] != 1.0:
            raise ValueError(f"polynomial must be monic, leading coefficient is {c[0]}")
        object.__setattr__(self, "coeffs", c)
        err = EPS * np.abs(c) if self.coeff_error is None else np.asarray(self.coeff_error, dtype=float)
        if err.shape != c.shape:
            raise ValueError("coeff_error must match the coefficients")
        object.__setattr__(self, "coeff_error", err)

    @classmethod
    def from_roots(cls, roots) -> "Polynomial":
        return cls(np.real_if_close(np.poly(np.asarray(roots))).real)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.coeffs))))

    def coefficient(self, power: int) -> float:
        """Coefficient of lam**power."""
        if power < 0 or power > self.degree:
            return 0.0
        return float(self.coeffs[self.degree - power])

    def __call__(self, x):
        return np.polyval(self.coeffs, x)

    def derivative_coeffs(self, order: int = 1) -> np.ndarray:
        c = self.coeffs
        for _ in range(order):
            c = np.polyder(c)
        return c

    def is_zero(self, value: float) -> bool:
        return abs(value) <= ZERO_RTOL * self.scale


@dataclass(frozen=True)
class FactoredCharPoly:
    reduced: Polynomial
    zero_power: int
    linear_factors: tuple[tuple[float, int], ...]

    @property
    def degree(self) -> int:
        return self.reduced.degree + self.zero_power + sum(p for _, p in self.linear_factors)


@dataclass(frozen=True)
class HurwitzTable:
    deltas: tuple[float, ...]
    sign_sequence: tuple[float, ...] | None
    variations: int | None
    singular: bool
    zero_flags: tuple[bool, ...]


@dataclass(frozen=True)
class RootClassification:
    n_left: int
    n_origin: int
    n_imag_pair: int
    n_right: int
    case_label: str
    degree: int
    predicted_reals: tuple[tuple[float, float], ...] = ()
    hurwitz: HurwitzTable | None = field(default=None, compare=False)

    @property
    def n_zero_real_part(self) -> int:
        return self.n_origin + self.n_imag_pair

    def counts(self) -> dict:
        return {
            "left": self.n_left,
            "zero": self.n_zero_real_part,
            "origin": self.n_origin,
            "imag_pair": self.n_imag_pair,
            "right": self.n_right,
        }


def _poly_mul_linear(coeffs, root_shift, dtype):
    # coeffs * (lam + root_shift)
    out = np.zeros(coeffs.size + 1, dtype=dtype)
    out[:-1] += coeffs
    out[1:] += root_shift * coeffs
    return out


def reduced_charpoly(m: ZenerModel, xi_norm: float) -> Polynomial:
    """g(lam) expanded by exact convolution of the linear factors.

    The attached error bound accounts for cancellation between the elastic
    and memory terms: it scales with the coefficients obtained when every
    ``a_i`` is replaced by ``|a_i|``.
    """
    dtype = np.longdouble if m.k > EXTENDED_PRECISION_K else float
    xi2 = dtype(xi_norm) ** 2
    prod_all = np.ones(1, dtype=dtype)
    for bi in m.b:
        prod_all = _poly_mul_linear(prod_all, dtype(bi), dtype)
    g = np.convolve(np.array([1, 0, dtype(m.c2) * xi2], dtype=dtype), prod_all)
    magnitude = g.copy()
    memory = np.zeros(m.k, dtype=dtype)
    memory_abs = np.zeros(m.k, dtype=dtype)
    for i, ai in enumerate(m.a):
        partial = np.ones(1, dtype=dtype)
        for j, bj in enumerate(m.b):
            if j != i:
                partial = _poly_mul_linear(partial, dtype(bj), dtype)
        memory += dtype(ai) * partial
        memory_abs += abs(dtype(ai)) * partial
    g[-m.k:] += xi2 * memory
    magnitude[-m.k:] += xi2 * memory_abs
    err = (m.k + 3) * EPS * np.asarray(magnitude, dtype=float)
    return Polynomial(np.asarray(g, dtype=float), err)


def factored_charpoly(m: ZenerModel, xi) -> FactoredCharPoly:
    xi_norm = float(np.linalg.norm(np.atleast_1d(xi)))
    return FactoredCharPoly(
        reduced=reduced_charpoly(m, xi_norm),
        zero_power=m.d - 1,
        linear_factors=tuple((bi, m.d - 1) for bi in m.b),
    )


def g_at_zero(m: ZenerModel, xi_norm: float) -> float:
    """g(0) = xi^2 * l * prod b_i."""
    return xi_norm**2 * equilibrium_modulus(m) * float(np.prod(m.b_arr))


def large_xi_relaxation_poly(m: ZenerModel) -> Polynomial:
    """Monic degree-k polynomial whose roots are the large-xi relaxation limits.

    These solve ``c2 + sum a_i / (lam + b_i) = 0``.
    """
    g = reduced_charpoly(m, 1.0).coeffs
    # g = lam^2 prod(lam+b) + [c2 prod(lam+b) + sum a_i prod_{j!=i}]; the bracket
    # is what survives after dividing by xi^2 and letting xi grow.
    lead = np.zeros_like(g)
    prod_all = np.ones(1)
    for bi in m.b:
        prod_all = _poly_mul_linear(prod_all, bi, float)
    lead[: prod_all.size] = prod_all
    rest = (g - lead)[2:]
    return Polynomial(rest / rest[0])


def hurwitz_matrix(p: Polynomial) -> np.ndarray:
    N = p.degree
    a = p.coeffs
    H = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            idx = 2 * j - i + 1
            if 0 <= idx <= N:
                H[i, j] = a[idx]
    return H


def hurwitz_table(p: Polynomial) -> HurwitzTable:
    """Hurwitz determinants and the Routh sign sequence.

    A determinant counts as zero when ``|D_i| <= 1e-10 * s**i`` with ``s`` the
    largest coefficient magnitude (at least 1), since ``D_i`` is a degree-i
    form in the coefficients.  When any determinant vanishes the sign count is
    left undefined.
    """
    if p.degree < 1:
        raise ValueError("Hurwitz table needs degree >= 1")
    H = hurwitz_matrix(p)
    N = p.degree
    deltas = tuple(float(np.linalg.det(H[:i, :i])) for i in range(1, N + 1))
    s = p.scale
    zero_flags = tuple(abs(dv) <= ZERO_RTOL * s ** (i + 1) for i, dv in enumerate(deltas))
    singular = any(zero_flags)
    if singular:
        return HurwitzTable(deltas, None, None, True, zero_flags)
    seq = [1.0, deltas[0]] + [deltas[i] / deltas[i - 1] for i in range(1, N)]
    variations = sum(1 for x, y in zip(seq, seq[1:]) if np.sign(x) != np.sign(y))
    return HurwitzTable(deltas, tuple(seq), variations, False, zero_flags)


def cauchy_bound(p: Polynomial) -> float:
    return 1.0 + float(np.max(np.abs(p.coeffs[1:]))) if p.degree > 0 else 1.0


def real_root_brackets(m: ZenerModel, p: Polynomial) -> tuple[tuple[float, float], ...]:
    """Intervals between consecutive points of ``-R, -b_k, ..., -b_1, 0, R`` where
    g changes sign strictly, so each holds at least one real root."""
    R = cauchy_bound(p)
    pts = [-R] + [-bi for bi in reversed(m.b)] + [0.0, R]
    vals = [float(p(x)) for x in pts]
    out = []
    for (x0, f0), (x1, f1) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
        if p.is_zero(f0) or p.is_zero(f1):
            continue
        if f0 * f1 < 0:
            out.append((x0, x1))
    return tuple(out)


def _result(m, p, label, left, origin=0, imag=0, right=0, table=None):
    if left + origin + imag + right != p.degree:
        raise AssertionError(f"inconsistent counts for case {label}")
    return RootClassification(
        n_left=left,
        n_origin=origin,
        n_imag_pair=imag,
        n_right=right,
        case_label=label,
        degree=p.degree,
        predicted_reals=real_root_brackets(m, p),
        hurwitz=table,
    )


def classify_analytic(m: ZenerModel, xi_norm: float) -> RootClassification:
    """Half-plane root counts of g without computing the roots."""
    if xi_norm < 0:
        raise ValueError("xi_norm must be non-negative")
    p = reduced_charpoly(m, xi_norm)
    k = m.k
    if xi_norm == 0:
        return _result(m, p, "zero-frequency", left=k, origin=2)
    g0 = p.coefficient(0)
    g1 = p.coefficient(1)
    sign_g0 = 0 if p.is_zero(g0) else int(np.sign(g0))
    sign_g1 = 0 if p.is_zero(g1) else int(np.sign(g1))
    table = hurwitz_table(p)

    if all(x < 0 for x in m.a):
        if sign_g0 > 0:
            return _result(m, p, "negative-a/g0>0", left=k + 2, table=table)
        if sign_g0 == 0:
            return _result(m, p, "negative-a/g0=0", left=k + 1, origin=1, table=table)
        return _result(m, p, "negative-a/g0<0", left=k + 1, right=1, table=table)

    if all(x > 0 for x in m.a):
        return _result(m, p, "positive-a", left=k, right=2, table=table)

    if k == 2:
        return _classify_mixed_k2(m, p, sign_g0, sign_g1, table)

    if not table.singular:
        return _result(m, p, "routh-hurwitz", left=p.degree - table.variations,
                       right=table.variations, table=table)
    from .roots import numeric_counts, poly_roots

    c = numeric_counts(poly_roots(p))
    return _result(m, p, "numeric-fallback", left=c["left"], origin=c["origin"],
                   imag=c["imag_pair"], right=c["right"], table=table)


def _classify_mixed_k2(m, p, sign_g0, sign_g1, table):
    s = m.b[0] + m.b[1]
    g0 = p.coefficient(0)
    g1 = p.coefficient(1)
    scale = p.scale
    delta2 = s * p.coefficient(2) - g1
    delta3 = g1 * delta2 - g0 * s * s
    d2_zero = abs(delta2) <= ZERO_RTOL * scale**2
    d3_zero = abs(delta3) <= ZERO_RTOL * scale**3
    sd2 = 0 if d2_zero else int(np.sign(delta2))
    sd3 = 0 if d3_zero else int(np.sign(delta3))
    tag = "mixed-k2"

    if sign_g0 > 0:
        if sd3 == 0:
            return _result(m, p, f"{tag}/g0>0/imaginary-pair", left=2, imag=2, table=table)
        if sd2 > 0 and sd3 > 0:
            return _result(m, p, f"{tag}/g0>0/stable", left=4, table=table)
        return _result(m, p, f"{tag}/g0>0/unstable-pair", left=2, right=2, table=table)

    if sign_g0 == 0:
        if sign_g1 > 0:
            if sd2 > 0:
                return _result(m, p, f"{tag}/g0=0/g1>0/stable", left=3, origin=1, table=table)
            if sd2 < 0:
                return _result(m, p, f"{tag}/g0=0/g1>0/unstable-pair", left=1, origin=1,
                               right=2, table=table)
            return _result(m, p, f"{tag}/g0=0/g1>0/imaginary-pair", left=1, origin=1,
                           imag=2, table=table)
        if sign_g1 == 0:
            return _result(m, p, f"{tag}/g0=0/g1=0", left=2, origin=2, table=table)
        return _result(m, p, f"{tag}/g0=0/g1<0", left=2, origin=1, right=1, table=table)

    if sd3 == 0:
        if sign_g1 > 0:
            return _result(m, p, f"{tag}/g0<0/imaginary-pair", left=1, imag=2, right=1,
                           table=table)
        return _result(m, p, f"{tag}/g0<0/real-pair", left=3, right=1, table=table)
    if sd2 < 0 and sd3 < 0:
        return _result(m, p, f"{tag}/g0<0/three-unstable", left=1, right=3, table=table)
    return _result(m, p, f"{tag}/g0<0/one-unstable", left=3, right=1, table=table)


def full_classification(m: ZenerModel, xi) -> RootClassification:
    """Counts for the full spectrum of Phi, including the factor roots."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xi_norm = float(np.linalg.norm(xi))
    if xi_norm == 0:
        raise ValueError("full classification needs xi != 0")
    base = classify_analytic(m, xi_norm)
    extra = m.d - 1
    return RootClassification(
        n_left=base.n_left + m.k * extra,
        n_origin=base.n_origin + extra,
        n_imag_pair=base.n_imag_pair,
        n_right=base.n_right,
        case_label=base.case_label,
        degree=m.n,
        predicted_reals=base.predicted_reals,
        hurwitz=base.hurwitz,
    )
