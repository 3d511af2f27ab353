"""Random and constructed model families covering every root-location regime.

Used by the verification suite and the tests.  Constructions that need an
exact degeneracy (a vanishing constant term, a vanishing Hurwitz determinant)
solve for the parameters so that the reduced polynomial at ``|xi| = 1`` has a
prescribed factorization.
"""

from __future__ import annotations

import numpy as np

from .model import ZenerModel, new_model

B_RANGE = (0.2, 5.0)
A_RANGE = (0.1, 3.0)
C2_RANGE = (0.5, 4.0)
MIN_B_GAP = 0.05


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_b(rng: np.random.Generator, k: int) -> np.ndarray:
    while True:
        b = np.sort(rng.uniform(*B_RANGE, size=k))
        if k == 1 or np.min(np.diff(b)) > MIN_B_GAP:
            return b


def random_model(rng, k=None, d=None, signs: str = "any") -> ZenerModel:
    """Random model; ``signs`` is one of "any", "negative", "positive", "mixed"."""
    rng = _rng(rng)
    k = int(rng.integers(1, 6)) if k is None else k
    d = int(rng.integers(1, 4)) if d is None else d
    b = random_b(rng, k)
    mag = rng.uniform(*A_RANGE, size=k)
    if signs == "negative":
        a = -mag
    elif signs == "positive":
        a = mag
    elif signs == "mixed":
        if k < 2:
            raise ValueError("mixed signs need k >= 2")
        while True:
            s = rng.choice([-1.0, 1.0], size=k)
            if abs(s.sum()) < k:
                break
        a = s * mag
    else:
        a = rng.choice([-1.0, 1.0], size=k) * mag
    return new_model(rng.uniform(*C2_RANGE), a, b, d)


def random_absorbing(rng, k=None, d=None) -> ZenerModel:
    """All a_i < 0 and positive equilibrium modulus."""
    rng = _rng(rng)
    base = random_model(rng, k, d, "negative")
    c2 = -float(np.sum(base.a_arr / base.b_arr)) + rng.uniform(0.1, 3.0)
    return new_model(c2, base.a, base.b, base.d)


def tuned_zero_equilibrium(rng, k=None, d=1) -> ZenerModel:
    """All a_i < 0 with c2 chosen so that l = 0 (hence g(0) = 0)."""
    rng = _rng(rng)
    base = random_model(rng, k, d, "negative")
    return new_model(-float(np.sum(base.a_arr / base.b_arr)), base.a, base.b, base.d)


def negative_equilibrium(rng, k=None, d=1) -> ZenerModel:
    """All a_i < 0 with l < 0."""
    rng = _rng(rng)
    base = random_model(rng, k, d, "negative")
    mass = -float(np.sum(base.a_arr / base.b_arr))
    return new_model(mass * rng.uniform(0.1, 0.95), base.a, base.b, base.d)


def random_positive(rng, k=None, d=1) -> ZenerModel:
    return random_model(_rng(rng), k, d, "positive")


def random_mixed_k2(rng, d=1) -> ZenerModel:
    return random_model(_rng(rng), 2, d, "mixed")


def mixed_k2_zero_constant(rng, d=1) -> ZenerModel:
    """k = 2, opposite-sign a, c2 chosen so that g(0) = 0."""
    rng = _rng(rng)
    while True:
        base = random_model(rng, 2, d, "mixed")
        c2 = -float(np.sum(base.a_arr / base.b_arr))
        if c2 > 0.05:
            return new_model(c2, base.a, base.b, d)


def _solve_quadratic_factorization(b1, b2, q, p, with_zero=False):
    """Parameters (c2, a1, a2) with g(lam) = (lam^2 + q)(lam^2 + s lam + p) at |xi| = 1,
    or lam (lam + s)(lam^2 + q) when ``with_zero``."""
    s = b1 + b2
    if with_zero:
        c2 = q - b1 * b2
        lin, const = s * q, 0.0
    else:
        c2 = p + q - b1 * b2
        lin, const = s * q, p * q
    # a1 + a2 = lin - c2 s ;  a1 b2 + a2 b1 = const - c2 b1 b2
    M = np.array([[1.0, 1.0], [b2, b1]])
    rhs = np.array([lin - c2 * s, const - c2 * b1 * b2])
    a1, a2 = np.linalg.solve(M, rhs)
    return c2, a1, a2


def _construct(rng, d, draw):
    rng = _rng(rng)
    for _ in range(10000):
        b1, b2 = random_b(rng, 2)
        c2, a1, a2 = draw(rng, b1, b2)
        if c2 > 0.05 and a1 * a2 < 0 and min(abs(a1), abs(a2)) > 1e-3:
            return new_model(c2, [a1, a2], [b1, b2], d)
    raise RuntimeError("construction failed to find admissible parameters")


def imaginary_pair_stable(rng, d=1) -> ZenerModel:
    """k = 2 mixed, g(0) > 0, last Hurwitz determinant zero: roots +-i omega."""
    def draw(rng, b1, b2):
        return _solve_quadratic_factorization(b1, b2, rng.uniform(0.2, 6.0), rng.uniform(0.2, 6.0))
    return _construct(rng, d, draw)


def imaginary_pair_negative_g0(rng, d=1) -> ZenerModel:
    """k = 2 mixed, g(0) < 0, g'(0) > 0, Hurwitz determinant zero."""
    def draw(rng, b1, b2):
        return _solve_quadratic_factorization(b1, b2, rng.uniform(0.2, 6.0), -rng.uniform(0.2, 6.0))
    return _construct(rng, d, draw)


def real_pair_negative_g0(rng, d=1) -> ZenerModel:
    """k = 2 mixed, g(0) < 0, g'(0) < 0, Hurwitz determinant zero: roots +-omega."""
    def draw(rng, b1, b2):
        return _solve_quadratic_factorization(b1, b2, -rng.uniform(0.2, 6.0), rng.uniform(0.2, 6.0))
    return _construct(rng, d, draw)


def zero_with_imaginary_pair(rng, d=1) -> ZenerModel:
    """k = 2 mixed, g(0) = 0, g'(0) > 0 and Delta_2 = 0: roots 0, -(b1+b2), +-i omega."""
    def draw(rng, b1, b2):
        return _solve_quadratic_factorization(b1, b2, b1 * b2 + rng.uniform(0.2, 6.0), 0.0, with_zero=True)
    return _construct(rng, d, draw)


def double_zero(c2: float = 1.0, b1: float = 1.0, b2: float = 2.0, d: int = 1) -> ZenerModel:
    """k = 2 with g(0) = g'(0) = 0 for every xi: a non-trivial Jordan block at 0."""
    a1 = c2 * b1 * b1 / (b2 - b1)
    a2 = -c2 * (b1 + b2) - a1
    return new_model(c2, [a1, a2], [b1, b2], d)


def random_double_zero(rng, d=1) -> ZenerModel:
    rng = _rng(rng)
    b1, b2 = random_b(rng, 2)
    return double_zero(rng.uniform(*C2_RANGE), b1, b2, d)


def three_unstable_negative_g0(rng, d=1) -> ZenerModel:
    """k = 2 mixed, g(0) < 0 with three roots in the right half-plane.

    Rare under uniform sampling (it needs large |a_i|), so the roots are placed
    directly: one negative root balancing the trace, a complex pair and a real
    root with positive real parts.
    """
    rng = _rng(rng)
    for _ in range(100000):
        b1, b2 = random_b(rng, 2)
        s = b1 + b2
        x, w, y = rng.uniform(0.01, 2.0), rng.uniform(0.1, 5.0), rng.uniform(0.01, 3.0)
        coeffs = np.poly([-(s + 2 * x + y), x + 1j * w, x - 1j * w, y]).real
        c2 = coeffs[2] - b1 * b2
        if c2 <= 0.05:
            continue
        a1, a2 = np.linalg.solve([[1.0, 1.0], [b2, b1]], [coeffs[3] - c2 * s, coeffs[4] - c2 * b1 * b2])
        if a1 * a2 < 0:
            return new_model(c2, [a1, a2], [b1, b2], d)
    raise RuntimeError("construction failed to find admissible parameters")
