"""Symbol matrices of the first-order relaxation system and their spectral data.

State packing is ``(u, v_1..v_d, w_1[1..d], ..., w_k[1..d])``.  With that
ordering the Fourier-transformed system reads ``U_t + (B + i A(xi)) U = 0``
and the mode generator is ``Phi = -(B + i A(xi))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expm import matrix_exp, norm2
from .model import ZenerModel

H_EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class SymbolSet:
    A: np.ndarray
    B: np.ndarray
    Phi: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class SpectralCertificate:
    eigenvalues: tuple[float, float, float]
    multiplicities: tuple[int, int, int]
    E: tuple[np.ndarray, np.ndarray, np.ndarray]
    H: np.ndarray
    H_sqrt: np.ndarray
    cond_bound: float

    @property
    def E1(self):
        return self.E[0]

    @property
    def E2(self):
        return self.E[1]

    @property
    def E3(self):
        return self.E[2]


@dataclass(frozen=True)
class StrangCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def as_xi(m: ZenerModel, xi) -> np.ndarray:
    """Coerce a frequency to a length-d float vector."""
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != m.d:
        raise ValueError(f"xi must have {m.d} components, got shape {arr.shape}")
    return arr


def v_slice(m: ZenerModel) -> slice:
    return slice(1, 1 + m.d)


def w_slice(m: ZenerModel, i: int) -> slice:
    start = 1 + m.d + i * m.d
    return slice(start, start + m.d)


def symbol_A(m: ZenerModel, xi) -> np.ndarray:
    xi = as_xi(m, xi)
    A = np.zeros((m.n, m.n))
    v = v_slice(m)
    A[0, v] = xi
    A[v, 0] = m.c2 * xi
    for i, ai in enumerate(m.a):
        A[w_slice(m, i), 0] = -ai * xi
    return A


def symbol_B(m: ZenerModel) -> np.ndarray:
    B = np.zeros((m.n, m.n))
    v = v_slice(m)
    eye = np.eye(m.d)
    for i, bi in enumerate(m.b):
        w = w_slice(m, i)
        B[v, w] = eye
        B[w, w] = bi * eye
    return B


def build_symbol(m: ZenerModel, xi) -> SymbolSet:
    xi = as_xi(m, xi)
    A = symbol_A(m, xi)
    B = symbol_B(m)
    return SymbolSet(A=A, B=B, Phi=-(B + 1j * A), xi=xi)


def phi_matrix(m: ZenerModel, xi) -> np.ndarray:
    return build_symbol(m, xi).Phi


def coordinate_matrices(m: ZenerModel) -> list[np.ndarray]:
    """The individual A_j, recovered as A(e_j)."""
    return [symbol_A(m, np.eye(m.d)[j]) for j in range(m.d)]


def e1_norm_sq(m: ZenerModel) -> float:
    """Closed-form ||E1||^2, the same for every nonzero xi."""
    return 1.0 + float(np.sum(m.a_arr**2)) / m.c2**2


def e23_norm_sq(m: ZenerModel) -> float:
    """Closed-form ||E2||^2 = ||E3||^2."""
    return (1.0 + m.c2) / 4.0 * (1.0 / m.c2 + 1.0 + float(np.sum(m.a_arr**2)) / m.c2**2)


def cond_bound_constant(m: ZenerModel) -> float:
    """Uniform bound C on ||P^-1|| ||P|| with C^2 = 3 * sum_j ||E_j||^2."""
    return math.sqrt(3.0 * (e1_norm_sq(m) + 2.0 * e23_norm_sq(m)))


def spectral_certificate(m: ZenerModel, xi) -> SpectralCertificate:
    """Spectral projectors of A(xi), the symmetrizer H and its conditioning."""
    xi = as_xi(m, xi)
    r = float(np.linalg.norm(xi))
    if r == 0.0:
        raise ValueError("spectral certificate needs xi != 0: the eigenvalues coincide at xi = 0")
    A = symbol_A(m, xi)
    lam = (0.0, m.c * r, -m.c * r)
    ident = np.eye(m.n)
    E = []
    for j in range(3):
        P = ident.copy()
        for i in range(3):
            if i != j:
                P = P @ (A - lam[i] * ident) / (lam[j] - lam[i])
        E.append(P)
    H = sum(Ej.T @ Ej for Ej in E)
    H = 0.5 * (H + H.T)
    w, V = np.linalg.eigh(H)
    w = np.maximum(w, H_EIG_FLOOR)
    H_sqrt = (V * np.sqrt(w)) @ V.T
    return SpectralCertificate(
        eigenvalues=lam,
        multiplicities=(m.n - 2, 1, 1),
        E=tuple(E),
        H=H,
        H_sqrt=H_sqrt,
        cond_bound=math.sqrt(w[-1] / w[0]),
    )


def random_unit_vectors(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    x = rng.standard_normal((count, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def hyperbolicity_probe(
    m: ZenerModel,
    n_xi: int,
    t_max: float,
    seed: int | np.random.Generator = 0,
    n_t: int = 64,
) -> float:
    """Sampled sup of ||exp(i t A(xi))|| over random unit xi and t in (0, t_max].

    Times are log-spaced over four decades below ``t_max``.
    """
    if n_xi < 1 or t_max <= 0:
        raise ValueError("need n_xi >= 1 and t_max > 0")
    rng = np.random.default_rng(seed)
    times = np.geomspace(t_max * 1e-4, t_max, n_t)
    worst = 0.0
    for xi in random_unit_vectors(rng, n_xi, m.d):
        iA = 1j * symbol_A(m, xi)
        for t in times:
            worst = max(worst, norm2(matrix_exp(iA, t)))
    return worst


def strang_bound_check(m: ZenerModel, xi, t: float) -> StrangCheck:
    """Compare ||exp(t Phi)|| with C exp(t C ||B||)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    sym = build_symbol(m, xi)
    C = cond_bound_constant(m)
    lhs = norm2(matrix_exp(sym.Phi, t))
    exponent = t * C * norm2(sym.B)
    rhs = C * math.exp(exponent) if exponent <= 709.0 else math.inf
    return StrangCheck(lhs=lhs, rhs=rhs)
