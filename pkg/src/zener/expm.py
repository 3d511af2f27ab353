"""Matrix exponential by scaling and squaring with diagonal Pade approximants.

Degree selection and the theta thresholds follow Higham's 2005 analysis,
which bounds the relative backward error by the unit roundoff in double
precision.
"""

from __future__ import annotations

import math

import numpy as np

SATURATION_EXPONENT = 700.0

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
        16380.0, 182.0, 1.0,
    ),
}

_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


class ExpmSaturation(OverflowError):
    """exp(tM) would overflow double precision."""

    def __init__(self, exponent: float):
        super().__init__(f"matrix exponential saturates: t*max(Re lambda) = {exponent:.4g} > {SATURATION_EXPONENT}")
        self.exponent = exponent


def _pade_uv(A: np.ndarray, m: int):
    b = _PADE_COEFFS[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    U = b[1] * ident
    V = b[0] * ident
    power = ident
    for j in range(1, m // 2 + 1):
        power = power @ A2
        U = U + b[2 * j + 1] * power
        V = V + b[2 * j] * power
    return A @ U, V


def expm(M: np.ndarray) -> np.ndarray:
    """exp(M) for a square real or complex matrix."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.issubdtype(M.dtype, np.inexact):
        M = M.astype(float)
    n = M.shape[0]
    if n == 0:
        return M.copy()
    norm1 = np.linalg.norm(M, 1)
    if norm1 == 0.0:
        return np.eye(n, dtype=M.dtype)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_uv(M, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA[13]))))
    A = M / 2.0**s
    U, V = _pade_uv(A, 13)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def matrix_exp(M: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(t*M) for t >= 0, raising ExpmSaturation when it would overflow."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    M = np.asarray(M)
    if t == 0:
        return np.eye(M.shape[0], dtype=np.result_type(M.dtype, float))
    if t * np.linalg.norm(M, 2) > SATURATION_EXPONENT:
        growth = t * float(np.max(np.linalg.eigvals(M).real))
        if growth > SATURATION_EXPONENT:
            raise ExpmSaturation(growth)
    R = expm(t * M)
    if not np.all(np.isfinite(R)):
        raise ExpmSaturation(float("inf"))
    return R


def norm2(M: np.ndarray) -> float:
    """Operator 2-norm (largest singular value)."""
    return float(np.linalg.norm(M, 2))
