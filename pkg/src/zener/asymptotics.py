"""Perturbation expansions of the mode eigenvalues for small and large |xi|.

Both expansions are written in the complex variable ``zeta = i|xi|``.  Near
``zeta = 0`` the relaxation branches start at ``-b_j`` and the acoustic pair
at the origin; near ``zeta = oo`` one writes ``lam = zeta * mu(1/zeta)`` and
expands ``mu`` around the eigenvalues ``{0, +c, -c}`` of the symbol.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .charpoly import large_xi_relaxation_poly
from .model import ZenerModel, equilibrium_modulus
from .roots import phi_eigenvalues, poly_roots

DEGENERATE_RTOL = 1e-12
NOISE_FLOOR = 1e-13
AMBIGUITY_RATIO = 2.0


class Regime(enum.Enum):
    Small = "small"
    Large = "large"


@dataclass(frozen=True)
class SeriesBranch:
    """Coefficients of ``lam(zeta) = sum_n coeffs[n] zeta**n``."""

    name: str
    coeffs: tuple[complex, ...]

    def __call__(self, zeta: complex) -> complex:
        return complex(sum(c * zeta**n for n, c in enumerate(self.coeffs)))


@dataclass(frozen=True)
class SmallXiExpansion:
    branch_relaxation: tuple[SeriesBranch, ...]
    branch_acoustic: tuple[SeriesBranch, SeriesBranch]
    degenerate: bool
    l: float

    @property
    def branches(self) -> tuple[SeriesBranch, ...]:
        return self.branch_relaxation + self.branch_acoustic

    def evaluate(self, xi_norm: float) -> np.ndarray:
        zeta = 1j * xi_norm
        return np.array([br(zeta) for br in self.branches])

    def second_order_trace(self) -> complex:
        """Sum of the zeta^2 coefficients over all branches (zero by the trace identity)."""
        return complex(sum(br.coeffs[2] for br in self.branches))


@dataclass(frozen=True)
class LargeXiExpansion:
    """``lam = zeta mu0 + mu1 + mu2 / zeta + ...`` per branch, ``zeta = i|xi|``.

    Branch order is the k relaxation branches followed by the acoustic
    branches for ``mu0 = +c`` and ``mu0 = -c``.
    """

    mu0: tuple[float, ...]
    mu1_relaxation: np.ndarray
    mu1_acoustic: float
    mu2_acoustic: tuple[float, float]
    names: tuple[str, ...] = field(default=())

    def evaluate(self, xi_norm: float) -> np.ndarray:
        zeta = 1j * xi_norm
        k = self.mu1_relaxation.size
        out = np.empty(k + 2, dtype=complex)
        out[:k] = self.mu1_relaxation
        for j, mu2 in enumerate(self.mu2_acoustic):
            out[k + j] = zeta * self.mu0[k + j] + self.mu1_acoustic + mu2 / zeta
        return out

    @property
    def acoustic_rate(self) -> float:
        return self.mu1_acoustic

    @property
    def growth_limit(self) -> float:
        """Largest real part the eigenvalues approach as |xi| -> oo."""
        rel = float(np.max(self.mu1_relaxation.real)) if self.mu1_relaxation.size else -math.inf
        return max(rel, self.mu1_acoustic)


@dataclass(frozen=True)
class ScanRow:
    xi: float
    branch: str
    numeric: complex
    series: complex
    abs_err: float
    error: float
    flagged: bool


@dataclass(frozen=True)
class ExpansionScan:
    regime: Regime
    rows: tuple[ScanRow, ...]
    slopes: dict

    def errors(self, branch: str) -> tuple[np.ndarray, np.ndarray]:
        pts = [(r.xi, r.error) for r in self.rows if r.branch == branch]
        x, e = zip(*pts)
        return np.array(x), np.array(e)


def _branch_names(k: int) -> tuple[str, ...]:
    return tuple(f"relaxation-{j}" for j in range(k)) + ("acoustic+", "acoustic-")


def small_xi_expansion(m: ZenerModel) -> SmallXiExpansion:
    a, b = m.a_arr, m.b_arr
    l = equilibrium_modulus(m)
    names = _branch_names(m.k)
    relax = tuple(
        SeriesBranch(names[j], (complex(-b[j]), 0j, complex(a[j] / b[j] ** 2), 0j))
        for j in range(m.k)
    )
    degenerate = abs(l) <= DEGENERATE_RTOL * m.c2
    if degenerate:
        acoustic = (
            SeriesBranch(names[-2], (0j, 0j, complex(-np.sum(a / b**2)))),
            SeriesBranch(names[-1], (0j, 0j, 0j)),
        )
    else:
        root = complex(np.sqrt(complex(l)))
        second = complex(-np.sum(a / b**2) / 2.0)
        acoustic = (
            SeriesBranch(names[-2], (0j, root, second)),
            SeriesBranch(names[-1], (0j, -root, second)),
        )
    return SmallXiExpansion(relax, acoustic, degenerate, l)


def large_xi_expansion(m: ZenerModel) -> LargeXiExpansion:
    a, b, c = m.a_arr, m.b_arr, m.c
    r = poly_roots(large_xi_relaxation_poly(m)).expanded()
    r = r[np.lexsort((r.imag, r.real))]
    sa = float(np.sum(a))
    mag = float(np.sum(a * b)) / (2 * c**3) + 3 * sa**2 / (8 * c**5)
    return LargeXiExpansion(
        mu0=(0.0,) * m.k + (c, -c),
        mu1_relaxation=r,
        mu1_acoustic=sa / (2 * m.c2),
        mu2_acoustic=(-mag, mag),
        names=_branch_names(m.k),
    )


def _match(numeric: np.ndarray, series: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Greedy minimum-distance assignment of numeric roots to series branches.

    Returns the index of the numeric root for each branch and an ambiguity
    flag: a branch is flagged when another unused root sits within
    ``AMBIGUITY_RATIO`` times the chosen distance.
    """
    D = np.abs(series[:, None] - numeric[None, :])
    assign = np.full(series.size, -1)
    flagged = np.zeros(series.size, dtype=bool)
    free_b = set(range(series.size))
    free_n = set(range(numeric.size))
    while free_b:
        bi, ni = min(((i, j) for i in free_b for j in free_n), key=lambda ij: D[ij])
        others = [D[bi, j] for j in free_n if j != ni]
        if others and min(others) < AMBIGUITY_RATIO * D[bi, ni]:
            flagged[bi] = True
        assign[bi] = ni
        free_b.remove(bi)
        free_n.remove(ni)
    return assign, flagged


def _slope(x: np.ndarray, e: np.ndarray) -> float:
    keep = e > NOISE_FLOOR
    if np.count_nonzero(keep) < 2:
        return math.nan
    return float(np.polyfit(np.log(x[keep]), np.log(e[keep]), 1)[0])


def expansion_error_scan(m: ZenerModel, regime: Regime | str, grid) -> ExpansionScan:
    """Compare the series against computed eigenvalues on a grid of |xi|.

    The error used for the slope fit is ``|numeric - series|`` except for the
    acoustic branches in the large regime, where only the real part is
    expanded to sufficient order and the real-part error is used.  Errors at
    or below ``NOISE_FLOOR`` are excluded from the fits.
    """
    regime = Regime(regime) if isinstance(regime, str) else regime
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be non-empty and strictly increasing")
    if regime is Regime.Small:
        if grid[0] <= 0 or grid[-1] > 0.1:
            raise ValueError("small regime needs grid values in (0, 0.1]")
        exp = small_xi_expansion(m)
        names = tuple(br.name for br in exp.branches)
    else:
        if grid[0] < 10:
            raise ValueError("large regime needs grid values >= 10")
        exp = large_xi_expansion(m)
        names = exp.names
    m1 = m.with_dim(1)
    rows = []
    for xi in grid:
        numeric = phi_eigenvalues(m1, [xi]).expanded()
        series = exp.evaluate(float(xi))
        assign, flagged = _match(numeric, series)
        for j, name in enumerate(names):
            z = numeric[assign[j]]
            abs_err = abs(z - series[j])
            err = abs_err
            if regime is Regime.Large and name.startswith("acoustic"):
                err = abs(z.real - series[j].real)
            rows.append(ScanRow(float(xi), name, complex(z), complex(series[j]), float(abs_err),
                                float(err), bool(flagged[j])))
    scan = ExpansionScan(regime, tuple(rows), {})
    for name in names:
        scan.slopes[name] = _slope(*scan.errors(name))
    return scan
