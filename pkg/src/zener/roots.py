"""Numerical roots of the reduced polynomial and the full spectrum of Phi.

Roots are found simultaneously with the Aberth-Ehrlich iteration, polished by
Newton steps, symmetrized under conjugation and grouped into clusters whose
size estimates the multiplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charpoly import Polynomial, full_classification, reduced_charpoly
from .model import ZenerModel
from .symbol import phi_matrix

MAX_ITER = 200
CLUSTER_RTOL = 1e-7
LOOSE_CLUSTER_RTOL = 1e-3
# A loose cluster is a multiple root when p and its derivatives at the center
# stay within this factor of the coefficient rounding bound.
MULTIPLE_ROOT_FACTOR = 1e3
RE_ZERO_BAND = 1e-9
RANK_RTOL = 1e-10
DENSE_CHECK_MAX_N = 50
# Injected factor roots merge with computed roots only when they coincide to roundoff.
MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class RootSet:
    """Distinct root clusters with multiplicities.

    ``roots[i]`` is the centroid of a cluster of ``multiplicities[i]`` raw
    roots; ``residuals[i]`` is ``|g(roots[i])|``.
    """

    roots: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray
    method: str
    converged: bool = True
    iterations: int = 0
    dense_distance: float | None = None

    @property
    def degree(self) -> int:
        return int(np.sum(self.multiplicities))

    def expanded(self) -> np.ndarray:
        return np.repeat(self.roots, self.multiplicities)


@dataclass(frozen=True)
class ZeroEigenStructure:
    algebraic: int
    geometric: int

    @property
    def trivial_jordan(self) -> bool:
        return self.algebraic == self.geometric


@dataclass(frozen=True)
class CrossValidation:
    agree: bool
    analytic: dict
    numeric: dict
    case_label: str
    mismatch: dict | None = None


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    """Points on a circle about the root centroid, radius from a Fujiwara bound
    of the shifted polynomial."""
    n = c.size - 1
    center = -c[1] / n
    # Taylor coefficients of p(center + y) by repeated synthetic division.
    q = c.astype(complex)
    taylor = []
    for _ in range(n + 1):
        q, r = np.polydiv(q, np.array([1.0, -center]))
        taylor.append(r[-1] if r.size else 0.0)
    taylor = np.array(taylor[::-1])
    mags = [abs(taylor[j] / taylor[0]) ** (1.0 / j) for j in range(1, n + 1) if taylor[j] != 0]
    radius = 2.0 * max(mags) if mags else 1.0
    if not np.isfinite(radius) or radius == 0.0:
        radius = 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return center + radius * np.exp(1j * angles)


def _aberth(c: np.ndarray):
    n = c.size - 1
    z = _initial_guesses(c)
    dc = np.polyder(c)
    eps = np.finfo(float).eps
    converged = np.zeros(n, dtype=bool)
    it = 0
    for it in range(1, MAX_ITER + 1):
        pz = np.polyval(c, z)
        dpz = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            corr = ratio / (1.0 - ratio * inv.sum(axis=1))
        corr = np.where(np.isfinite(corr), corr, 0.0)
        # Error bound on p(z) from rounding in Horner's rule.
        bound = eps * np.polyval(np.abs(c), np.abs(z)) * 4 * n
        small = np.abs(pz) <= bound
        corr = np.where(converged | small, 0.0, corr)
        z = z - corr
        converged |= small | (np.abs(corr) <= 4 * eps * np.abs(z))
        if converged.all():
            break
    return z, bool(converged.all()), it


def _newton_polish(c: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    dc = np.polyder(c)
    z = z.copy()
    for _ in range(steps):
        pz = np.polyval(c, z)
        dpz = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            trial = z - pz / dpz
        ok = np.isfinite(trial) & (np.abs(np.polyval(c, trial)) < np.abs(pz))
        z = np.where(ok, trial, z)
    return z


def _conjugate_symmetrize(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    n = z.size
    used = np.zeros(n, dtype=bool)
    order = np.argsort(-np.abs(z.imag))
    for i in order:
        if used[i]:
            continue
        used[i] = True
        if z[i].imag == 0:
            continue
        cand = [j for j in range(n) if not used[j]]
        if not cand:
            z[i] = z[i].real
            continue
        j = min(cand, key=lambda j: abs(z[j] - np.conj(z[i])))
        dist = abs(z[j] - np.conj(z[i]))
        if abs(z[i].imag) <= dist:
            # No partner closer than the imaginary part itself: a real root.
            z[i] = z[i].real
            continue
        used[j] = True
        re = 0.5 * (z[i].real + z[j].real)
        im = 0.5 * (abs(z[i].imag) + abs(z[j].imag))
        z[i] = complex(re, math.copysign(im, z[i].imag))
        z[j] = np.conj(z[i])
    return z


def _refine_multiple(c: np.ndarray, z0: complex, mult: int) -> complex:
    """Newton on the (mult-1)-th derivative, where an m-fold root is simple."""
    dc = c
    for _ in range(mult - 1):
        dc = np.polyder(dc)
    ddc = np.polyder(dc)
    z = complex(z0)
    for _ in range(30):
        d = np.polyval(ddc, z)
        if d == 0:
            break
        step = np.polyval(dc, z) / d
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


def _is_multiple_root(c: np.ndarray, noise: np.ndarray, center: complex, mult: int) -> bool:
    """Whether p, p', ..., p^(mult-1) vanish at ``center`` up to coefficient noise."""
    r = abs(center)
    dc, dn = c, noise
    for _ in range(mult):
        if abs(np.polyval(dc, center)) > MULTIPLE_ROOT_FACTOR * np.polyval(dn, r):
            return False
        dc, dn = np.polyder(dc), np.polyder(dn)
    return True


def cluster_roots(z: np.ndarray, c: np.ndarray | None = None, noise: np.ndarray | None = None):
    """Group raw roots into (center, multiplicity) clusters.

    Without coefficients, roots closer than ``1e-7 * (1 + |z|)`` merge at
    their mean.  With coefficients every merge is tested: the point where the
    (m-1)-th derivative vanishes must be numerically an m-fold root, and it
    becomes the cluster center.  A second pass then widens the radius to
    ``1e-3 * (1 + |z|)`` to catch the ``eps**(1/m)`` splitting of an m-fold
    root.  Testing the tight pass too keeps distinct roots that are merely
    close, such as the two roots near 0 when g(0) = 0 and |xi| is small.  ``noise`` bounds the absolute
    error of each coefficient and defaults to their representation error.
    """
    if c is not None and noise is None:
        noise = np.finfo(float).eps * np.abs(c)
    groups = [([complex(x)], complex(x)) for x in z]

    def merge_pass(rtol, check):
        changed = True
        while changed:
            changed = False
            for i in range(len(groups)):
                for j in range(i + 1, len(groups)):
                    (gi, ci), (gj, cj) = groups[i], groups[j]
                    scale = 1.0 + max(abs(ci), abs(cj))
                    spread = max(abs(x - y) for x in gi for y in gj)
                    if spread > rtol * scale:
                        continue
                    merged = gi + gj
                    center = complex(np.mean(merged))
                    if check:
                        center = _refine_multiple(c, center, len(merged))
                        if abs(center - np.mean(merged)) > rtol * scale or not _is_multiple_root(
                            c, noise, center, len(merged)
                        ):
                            continue
                    groups[i] = (merged, center)
                    del groups[j]
                    changed = True
                    break
                if changed:
                    break

    merge_pass(CLUSTER_RTOL, c is not None)
    if c is not None:
        merge_pass(LOOSE_CLUSTER_RTOL, True)
    centers = np.array([ctr for _, ctr in groups], dtype=complex)
    # Real polynomials: a cluster centered on the real axis up to rounding is real.
    if c is not None:
        centers = np.where(np.abs(centers.imag) <= 1e-14 * (1 + np.abs(centers)), centers.real + 0j, centers)
    mult = np.array([len(g) for g, _ in groups], dtype=int)
    order = np.lexsort((centers.imag, centers.real))
    return centers[order], mult[order]


def poly_roots(p: Polynomial) -> RootSet:
    """All roots of a monic real polynomial by Aberth-Ehrlich iteration."""
    c = np.asarray(p.coeffs, dtype=float)
    if c.size < 2:
        raise ValueError("polynomial degree must be >= 1")
    # Exact trailing zeros are roots at the origin; strip them before iterating.
    n_zero = 0
    while c.size > 1 and c[-1] == 0.0:
        c = c[:-1]
        n_zero += 1
    raw = np.zeros(0, dtype=complex)
    converged, iters = True, 0
    if c.size == 2:
        raw = np.array([-c[1] + 0j])
    elif c.size > 2:
        raw, converged, iters = _aberth(c)
        raw = _newton_polish(c, raw)
        raw = _conjugate_symmetrize(raw)
    raw = np.concatenate([raw, np.zeros(n_zero, dtype=complex)])
    centers, mult = cluster_roots(raw, p.coeffs, p.coeff_error)
    residuals = np.abs(p(centers))
    return RootSet(centers, mult, residuals, "aberth-ehrlich", converged, iters)


def merge_rootsets(parts: list[tuple[np.ndarray, np.ndarray]], method: str, residual_fn) -> RootSet:
    roots = np.concatenate([r for r, _ in parts]) if parts else np.zeros(0, complex)
    mult = np.concatenate([m for _, m in parts]) if parts else np.zeros(0, int)
    out_r, out_m = [], []
    for r, k in zip(roots, mult):
        for idx, existing in enumerate(out_r):
            if abs(existing - r) <= MERGE_RTOL * (1 + abs(r)):
                out_r[idx] = (existing * out_m[idx] + r * k) / (out_m[idx] + k)
                out_m[idx] += k
                break
        else:
            out_r.append(complex(r))
            out_m.append(int(k))
    centers = np.array(out_r, dtype=complex)
    mult_arr = np.array(out_m, dtype=int)
    order = np.lexsort((centers.imag, centers.real))
    centers, mult_arr = centers[order], mult_arr[order]
    return RootSet(centers, mult_arr, residual_fn(centers), method)


def hausdorff(x: np.ndarray, y: np.ndarray) -> float:
    if x.size == 0 or y.size == 0:
        return 0.0 if x.size == y.size else math.inf
    D = np.abs(x[:, None] - y[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def phi_eigenvalues(m: ZenerModel, xi) -> RootSet:
    """Eigenvalues of Phi(i xi) from the factored characteristic polynomial."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xi_norm = float(np.linalg.norm(xi))
    p = reduced_charpoly(m, xi_norm)
    b = m.b_arr
    if xi_norm == 0:
        # Phi = -B: eigenvalues -b_i (d-fold each) and 0 (d+1-fold) in d dims.
        parts = [(-b.astype(complex), np.full(m.k, m.d)), (np.zeros(1, complex), np.array([m.d + 1]))]
        rs = merge_rootsets(parts, "zero-frequency", lambda z: np.abs(p(z)))
    else:
        reduced = poly_roots(p)
        parts = [(reduced.roots, reduced.multiplicities)]
        if m.d > 1:
            parts.append((np.zeros(1, complex), np.array([m.d - 1])))
            parts.append((-b.astype(complex), np.full(m.k, m.d - 1)))
        rs = merge_rootsets(parts, reduced.method, lambda z: np.abs(p(z)))
        rs = RootSet(rs.roots, rs.multiplicities, rs.residuals, rs.method,
                     reduced.converged, reduced.iterations)
    dense = None
    if m.n <= DENSE_CHECK_MAX_N:
        dense = hausdorff(rs.expanded(), np.linalg.eigvals(phi_matrix(m, xi)))
    return RootSet(rs.roots, rs.multiplicities, rs.residuals, rs.method,
                   rs.converged, rs.iterations, dense)


def re_zero(z: complex) -> bool:
    return abs(z.real) <= RE_ZERO_BAND * max(1.0, abs(z))


def numeric_counts(rs: RootSet) -> dict:
    """Half-plane counts from clustered roots using the Re = 0 band."""
    out = {"left": 0, "origin": 0, "imag_pair": 0, "right": 0}
    for z, k in zip(rs.roots, rs.multiplicities):
        k = int(k)
        if abs(z) <= RE_ZERO_BAND:
            out["origin"] += k
        elif re_zero(z):
            out["imag_pair"] += k
        elif z.real < 0:
            out["left"] += k
        else:
            out["right"] += k
    out["zero"] = out["origin"] + out["imag_pair"]
    return out


def zero_structure(m: ZenerModel, xi) -> ZeroEigenStructure:
    """Algebraic vs geometric multiplicity of the zero eigenvalue of Phi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    algebraic = full_classification(m, xi).n_origin
    Phi = phi_matrix(m, xi)
    s = np.linalg.svd(Phi, compute_uv=False)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    return ZeroEigenStructure(algebraic=algebraic, geometric=m.n - rank)


def cross_validate(m: ZenerModel, xi) -> CrossValidation:
    """Compare analytic half-plane counts with numerically computed roots."""
    from .charpoly import classify_analytic

    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xi_norm = float(np.linalg.norm(xi))
    if xi_norm == 0:
        raise ValueError("cross validation needs xi != 0")
    analytic = classify_analytic(m, xi_norm)
    numeric = numeric_counts(poly_roots(reduced_charpoly(m, xi_norm)))
    a = analytic.counts()
    keys = ("left", "origin", "imag_pair", "right")
    diff = {k_: (a[k_], numeric[k_]) for k_ in keys if a[k_] != numeric[k_]}
    return CrossValidation(
        agree=not diff,
        analytic=a,
        numeric=numeric,
        case_label=analytic.case_label,
        mismatch=diff or None,
    )
