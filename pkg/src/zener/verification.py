"""Property checks over randomized model families.

Each check returns a :class:`CheckResult`.  ``ACCEPTANCE`` lists the
numbered acceptance checks and ``INVARIANT_SUITES`` the per-module property
suites; :func:`run_all` executes both.  All randomness flows from one seed.
"""

from __future__ import annotations

import collections
import functools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import families as fam
from .asymptotics import Regime, expansion_error_scan, large_xi_expansion, small_xi_expansion
from .charpoly import (full_classification, g_at_zero, hurwitz_table, reduced_charpoly)
from .evolution import (derivative_identity_residual, elastic_energy, energy_trace,
                        exact_scalar_mode, history_convolution_solve, integrate_scalar_mode)
from .expm import matrix_exp, norm2
from .model import (Absorption, PhysicalElement, PhysicalZener, absorption_status,
                    equilibrium_modulus, from_physical, kernel_at, new_model)
from .roots import (cross_validate, numeric_counts, phi_eigenvalues, poly_roots)
from .symbol import (coordinate_matrices, cond_bound_constant, e1_norm_sq, hyperbolicity_probe,
                     random_unit_vectors, spectral_certificate, strang_bound_check, symbol_A)

REFERENCE = dict(c2=2.0, a=[-1.0], b=[1.0], d=1)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3),
                "details": _jsonable(self.details)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _timed(name: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(seed: int = 42, **kw) -> CheckResult:
            t0 = time.perf_counter()
            passed, details = fn(np.random.default_rng(seed), **kw)
            return CheckResult(name, bool(passed), details, time.perf_counter() - t0)
        wrapper.check_name = name
        return wrapper
    return deco


def reference_model():
    return new_model(**REFERENCE)


def _symbol_samples(rng, count=200):
    out = []
    for _ in range(count):
        m = fam.random_model(rng, k=int(rng.integers(1, 6)), d=int(rng.integers(1, 4)))
        out.append((m, random_unit_vectors(rng, 1, m.d)[0]))
    return out


# -- acceptance ------------------------------------------------------------------


@_timed("1 symbol spectrum")
def check_symbol_spectrum(rng, count=200):
    worst = 0.0
    for m, xi in _symbol_samples(rng, count):
        ev = np.linalg.eigvals(symbol_A(m, xi))
        expected = np.concatenate([np.zeros(m.n - 2), [m.c, -m.c]])
        worst = max(worst, float(np.max(np.abs(np.sort(ev.real) - np.sort(expected)))),
                    float(np.max(np.abs(ev.imag))))
    return worst <= 1e-9, {"max_eigenvalue_error": worst, "models": count}


@_timed("2 projector and symmetrizer identities")
def check_projectors(rng, count=200):
    worst = collections.defaultdict(float)
    for m, xi in _symbol_samples(rng, count):
        cert = spectral_certificate(m, xi)
        A = symbol_A(m, xi)
        I = np.eye(m.n)
        for i, Ei in enumerate(cert.E):
            for j, Ej in enumerate(cert.E):
                target = Ej if i == j else 0 * Ej
                worst["EiEj"] = max(worst["EiEj"], float(np.max(np.abs(Ei @ Ej - target))))
        worst["sum_E"] = max(worst["sum_E"], float(np.max(np.abs(sum(cert.E) - I))))
        recon = sum(lam * Ej for lam, Ej in zip(cert.eigenvalues, cert.E))
        worst["A_split"] = max(worst["A_split"], float(np.max(np.abs(A - recon))))
        worst["HA"] = max(worst["HA"], float(np.max(np.abs(cert.H @ A - A.T @ cert.H))) / norm2(cert.H))
        e1 = norm2(cert.E1) ** 2
        worst["E1_closed_form"] = max(worst["E1_closed_form"], abs(e1 - e1_norm_sq(m)) / e1_norm_sq(m))
    return max(worst.values()) <= 1e-8, dict(worst)


@_timed("3 uniform conditioning")
def check_conditioning(rng, n_models=4, strang_pairs=100):
    ratios = []
    models = [reference_model()] + [fam.random_model(rng, d=int(rng.integers(1, 4))) for _ in range(n_models - 1)]
    for m in models:
        C = cond_bound_constant(m)
        probe = hyperbolicity_probe(m, 50, 100.0, seed=rng)
        ratios.append(probe - C)
    strang_ok = 0
    worst_strang = -math.inf
    for _ in range(strang_pairs):
        m = models[int(rng.integers(len(models)))]
        xi = random_unit_vectors(rng, 1, m.d)[0] * 10 ** rng.uniform(-2, 2)
        chk = strang_bound_check(m, xi, float(rng.uniform(0, 10)))
        worst_strang = max(worst_strang, chk.lhs - chk.rhs)
        strang_ok += chk.lhs <= chk.rhs + 1e-8
    passed = max(ratios) <= 1e-8 and strang_ok == strang_pairs
    return passed, {"max_probe_minus_C": max(ratios), "strang_pass": strang_ok,
                    "strang_pairs": strang_pairs, "max_strang_lhs_minus_rhs": worst_strang}


def _log_xi(rng):
    return float(10 ** rng.uniform(-2, 2))


# name -> (generator, xi sampler); constructed families are exact at |xi| = 1
CONCORDANCE_REGIMES: dict[str, tuple[Callable, Callable]] = {
    "negative-a, g(0) > 0": (lambda r: fam.random_absorbing(r, d=1), _log_xi),
    "negative-a, g(0) = 0": (fam.tuned_zero_equilibrium, _log_xi),
    "negative-a, g(0) < 0": (fam.negative_equilibrium, _log_xi),
    "positive-a": (fam.random_positive, _log_xi),
    "mixed k=2, uniform": (fam.random_mixed_k2, _log_xi),
    "mixed k=2, g(0) = 0": (fam.mixed_k2_zero_constant, _log_xi),
    "mixed k=2, g(0) = g'(0) = 0": (fam.random_double_zero, _log_xi),
    "mixed k=2, g(0) > 0, imaginary pair": (fam.imaginary_pair_stable, lambda r: 1.0),
    "mixed k=2, g(0) = 0, imaginary pair": (fam.zero_with_imaginary_pair, lambda r: 1.0),
    "mixed k=2, g(0) < 0, imaginary pair": (fam.imaginary_pair_negative_g0, lambda r: 1.0),
    "mixed k=2, g(0) < 0, real pair": (fam.real_pair_negative_g0, lambda r: 1.0),
    "mixed k=2, g(0) < 0, three unstable": (fam.three_unstable_negative_g0, lambda r: 1.0),
}


def _vieta_errors(p, rs) -> tuple[float, float]:
    z = rs.expanded()
    n = p.degree
    c1, cn = p.coefficient(n - 1), p.coefficient(0)
    s_err = abs(np.sum(z) + c1) / max(abs(c1), 1.0)
    prod = np.prod(z)
    p_err = abs(prod - (-1) ** n * cn) / max(abs(cn), float(np.prod(np.maximum(np.abs(z), 1.0))))
    return float(s_err), float(p_err)


@functools.lru_cache(maxsize=4)
def _concordance_sweep(seed: int, per_regime: int):
    rng = np.random.default_rng(seed)
    report = {}
    vieta = {"sum": 0.0, "product": 0.0, "polynomials": 0}
    pair_err = 0.0
    for name, (gen, xi_fn) in CONCORDANCE_REGIMES.items():
        agree, labels, mismatches = 0, collections.Counter(), []
        for _ in range(per_regime):
            m = gen(rng)
            xi = xi_fn(rng)
            cv = cross_validate(m, [xi])
            labels[cv.case_label] += 1
            agree += cv.agree
            if not cv.agree and len(mismatches) < 5:
                mismatches.append({"model": m.to_dict(), "xi": xi, "diff": cv.mismatch})
            p = reduced_charpoly(m, xi)
            rs = poly_roots(p)
            s_err, p_err = _vieta_errors(p, rs)
            vieta["sum"] = max(vieta["sum"], s_err)
            vieta["product"] = max(vieta["product"], p_err)
            vieta["polynomials"] += 1
            if name == "mixed k=2, g(0) > 0, imaginary pair":
                b1, b2 = m.b
                omega = math.sqrt(p.coefficient(1) / (b1 + b2))
                z = rs.expanded()
                pair_err = max(pair_err, min(abs(z - 1j * omega)), min(abs(z + 1j * omega)))
        report[name] = {"agree": agree, "total": per_regime, "labels": dict(labels), "mismatches": mismatches}
    return report, vieta, pair_err


@_timed("4 root classification concordance")
def check_concordance(rng, per_regime=1000):
    seed = int(rng.integers(2**31))
    report, _, pair_err = _concordance_sweep(seed, per_regime)
    passed = all(r["agree"] == r["total"] for r in report.values()) and pair_err <= 1e-8
    return passed, {"regimes": report, "imaginary_pair_error": pair_err}


@_timed("5 asymptotic order")
def check_asymptotic_order(rng):
    m = reference_model()
    small = expansion_error_scan(m, Regime.Small, np.geomspace(1e-3, 1e-1, 9))
    large = expansion_error_scan(m, Regime.Large, np.geomspace(1e1, 1e3, 9))
    plateau = float(phi_eigenvalues(m, [1e3]).roots[-1].real)
    acoustic_small = min(small.slopes["acoustic+"], small.slopes["acoustic-"])
    relax_small = small.slopes["relaxation-0"]
    acoustic_large = max(large.slopes["acoustic+"], large.slopes["acoustic-"])
    details = {"small_acoustic_slope": acoustic_small, "small_relaxation_slope": relax_small,
               "large_acoustic_slope": acoustic_large, "plateau_at_1e3": plateau,
               "flagged_rows": sum(r.flagged for r in small.rows + large.rows)}
    passed = (acoustic_small >= 2.7 and relax_small >= 3.7 and acoustic_large <= -1.7
              and abs(plateau + 0.25) <= 1e-4)
    return passed, details


def energy_step(m, xi_norm: float, t_max: float = 50.0, cap: float = 0.01) -> float:
    """Largest step <= cap within the stability limit that divides t_max evenly."""
    dt = min(cap, 0.1 / max(float(np.max(m.b_arr)), m.c * xi_norm))
    return t_max / math.ceil(t_max / dt - 1e-9)


@_timed("6 energy decay")
def check_energy_decay(rng, n_models=50, t_max=50.0):
    worst = {"increase_over_budget": -math.inf, "lyap_minus_initial": -math.inf, "hat_minus_bound": -math.inf}
    failures = []
    for _ in range(n_models):
        m = fam.random_absorbing(rng, d=1)
        xi = float(10 ** rng.uniform(-0.5, 0.5))
        phi0 = complex(rng.standard_normal(), rng.standard_normal())
        phi_t0 = complex(rng.standard_normal(), rng.standard_normal())
        tr = energy_trace(m, xi, phi0, phi_t0, t_max, energy_step(m, xi, t_max))
        budget = tr.monotonicity_budget()
        inc = tr.max_increase() - budget
        over = float(np.max(tr.E_lyap)) - (tr.E_hat[0] + 1e-8)
        gap = float(np.max(tr.E_hat - tr.bound_factor * tr.E_lyap)) - budget
        worst["increase_over_budget"] = max(worst["increase_over_budget"], inc)
        worst["lyap_minus_initial"] = max(worst["lyap_minus_initial"], over)
        worst["hat_minus_bound"] = max(worst["hat_minus_bound"], gap)
        if inc > 0 or over > 0 or gap > 0:
            failures.append({"model": m.to_dict(), "xi": xi})
    E = elastic_energy(1.0, 1.0, 1.0, 0.0, t_max, 0.005)
    drift = float(np.max(np.abs(E / E[0] - 1)))
    worst["elastic_drift"] = drift
    passed = not failures and drift <= 1e-10
    return passed, {**worst, "failures": failures[:5], "models": n_models}


@_timed("7 strong-stability trajectory bound")
def check_trajectory_bound(rng, n_models=20, n_xi=20):
    times = np.concatenate([[0.0], np.geomspace(1e-2, 1e3, 80)])
    worst_ratio, worst_op = 0.0, 0.0
    failures = []
    for _ in range(n_models):
        m = fam.random_absorbing(rng)
        C = cond_bound_constant(m)
        for x in np.geomspace(1e-3, 1e3, n_xi):
            xi = random_unit_vectors(rng, 1, m.d)[0] * x
            U0 = rng.standard_normal(m.n) + 1j * rng.standard_normal(m.n)
            Phi = -(np.asarray(_B(m)) + 1j * symbol_A(m, xi))
            props = [matrix_exp(Phi, t) for t in times]
            ratio = max(np.linalg.norm(P @ U0) for P in props) / np.linalg.norm(U0)
            worst_op = max(worst_op, max(norm2(P) for P in props) / C)
            worst_ratio = max(worst_ratio, ratio / C)
            if ratio > C:
                failures.append({"model": m.to_dict(), "xi_norm": float(x), "ratio_over_C": ratio / C})
    # weakly stable construction: at most linear growth
    dz = fam.double_zero()
    tt = np.geomspace(10.0, 1e3, 30)
    U0 = rng.standard_normal(dz.n) + 0j
    norms = [np.linalg.norm(matrix_exp(-(np.asarray(_B(dz)) + 1j * symbol_A(dz, [1.0])), t) @ U0) for t in tt]
    exponent = float(np.polyfit(np.log(tt), np.log(norms), 1)[0])
    passed = not failures and exponent <= 1.2
    return passed, {"max_trajectory_ratio_over_C": worst_ratio, "max_operator_norm_over_C": worst_op,
                    "failures": failures[:5], "weak_growth_exponent": exponent}


def _B(m):
    from .symbol import symbol_B
    return symbol_B(m)


@_timed("8 Vieta and trace cross-checks")
def check_vieta(rng, per_regime=1000, count=200):
    seed = int(rng.integers(2**31))
    _, vieta, _ = _concordance_sweep(seed, per_regime)
    trace_err = 0.0
    for m, xi in _symbol_samples(rng, count):
        xi = xi * 10 ** rng.uniform(-2, 2)
        z = phi_eigenvalues(m, xi).expanded()
        trace = -m.d * float(np.sum(m.b_arr))
        trace_err = max(trace_err, abs(np.sum(z) - trace) / max(abs(trace), 1.0))
    passed = vieta["sum"] <= 1e-9 and vieta["product"] <= 1e-9 and trace_err <= 1e-9
    return passed, {**vieta, "phi_trace": trace_err}


ACCEPTANCE = [check_symbol_spectrum, check_projectors, check_conditioning, check_concordance,
              check_asymptotic_order, check_energy_decay, check_trajectory_bound, check_vieta]


# -- per-module invariant suites ------------------------------------------------


@_timed("model invariants")
def suite_model(rng, count=100):
    from scipy.integrate import quad

    physical_ok = True
    for _ in range(count):
        k = int(rng.integers(1, 6))
        els = []
        for _ in range(k):
            ts = float(rng.uniform(0.1, 5))
            els.append(PhysicalElement(float(rng.uniform(0.1, 5)), ts, ts * float(rng.uniform(1.01, 4))))
        try:
            physical_ok &= absorption_status(from_physical(PhysicalZener(tuple(els), 1))) is Absorption.ABSORBING
        except ValueError:
            pass  # coincident relaxation times
    quad_err, monotone = 0.0, True
    grid = np.linspace(0, 20, 400)
    for _ in range(count):
        m = fam.random_absorbing(rng)
        T = 60.0 / float(np.min(m.b_arr))
        integral, _ = quad(lambda t: kernel_at(m, t), 0, T, limit=200, epsabs=1e-13, epsrel=1e-13)
        quad_err = max(quad_err, abs(equilibrium_modulus(m) - (m.c2 - integral)))
        monotone &= bool(np.all(np.diff(kernel_at(m, grid)) < 0))
    passed = physical_ok and quad_err <= 1e-8 and monotone
    return passed, {"physical_absorbing": physical_ok, "equilibrium_quadrature_error": quad_err,
                    "kernel_decreasing": monotone}


@_timed("symbol invariants")
def suite_symbol(rng, count=100):
    resid = 0.0
    noncommuting = True
    for m, xi in _symbol_samples(rng, count):
        cert = spectral_certificate(m, xi)
        A = symbol_A(m, xi)
        I = np.eye(m.n)
        for i, Ei in enumerate(cert.E):
            for j, Ej in enumerate(cert.E):
                resid = max(resid, float(np.max(np.abs(Ei @ Ej - (Ej if i == j else 0)))))
        resid = max(resid, float(np.max(np.abs(sum(cert.E) - I))),
                    float(np.max(np.abs(A - sum(l * E for l, E in zip(cert.eigenvalues, cert.E))))),
                    float(np.max(np.abs(cert.H @ A - A.T @ cert.H))))
        if m.d >= 2:
            A1, A2 = coordinate_matrices(m)[:2]
            noncommuting &= norm2(A1 @ A2 - A2 @ A1) > 0
    m = fam.random_model(rng, d=2)
    probe_ok = hyperbolicity_probe(m, 10, 50.0, seed=rng) <= cond_bound_constant(m)
    passed = resid <= 1e-9 and noncommuting and probe_ok
    return passed, {"projector_residual": resid, "noncommuting": noncommuting, "probe_below_C": probe_ok}


@_timed("charpoly invariants")
def suite_charpoly(rng, count=300):
    const_err, deriv_err = 0.0, 0.0
    interlace_ok, degree_ok, hurwitz_ok = True, True, True
    for _ in range(count):
        m = fam.random_model(rng)
        xi = float(10 ** rng.uniform(-2, 2))
        p = reduced_charpoly(m, xi)
        g0 = g_at_zero(m, xi)
        const_err = max(const_err, abs(p(0.0) - g0) / max(abs(g0), 1e-300))
        cls = full_classification(m, np.array([xi] + [0.0] * (m.d - 1)))
        degree_ok &= cls.n_left + cls.n_origin + cls.n_imag_pair + cls.n_right == m.n
        if np.all(m.a_arr < 0) or np.all(m.a_arr > 0):
            vals = [p(-bi) for bi in m.b]
            interlace_ok &= all(v0 * v1 < 0 for v0, v1 in zip(vals, vals[1:]))
        table = hurwitz_table(p)
        if not table.singular:
            hurwitz_ok &= table.variations == numeric_counts(poly_roots(p))["right"]
    for _ in range(count // 3):
        m = fam.tuned_zero_equilibrium(rng)
        xi = float(10 ** rng.uniform(-1, 1))
        p = reduced_charpoly(m, xi)
        expected = -xi**2 * float(np.sum(m.a_arr / m.b_arr**2)) * float(np.prod(m.b_arr))
        deriv_err = max(deriv_err, abs(p.coefficient(1) - expected) / max(abs(expected), 1.0))
    passed = const_err <= 1e-12 and deriv_err <= 1e-10 and interlace_ok and degree_ok and hurwitz_ok
    return passed, {"constant_term_error": const_err, "g_prime_error": deriv_err, "interlacing": interlace_ok,
                    "degree_bookkeeping": degree_ok, "hurwitz_matches_numeric": hurwitz_ok}


@_timed("roots invariants")
def suite_roots(rng, count=300):
    residual_ok, conj_err, dense = True, 0.0, 0.0
    sum_err, prod_err = 0.0, 0.0
    for _ in range(count):
        m = fam.random_model(rng)
        xi = random_unit_vectors(rng, 1, m.d)[0] * 10 ** rng.uniform(-2, 2)
        p = reduced_charpoly(m, float(np.linalg.norm(xi)))
        rs = poly_roots(p)
        if np.max(np.abs(p.coeffs)) <= 1e6:
            residual_ok &= bool(np.all(rs.residuals <= 1e-10 * (1 + np.abs(rs.roots)) ** p.degree))
        s, q = _vieta_errors(p, rs)
        sum_err, prod_err = max(sum_err, s), max(prod_err, q)
        z = rs.expanded()
        for r in z[np.abs(z.imag) > 1e-12]:
            conj_err = max(conj_err, float(np.min(np.abs(z - np.conj(r)))))
        full = phi_eigenvalues(m, xi)
        if full.dense_distance is not None:
            dense = max(dense, full.dense_distance)
    passed = residual_ok and sum_err <= 1e-9 and prod_err <= 1e-9 and conj_err <= 1e-9 and dense <= 1e-7
    return passed, {"residual_bound": residual_ok, "vieta_sum": sum_err, "vieta_product": prod_err,
                    "conjugate_closure": conj_err, "dense_hausdorff": dense}


@_timed("asymptotics invariants")
def suite_asymptotics(rng, count=20):
    trace_err, im_slope, plateau = 0.0, math.inf, 0.0
    models = [reference_model()] + [fam.random_model(rng, d=1) for _ in range(count)]
    grid = np.geomspace(1e-3, 1e-1, 7)
    for m in models:
        s = small_xi_expansion(m)
        acoustic = sum(br.coeffs[2] for br in s.branch_acoustic)
        trace_err = max(trace_err, abs(s.second_order_trace()),
                        abs(-acoustic - float(np.sum(m.a_arr / m.b_arr**2))))
        if s.l > 0 and not s.degenerate:
            rel = []
            for x in grid:
                z = phi_eigenvalues(m, [x]).expanded()
                top = z[np.argmax(z.imag)]
                rel.append(abs(top.imag - x * math.sqrt(s.l)) / (x * math.sqrt(s.l)))
            im_slope = min(im_slope, float(np.polyfit(np.log(grid), np.log(np.maximum(rel, 1e-16)), 1)[0]))
        if np.all(m.a_arr < 0):
            top = lambda x: phi_eigenvalues(m, [x]).roots[-1].real
            plateau = max(plateau, abs(top(1e3) - top(1e4)))
    passed = trace_err <= 1e-10 and im_slope >= 1.7 and plateau <= 1e-4
    return passed, {"second_order_trace": trace_err, "imag_rel_error_slope": im_slope,
                    "plateau_difference": plateau}


@_timed("evolution invariants")
def suite_evolution(rng):
    semi = 0.0
    for _ in range(20):
        M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        M /= norm2(M)
        s, t = rng.uniform(0, 10, 2)
        E = matrix_exp(M, s + t)
        semi = max(semi, norm2(E - matrix_exp(M, s) @ matrix_exp(M, t)) / norm2(E))
    m = reference_model()
    ex = exact_scalar_mode(m, 1.0, 1.0, 0.0, 10.0)
    errs_aux, errs_hist, diffs = [], [], []
    for dt in (0.02, 0.01):
        aux = integrate_scalar_mode(m.c2, m.a_arr, m.b_arr, 1.0, 1.0, 0.0, 10.0, dt).phi[-1]
        hist = history_convolution_solve(m, 1.0, 1.0, 0.0, 10.0, dt).phi[-1]
        errs_aux.append(abs(aux - ex))
        errs_hist.append(abs(hist - ex))
        diffs.append(abs(aux - hist))
    order = lambda e: math.log2(e[0] / e[1])
    ident = [derivative_identity_residual(m, 1.0, 1.0, 0.0, 10.0, dt) for dt in (0.02, 0.01)]
    details = {"semigroup": semi, "aux_order": order(errs_aux), "history_order": order(errs_hist),
               "difference_order": order(diffs), "identity_order": order(ident),
               "identity_residual": ident[-1]}
    passed = (semi <= 1e-9 and details["aux_order"] >= 3.5 and details["history_order"] >= 3.5
              and details["difference_order"] >= 3.5 and details["identity_order"] >= 1.7)
    return passed, details


INVARIANT_SUITES = [suite_model, suite_symbol, suite_charpoly, suite_roots, suite_asymptotics, suite_evolution]


def run_all(seed: int = 42, progress: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    results = []
    for chk in ACCEPTANCE + INVARIANT_SUITES:
        res = chk(seed)
        results.append(res)
        if progress is not None:
            progress(res)
    return results
