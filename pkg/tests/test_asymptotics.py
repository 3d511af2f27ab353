import math

import numpy as np
import pytest
from hypothesis import given

from zener.asymptotics import (Regime, expansion_error_scan, large_xi_expansion, small_xi_expansion)
from zener.model import new_model
from zener.roots import phi_eigenvalues

from conftest import absorbing_models, models


def test_small_series_reference(ref):
    s = small_xi_expansion(ref)
    assert not s.degenerate and s.l == 1.0
    relax, = s.branch_relaxation
    assert relax.coeffs == (-1, 0, -1, 0)
    plus, minus = s.branch_acoustic
    assert plus.coeffs[1] == pytest.approx(1.0) and minus.coeffs[1] == pytest.approx(-1.0)
    assert plus.coeffs[2] == pytest.approx(0.5)


def test_small_series_value(ref):
    s = small_xi_expansion(ref)
    lam = s.evaluate(1e-3)
    # acoustic+: zeta + zeta^2/2 with zeta = 1e-3 i
    assert lam[1].real == pytest.approx(-5e-7, rel=1e-12)
    assert lam[1].imag == pytest.approx(1e-3)


@given(models())
def test_second_order_trace_vanishes(m):
    s = small_xi_expansion(m)
    # the zeta^2 coefficients sum to minus the xi^2 part of the trace: zero
    if not s.degenerate:
        assert abs(s.second_order_trace()) <= 1e-12 * (1 + np.sum(np.abs(m.a_arr / m.b_arr**2)))


def test_degenerate_branch():
    m = new_model(1.0, [-1.0], [1.0], 1)
    s = small_xi_expansion(m)
    assert s.degenerate
    plus, minus = s.branch_acoustic
    assert plus.coeffs == (0, 0, 1) and minus.coeffs == (0, 0, 0)
    # numeric roots at xi = 1e-3: one at 0 and one near zeta^2 = -1e-6
    z = np.sort(phi_eigenvalues(m, [1e-3]).expanded().real)
    assert z[-1] == pytest.approx(0.0, abs=1e-15)
    assert z[-2] == pytest.approx(-1e-6, rel=1e-3)


def test_large_series_reference(ref):
    L = large_xi_expansion(ref)
    assert L.mu0 == (0.0, math.sqrt(2), -math.sqrt(2))
    assert L.mu1_relaxation[0] == pytest.approx(-0.5)
    assert L.acoustic_rate == pytest.approx(-0.25)
    assert L.growth_limit == pytest.approx(-0.25)


def test_large_plateau(ref):
    z = phi_eigenvalues(ref, [1e3]).expanded()
    acoustic = z[np.abs(z.imag) > 1]
    np.testing.assert_allclose(acoustic.real, -0.25, atol=1e-6)


def test_small_scan_slopes(ref):
    scan = expansion_error_scan(ref, Regime.Small, np.geomspace(1e-3, 1e-1, 12))
    assert scan.slopes["acoustic+"] == pytest.approx(3.0, abs=0.3)
    assert scan.slopes["acoustic-"] == pytest.approx(3.0, abs=0.3)
    assert scan.slopes["relaxation-0"] >= 3.7


def test_large_scan_slopes(ref):
    scan = expansion_error_scan(ref, "large", np.geomspace(10, 1e3, 12))
    for name in ("relaxation-0", "acoustic+", "acoustic-"):
        assert scan.slopes[name] <= -1.7


@given(absorbing_models(d=1))
def test_large_scan_decays(m):
    scan = expansion_error_scan(m, "large", np.geomspace(30, 3e3, 6))
    for name, slope in scan.slopes.items():
        x, e = scan.errors(name)
        assert math.isnan(slope) or slope <= -0.9 or e.max() < 1e-9


def test_scan_grid_validation(ref):
    with pytest.raises(ValueError):
        expansion_error_scan(ref, "small", [0.5])
    with pytest.raises(ValueError):
        expansion_error_scan(ref, "large", [1.0, 20.0])
    with pytest.raises(ValueError):
        expansion_error_scan(ref, "small", [0.01, 0.005])
