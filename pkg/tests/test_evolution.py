import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zener import families
from zener.evolution import (AliasingWarning, Stability, derivative_identity_residual, elastic_energy,
                             energy_trace, evolve_mode, exact_scalar_mode, history_convolution_solve,
                             integrate_scalar_mode, plane_wave_field, stability_verdict)
from zener.expm import matrix_exp
from zener.model import new_model
from zener.roots import phi_eigenvalues
from zener.symbol import cond_bound_constant, phi_matrix

from conftest import absorbing_models


def test_zero_initial_state(ref):
    tr = evolve_mode(ref, [1.0], np.zeros(3), [0.0, 1.0, 10.0])
    assert np.all(tr.states == 0)


def test_time_validation(ref):
    with pytest.raises(ValueError):
        evolve_mode(ref, [1.0], np.ones(3), [1.0, 2.0])
    with pytest.raises(ValueError):
        evolve_mode(ref, [1.0], np.ones(3), [0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        evolve_mode(ref, [1.0], np.ones(2), [0.0])


def test_long_time_bounded(ref):
    tr = evolve_mode(ref, [1.0], [1.0, 0.0, 0.0], np.linspace(0, 1e3, 101))
    assert np.max(tr.norms) <= cond_bound_constant(ref)
    assert tr.norms[0] == 1.0


def test_growth_rate_of_positive_model():
    m = new_model(2.0, [1.0], [1.0], 1)
    rate = float(np.max(phi_eigenvalues(m, [1.0]).roots.real))
    assert rate > 0
    # the dominant eigenvalues are a conjugate pair, so the norm beats; fit over a long window
    times = np.concatenate([[0.0], np.linspace(300.0, 1000.0, 141)])
    tr = evolve_mode(m, [1.0], [1.0, 0.0, 0.0], times)
    fitted = np.polyfit(times[1:], np.log(tr.norms[1:]), 1)[0]
    assert fitted == pytest.approx(rate, rel=0.01)


def test_saturation_propagates():
    m = new_model(2.0, [1.0], [1.0], 1)
    from zener.expm import ExpmSaturation
    with pytest.raises(ExpmSaturation):
        evolve_mode(m, [1.0], [1.0, 0.0, 0.0], [0.0, 1e5])


def test_single_fourier_mode(ref):
    L, N, j = 2 * np.pi * 8, 64, 3
    x = np.arange(N) * L / N
    kappa = 2 * np.pi * j / L
    field = np.zeros((3, N), dtype=complex)
    field[0] = np.exp(1j * kappa * x)
    snap = plane_wave_field(ref, L, N, field, 2.5)
    amp = matrix_exp(phi_matrix(ref, [kappa]), 2.5) @ np.array([1.0, 0.0, 0.0])
    np.testing.assert_allclose(snap.field, np.outer(amp, np.exp(1j * kappa * x)), atol=1e-12)


def test_zero_time_round_trip(ref):
    rng = np.random.default_rng(0)
    field = rng.standard_normal((3, 128))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        snap = plane_wave_field(ref, 10.0, 128, field, 0.0)
    np.testing.assert_allclose(snap.field, field, atol=1e-14)
    assert snap.aliased


def test_aliasing_warning(ref):
    field = np.random.default_rng(1).standard_normal((3, 64))
    with pytest.warns(AliasingWarning):
        plane_wave_field(ref, 10.0, 64, field, 0.0)


def test_plane_wave_validation(ref):
    with pytest.raises(ValueError):
        plane_wave_field(ref, 10.0, 100, np.zeros((3, 100)), 0.0)
    with pytest.raises(ValueError):
        plane_wave_field(new_model(2.0, [-1.0], [1.0], 2), 10.0, 64, np.zeros((5, 64)), 0.0)


def test_gaussian_pulse_sup_norm_non_increasing(ref):
    L, N = 400.0, 1024

    def pulse(x):
        out = np.zeros((3, x.size))
        out[0] = np.exp(-((x - L / 2) / 2.0) ** 2)
        return out

    sups = [np.max(np.abs(plane_wave_field(ref, L, N, pulse, t).field[0])) for t in np.linspace(0, 50, 26)]
    assert sups[0] == pytest.approx(1.0)
    assert np.all(np.diff(sups) <= 1e-9)


def test_energy_reference(ref):
    tr = energy_trace(ref, 1.0, 1.0, 0.0, 50.0, 0.01)
    assert tr.E_hat[0] == pytest.approx(1.0) and tr.E_lyap[0] == pytest.approx(1.0)
    assert tr.lyap_non_increasing()
    assert np.all(tr.E_lyap <= 1.0 + 1e-8)
    assert tr.bound_factor == pytest.approx(2.0)
    assert np.all(tr.E_hat <= 2.0 * tr.E_lyap * (1 + 1e-9) + 1e-12)


def test_energy_step_rejection(ref):
    with pytest.raises(ValueError):
        energy_trace(ref, 10.0, 1.0, 0.0, 1.0, 0.01)


def test_energy_stride(ref):
    tr = energy_trace(ref, 1.0, 1.0, 0.0, 1.0, 0.01, stride=10)
    np.testing.assert_allclose(tr.times, np.linspace(0, 1, 11))


def test_elastic_limit_conserves_energy():
    E = elastic_energy(2.0, 1.0, 1.0, 0.5, 50.0, 0.005)
    assert np.max(np.abs(E - E[0])) <= 1e-10 * E[0]


@settings(max_examples=15)
@given(absorbing_models(d=1), st.floats(0.3, 3.0))
def test_energy_decay_property(m, x):
    dt = min(0.01, 0.1 / max(float(np.max(m.b_arr)), m.c * x))
    t_max = round(10.0 / dt) * dt
    tr = energy_trace(m, x, 1.0, 0.3j, t_max, dt)
    assert tr.lyap_non_increasing()
    assert np.all(tr.E_lyap <= tr.E_hat[0] + 1e-8)
    assert np.all(tr.E_hat <= tr.bound_factor * tr.E_lyap * (1 + 1e-9) + 1e-12)


def test_auxiliary_integration_matches_exponential(ref):
    run = integrate_scalar_mode(ref.c2, ref.a_arr, ref.b_arr, 1.3, 1.0, -0.5, 5.0, 0.01)
    assert run.phi[-1] == pytest.approx(exact_scalar_mode(ref, 1.3, 1.0, -0.5, 5.0), abs=1e-9)


def test_history_integrator_fourth_order(ref):
    exact = exact_scalar_mode(ref, 1.0, 1.0, 0.0, 2.0)
    errs = [abs(history_convolution_solve(ref, 1.0, 1.0, 0.0, 2.0, dt).phi[-1] - exact) for dt in (0.1, 0.05)]
    assert errs[1] < 1e-6
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.6)


def test_history_integrator_agrees_with_auxiliary():
    m = new_model(3.0, [-1.0, -0.5], [0.5, 2.0], 1)
    aux = integrate_scalar_mode(m.c2, m.a_arr, m.b_arr, 1.0, 1.0, 0.2, 3.0, 0.02)
    hist = history_convolution_solve(m, 1.0, 1.0, 0.2, 3.0, 0.02)
    assert np.max(np.abs(aux.phi - hist.phi)) < 1e-6


def test_derivative_identity(ref):
    r1 = derivative_identity_residual(ref, 1.0, 1.0, 0.0, 5.0, 0.02)
    r2 = derivative_identity_residual(ref, 1.0, 1.0, 0.0, 5.0, 0.01)
    assert r2 < 1e-3 and r2 < r1


@pytest.mark.parametrize("m, verdict", [
    (new_model(2.0, [-1.0], [1.0], 1), Stability.StronglyStable),
    (new_model(2.0, [-1.0], [1.0], 3), Stability.StronglyStable),
    (new_model(1.0, [-1.0], [1.0], 1), Stability.StronglyStable),
    (families.double_zero(), Stability.WeaklyStable),
    (new_model(1.0, [-2.0], [1.0], 1), Stability.Unstable),
    (new_model(2.0, [1.0], [1.0], 1), Stability.Unstable),
])
def test_verdicts(m, verdict):
    assert stability_verdict(m, 31).verdict is verdict


def test_weak_witness_is_jordan_block():
    v = stability_verdict(families.double_zero(), 21)
    assert v.witness["algebraic"] == 2 and v.witness["geometric"] == 1
    assert v.witness["eigenvalue"] == [0.0, 0.0]


def test_positive_growth_plateau():
    m = new_model(2.0, [1.0, 0.5], [1.0, 2.0], 1)
    v = stability_verdict(m, 31)
    assert v.growth_rate == pytest.approx(1.5 / 4.0, rel=1e-6)


def test_absorbing_verdict_random():
    for seed in range(3):
        m = families.random_absorbing(seed)
        assert stability_verdict(m, 21).verdict is Stability.StronglyStable


def test_fitted_decay_rate(ref):
    tr = energy_trace(ref, 1.0, 1.0, 0.0, 50.0, 0.01)
    # E_lyap is quadratic in the mode, so it decays at twice the slowest modal rate
    slowest = -float(np.max(phi_eigenvalues(ref, [1.0]).roots.real))
    assert tr.fitted_decay_rate() == pytest.approx(2 * slowest, rel=0.05)
