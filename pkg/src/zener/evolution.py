"""Time evolution of Fourier modes, plane-wave synthesis, energy functionals and
stability verdicts.

The scalar mode equation

    phi'' + c^2 xi^2 phi - xi^2 (K * phi)(t) = 0,   K(t) = -sum_i a_i exp(-b_i t)

is integrated through auxiliary memory variables
``w_i(t) = a_i xi^2 int_0^t exp(-b_i (t - s)) phi(s) ds`` which satisfy
``w_i' = -b_i w_i + a_i xi^2 phi``, so that ``phi'' = -c^2 xi^2 phi - sum_i w_i``.
This is exact for exponential kernels.  Stored history is only used for the
``K (x) phi`` term of the decaying functional and for the independent
history-convolution integrator.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotics import large_xi_expansion, small_xi_expansion
from .expm import ExpmSaturation, matrix_exp, norm2
from .model import ZenerModel, equilibrium_modulus
from .roots import RE_ZERO_BAND, RANK_RTOL, phi_eigenvalues, re_zero
from .symbol import as_xi, phi_matrix

__all__ = [
    "AliasingWarning", "EnergyTrace", "ExpmSaturation", "ModeTrajectory", "ScalarModeRun",
    "Stability", "StabilityVerdict", "WaveSnapshot", "energy_trace", "evolve_mode",
    "history_convolution_solve", "integrate_scalar_mode", "matrix_exp", "plane_wave_field",
    "stability_verdict", "verdict_grid",
]

ALIASING_TAIL = 1e-8
VERDICT_XI_RANGE = (1e-3, 1e3)
# Gauss-Legendre nodes/weights on [0, 1]
_GL_NODES = 0.5 + 0.5 * np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GL_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


class AliasingWarning(UserWarning):
    """The sampled initial field has non-negligible energy near the Nyquist band."""


@dataclass(frozen=True)
class ModeTrajectory:
    xi: np.ndarray
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)
    norms: np.ndarray


@dataclass(frozen=True)
class WaveSnapshot:
    x: np.ndarray
    t: float
    field: np.ndarray  # shape (n, n_grid)
    aliased: bool


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0.0:
        raise ValueError("times must be a non-empty 1-D sequence starting at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    return times


def evolve_mode(m: ZenerModel, xi, U0, times) -> ModeTrajectory:
    """Fourier-mode solution ``U(t) = exp(t Phi(xi)) U0`` at each requested time.

    Each state uses a fresh exponential, so errors do not accumulate from one
    sample to the next.  Raises ``ExpmSaturation`` if a state would overflow.
    """
    xi = as_xi(m, xi)
    times = _check_times(times)
    U0 = np.asarray(U0, dtype=complex)
    if U0.shape != (m.n,):
        raise ValueError(f"initial state must have length {m.n}, got shape {U0.shape}")
    Phi = phi_matrix(m, xi)
    states = np.array([matrix_exp(Phi, t) @ U0 for t in times])
    return ModeTrajectory(xi=xi, times=times, states=states, norms=np.linalg.norm(states, axis=1))


def plane_wave_field(
    m: ZenerModel,
    domain_length: float,
    n_grid: int,
    U0: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    t: float,
) -> WaveSnapshot:
    """Periodic one-dimensional field at time ``t`` by per-mode evolution.

    ``U0`` is either an array of shape ``(n, n_grid)`` sampled on
    ``x_j = j L / n_grid`` or a callable mapping that grid to such an array.
    A real initial field yields a real snapshot.  An ``AliasingWarning`` is
    issued when the upper half of the resolved wavenumbers carries more than
    ``ALIASING_TAIL`` of the spectral energy.
    """
    if m.d != 1:
        raise ValueError("plane-wave synthesis needs d = 1; the spectrum depends only on |xi|")
    if n_grid < 2 or n_grid & (n_grid - 1):
        raise ValueError(f"n_grid must be a power of 2, got {n_grid}")
    if domain_length <= 0:
        raise ValueError("domain_length must be positive")
    x = np.arange(n_grid) * (domain_length / n_grid)
    field = np.asarray(U0(x) if callable(U0) else U0)
    if field.shape != (m.n, n_grid):
        raise ValueError(f"initial field must have shape {(m.n, n_grid)}, got {field.shape}")
    real_input = np.isrealobj(field)
    modes = np.fft.fft(field, axis=1)
    kappa = 2 * np.pi * np.fft.fftfreq(n_grid, d=domain_length / n_grid)

    power = np.sum(np.abs(modes) ** 2, axis=0)
    total = float(power.sum())
    tail = float(power[np.abs(np.fft.fftfreq(n_grid)) * n_grid > n_grid / 4].sum())
    aliased = total > 0 and tail > ALIASING_TAIL * total
    if aliased:
        warnings.warn(f"initial spectrum not resolved: tail fraction {tail / total:.3g}",
                      AliasingWarning, stacklevel=2)

    if t > 0:
        out = np.empty_like(modes, dtype=complex)
        for j, kj in enumerate(kappa):
            out[:, j] = matrix_exp(phi_matrix(m, [kj]), t) @ modes[:, j]
        modes = out
    result = np.fft.ifft(modes, axis=1)
    if real_input:
        result = result.real
    return WaveSnapshot(x=x, t=float(t), field=result, aliased=aliased)


# -- scalar mode and energy functionals ------------------------------------------


@dataclass(frozen=True)
class ScalarModeRun:
    """Raw trajectory of the scalar mode with auxiliary memory variables."""

    times: np.ndarray
    phi: np.ndarray
    phi_t: np.ndarray
    memory: np.ndarray  # shape (len(times), k)


def _mode_generator(c2: float, a: np.ndarray, b: np.ndarray, xi_norm: float) -> np.ndarray:
    """Generator of y = (phi, phi_t, w_1..w_k)."""
    k = a.size
    M = np.zeros((k + 2, k + 2))
    M[0, 1] = 1.0
    M[1, 0] = -c2 * xi_norm**2
    M[1, 2:] = -1.0
    M[2:, 0] = a * xi_norm**2
    M[2:, 2:] = -np.diag(b)
    return M


def _rk4_propagator(M: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for the linear system y' = M y, as a matrix."""
    hM = h * M
    ident = np.eye(M.shape[0])
    return ident + hM @ (ident + hM @ (ident / 2 + hM @ (ident / 6 + hM / 24)))


def _n_steps(t_max: float, dt: float) -> int:
    if t_max <= 0 or dt <= 0:
        raise ValueError("t_max and dt must be positive")
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * t_max:
        raise ValueError(f"t_max = {t_max} is not a whole number of steps of {dt}")
    return n


def integrate_scalar_mode(c2, a, b, xi_norm, phi0, phi_t0, t_max, dt) -> ScalarModeRun:
    """Fixed-step RK4 for the scalar mode; ``a`` and ``b`` may be empty (no memory)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = _n_steps(t_max, dt)
    S = _rk4_propagator(_mode_generator(c2, a, b, xi_norm), dt)
    Y = np.empty((n + 1, a.size + 2), dtype=complex)
    Y[0] = np.concatenate([[phi0, phi_t0], np.zeros(a.size)])
    for j in range(n):
        Y[j + 1] = S @ Y[j]
    return ScalarModeRun(times=np.arange(n + 1) * dt, phi=Y[:, 0], phi_t=Y[:, 1], memory=Y[:, 2:])


def _kernel(a, b, t):
    t = np.asarray(t, dtype=float)
    return -np.sum(a[:, None] * np.exp(-np.outer(b, np.atleast_1d(t))), axis=0).reshape(t.shape)


def _kernel_derivative(a, b, t):
    t = np.asarray(t, dtype=float)
    return np.sum((a * b)[:, None] * np.exp(-np.outer(b, np.atleast_1d(t))), axis=0).reshape(t.shape)


def _kernel_second_derivative(a, b, t):
    t = np.asarray(t, dtype=float)
    return -np.sum((a * b * b)[:, None] * np.exp(-np.outer(b, np.atleast_1d(t))), axis=0).reshape(t.shape)


def _kernel_integral(a, b, t):
    t = np.asarray(t, dtype=float)
    return -np.sum((a / b)[:, None] * -np.expm1(-np.outer(b, np.atleast_1d(t))), axis=0).reshape(t.shape)


def history_gap(a, b, run: ScalarModeRun, n: int, kernel=_kernel, dkernel=_kernel_derivative) -> float:
    """``int_0^t kernel(t - s) |phi(s) - phi(t)|^2 ds`` at ``t = times[n]``.

    Trapezoid rule on the stored samples with the Euler-Maclaurin endpoint
    correction; the integrand's derivative is available in closed form from
    the stored ``phi_t``, so the correction costs nothing extra.
    """
    if n == 0 or a.size == 0:
        return 0.0
    h = run.times[1] - run.times[0]
    t = run.times[n]
    s = run.times[: n + 1]
    diff = run.phi[: n + 1] - run.phi[n]
    f = kernel(a, b, t - s) * np.abs(diff) ** 2
    trap = h * (f.sum() - 0.5 * (f[0] + f[-1]))
    # f'(s) at s = 0; it vanishes at s = t.
    d0 = -dkernel(a, b, t) * abs(diff[0]) ** 2 + kernel(a, b, t) * 2 * np.real(np.conj(diff[0]) * run.phi_t[0])
    return float(trap + h * h / 12.0 * d0)


@dataclass(frozen=True)
class EnergyTrace:
    """Energy samples of one scalar mode.

    ``E_hat`` is the standard energy and ``E_lyap`` the functional that adds
    the kernel memory; for absorbing models the latter is non-increasing and
    ``E_hat <= bound_factor * E_lyap`` with ``bound_factor = c^2 / l``.
    """

    times: np.ndarray
    E_hat: np.ndarray
    E_lyap: np.ndarray
    phi_hat: np.ndarray
    phi_t: np.ndarray
    history_quadrature: str
    bound_factor: float | None
    dt: float

    def monotonicity_budget(self) -> float:
        """Allowed per-step increase of E_lyap: 10 dt^4 times the energy scale."""
        return 10.0 * self.dt**4 * max(float(np.max(self.E_lyap)), float(np.max(self.E_hat)), 1e-300)

    def max_increase(self) -> float:
        return float(np.max(np.diff(self.E_lyap), initial=0.0))

    def lyap_non_increasing(self) -> bool:
        return self.max_increase() <= self.monotonicity_budget()

    def fitted_decay_rate(self) -> float:
        """Least-squares rate r in E_lyap ~ exp(-r t) over the second half of the run.

        Reported as measured; no exponential decay is asserted.
        """
        half = self.times.size // 2
        t, E = self.times[half:], self.E_lyap[half:]
        keep = E > 1e-300
        if np.count_nonzero(keep) < 2:
            return math.nan
        return float(-np.polyfit(t[keep], np.log(E[keep]), 1)[0])


def _energies(c2, a, b, xi_norm, run: ScalarModeRun):
    x2 = xi_norm**2
    E_hat = 0.5 * np.abs(run.phi_t) ** 2 + 0.5 * c2 * x2 * np.abs(run.phi) ** 2
    if a.size == 0:
        return E_hat, E_hat.copy()
    gap = np.array([history_gap(a, b, run, j) for j in range(run.times.size)])
    stiffness = c2 - _kernel_integral(a, b, run.times)
    E_lyap = 0.5 * np.abs(run.phi_t) ** 2 + 0.5 * stiffness * x2 * np.abs(run.phi) ** 2 + 0.5 * x2 * gap
    return E_hat, E_lyap


def energy_trace(m: ZenerModel, xi_norm: float, phi0: complex, phi_t0: complex,
                 t_max: float, dt: float, stride: int = 1) -> EnergyTrace:
    """Integrate the scalar mode and evaluate both energies.

    ``stride`` thins the returned samples (the integration itself always uses
    ``dt``).  Raises ``ValueError`` if ``dt`` exceeds ``0.1 / max(b_i, c |xi|)``.
    """
    limit = 0.1 / max(float(np.max(m.b_arr)), m.c * xi_norm)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds the stability limit {limit:.4g}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    a, b = m.a_arr, m.b_arr
    run = integrate_scalar_mode(m.c2, a, b, xi_norm, phi0, phi_t0, t_max, dt)
    E_hat, E_lyap = _energies(m.c2, a, b, xi_norm, run)
    l = equilibrium_modulus(m)
    sel = slice(None, None, stride)
    return EnergyTrace(
        times=run.times[sel],
        E_hat=E_hat[sel],
        E_lyap=E_lyap[sel],
        phi_hat=run.phi[sel],
        phi_t=run.phi_t[sel],
        history_quadrature="trapezoid with Euler-Maclaurin endpoint correction on the RK4 samples",
        bound_factor=m.c2 / l if l > 0 else None,
        dt=dt,
    )


def elastic_energy(c2: float, xi_norm: float, phi0: complex, phi_t0: complex,
                   t_max: float, dt: float) -> np.ndarray:
    """Standard energy of the memoryless wave mode (the K = 0 limit)."""
    run = integrate_scalar_mode(c2, [], [], xi_norm, phi0, phi_t0, t_max, dt)
    return 0.5 * np.abs(run.phi_t) ** 2 + 0.5 * c2 * xi_norm**2 * np.abs(run.phi) ** 2


def exact_scalar_mode(m: ZenerModel, xi_norm: float, phi0: complex, phi_t0: complex, t: float) -> complex:
    """phi(t) from the exponential of the auxiliary-variable generator."""
    M = _mode_generator(m.c2, m.a_arr, m.b_arr, xi_norm)
    y0 = np.concatenate([[phi0, phi_t0], np.zeros(m.k)]).astype(complex)
    return complex((matrix_exp(M, t) @ y0)[0])


def history_convolution_solve(m: ZenerModel, xi_norm: float, phi0: complex, phi_t0: complex,
                              t_max: float, dt: float) -> ScalarModeRun:
    """Integrate the mode equation with the memory term taken from stored history.

    Independent of the auxiliary-variable formulation: RK4 on (phi, phi_t)
    where ``(K * phi)`` at each stage time is split into the part over the
    stored grid (trapezoid with endpoint correction) and the part inside the
    current step (Gauss-Legendre on the cubic Taylor polynomial of phi).
    Cost grows quadratically with the number of steps.
    """
    a, b = m.a_arr, m.b_arr
    c2x, x2 = m.c2 * xi_norm**2, xi_norm**2
    n = _n_steps(t_max, dt)
    phi = np.zeros(n + 1, dtype=complex)
    dphi = np.zeros(n + 1, dtype=complex)
    phi[0], dphi[0] = phi0, phi_t0
    times = np.arange(n + 1) * dt
    K0 = float(_kernel(a, b, 0.0))

    def history(j, tau, kern, dkern):
        # int_0^{t_j} kern(tau - s) phi(s) ds
        if j == 0:
            return 0j
        s = times[: j + 1]
        f = kern(a, b, tau - s) * phi[: j + 1]
        trap = dt * (f.sum() - 0.5 * (f[0] + f[-1]))
        # d/ds [kern(tau - s) phi(s)] = -dkern(tau - s) phi + kern(tau - s) phi_t
        df = lambda i: -dkern(a, b, tau - s[i]) * phi[i] + kern(a, b, tau - s[i]) * dphi[i]
        return trap - dt * dt / 12.0 * (df(j) - df(0))

    for j in range(n):
        tn = times[j]
        conv = history(j, tn, _kernel, _kernel_derivative)
        dconv = K0 * phi[j] + history(j, tn, _kernel_derivative, _kernel_second_derivative)
        p2 = -c2x * phi[j] + x2 * conv
        p3 = -c2x * dphi[j] + x2 * dconv
        taylor = lambda sig: phi[j] + sig * (dphi[j] + sig * (p2 / 2 + sig * p3 / 6))

        def memory(theta):
            tau = tn + theta * dt
            total = history(j, tau, _kernel, _kernel_derivative)
            if theta > 0:
                sig = theta * dt * _GL_NODES
                total += theta * dt * np.sum(_GL_WEIGHTS * _kernel(a, b, theta * dt - sig) * taylor(sig))
            return total

        mem = {0.0: conv, 0.5: memory(0.5), 1.0: memory(1.0)}
        rhs = lambda y, theta: np.array([y[1], -c2x * y[0] + x2 * mem[theta]])
        y = np.array([phi[j], dphi[j]])
        k1 = rhs(y, 0.0)
        k2 = rhs(y + 0.5 * dt * k1, 0.5)
        k3 = rhs(y + 0.5 * dt * k2, 0.5)
        k4 = rhs(y + dt * k3, 1.0)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        phi[j + 1], dphi[j + 1] = y
    return ScalarModeRun(times=times, phi=phi, phi_t=dphi, memory=np.zeros((n + 1, 0)))


def derivative_identity_residual(m: ZenerModel, xi_norm: float, phi0: complex, phi_t0: complex,
                                 t_max: float, dt: float, samples: int = 8) -> float:
    """Max residual of the memory-term derivative identity at sampled times.

    Checks
    ``d/dt[(K (x) phi) - |phi|^2 int_0^t K] = (K' (x) phi) - 2 Re(conj(phi_t) (K * phi)) - K(t) |phi|^2``
    with the left side by central differences of quadrature values, so the
    residual is O(dt^2).
    """
    a, b = m.a_arr, m.b_arr
    run = integrate_scalar_mode(m.c2, a, b, xi_norm, phi0, phi_t0, t_max, dt)
    n = run.times.size - 1
    idx = np.unique(np.linspace(2, n - 2, samples).astype(int))

    def lhs_fn(j):
        return history_gap(a, b, run, j) - abs(run.phi[j]) ** 2 * float(_kernel_integral(a, b, run.times[j]))

    worst = 0.0
    for j in idx:
        lhs = (lhs_fn(j + 1) - lhs_fn(j - 1)) / (2 * dt)
        t = run.times[j]
        gap_prime = history_gap(a, b, run, j, kernel=_kernel_derivative, dkernel=_kernel_second_derivative)
        # (K * phi)(t) = -sum_i w_i / (xi^2) from the memory variables
        conv = -np.sum(run.memory[j]) / xi_norm**2
        rhs = gap_prime - 2 * np.real(np.conj(run.phi_t[j]) * conv) - float(_kernel(a, b, t)) * abs(run.phi[j]) ** 2
        worst = max(worst, abs(lhs - rhs))
    return worst


# -- stability verdicts ------------------------------------------------------------


class Stability(enum.Enum):
    StronglyStable = "strongly-stable"
    WeaklyStable = "weakly-stable"
    Unstable = "unstable"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Stability
    witness: dict | None
    growth_rate: float


def verdict_grid(xi_samples: int) -> np.ndarray:
    if xi_samples < 1:
        raise ValueError("xi_samples must be >= 1")
    return np.geomspace(*VERDICT_XI_RANGE, xi_samples)


def _geometric_multiplicity(Phi: np.ndarray, lam: complex) -> int:
    M = Phi - lam * np.eye(Phi.shape[0])
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s <= RANK_RTOL * max(norm2(Phi), 1.0)))


def _limit_witness(m: ZenerModel):
    """Instability visible only in the asymptotic limits, or None."""
    large = large_xi_expansion(m)
    if large.growth_limit > RE_ZERO_BAND:
        return {"xi": "inf", "re_lambda": large.growth_limit}
    small = small_xi_expansion(m)
    if small.l < 0 and not small.degenerate:
        return {"xi": "0+", "re_lambda_over_xi": math.sqrt(-small.l)}
    rate = max(-br.coeffs[2].real for br in small.branch_acoustic)
    if rate > RE_ZERO_BAND:
        return {"xi": "0+", "re_lambda_over_xi2": rate}
    return None


def stability_verdict(m: ZenerModel, xi_samples: int = 61) -> StabilityVerdict:
    """Classify the Cauchy problem from eigenvalues over a log-spaced |xi| grid.

    Unstable if some sampled eigenvalue (or an asymptotic limit) has positive
    real part beyond the Re = 0 band; weakly stable if some eigenvalue in the
    band has a non-trivial Jordan block; strongly stable otherwise.
    """
    grid = verdict_grid(xi_samples)
    growth = -math.inf
    worst = None
    jordan = None
    for x in grid:
        xi = np.zeros(m.d)
        xi[0] = x
        rs = phi_eigenvalues(m, xi)
        for z, mult in zip(rs.roots, rs.multiplicities):
            if z.real > growth:
                growth = float(z.real)
            if re_zero(z):
                if jordan is None and mult > 1:
                    geo = _geometric_multiplicity(phi_matrix(m, xi), z)
                    if geo < mult:
                        jordan = {"xi": float(x), "eigenvalue": [float(z.real), float(z.imag)],
                                  "algebraic": int(mult), "geometric": geo}
            elif z.real > 0 and (worst is None or z.real > worst["re_lambda"]):
                worst = {"xi": float(x), "re_lambda": float(z.real), "eigenvalue": [float(z.real), float(z.imag)]}
    large = large_xi_expansion(m)
    growth = max(growth, large.growth_limit)
    if worst is None:
        worst = _limit_witness(m)
    if worst is not None:
        return StabilityVerdict(Stability.Unstable, worst, growth)
    if jordan is not None:
        return StabilityVerdict(Stability.WeaklyStable, jordan, growth)
    return StabilityVerdict(Stability.StronglyStable, None, growth)
