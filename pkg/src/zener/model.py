"""Generalized Zener relaxation parameters and the associated memory kernel.

A model is described by the squared unrelaxed wave speed ``c2``, kernel
amplitudes ``a`` and inverse relaxation times ``b``::

    K(t) = -sum_i a_i exp(-b_i t)

together with the space dimension ``d``.  The state vector of the first-order
system has ``n = k*d + d + 1`` entries.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DUPLICATE_RTOL = 1e-12


class ModelError(ValueError):
    """Raised for inadmissible model parameters or malformed model files.

    ``field`` names the offending parameter so callers can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class Absorption(enum.Enum):
    ABSORBING = "Absorbing"
    NON_MONOTONE_KERNEL = "NonMonotoneKernel"
    NON_POSITIVE_EQUILIBRIUM = "NonPositiveEquilibrium"


@dataclass(frozen=True)
class ZenerModel:
    c2: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    d: int

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return self.k * self.d + self.d + 1

    @property
    def c(self) -> float:
        return math.sqrt(self.c2)

    @property
    def a_arr(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    @property
    def b_arr(self) -> np.ndarray:
        return np.asarray(self.b, dtype=float)

    @property
    def kernel(self) -> "KernelSpec":
        return KernelSpec(self)

    def with_dim(self, d: int) -> "ZenerModel":
        return new_model(self.c2, self.a, self.b, d)

    def to_dict(self) -> dict:
        return {"c2": self.c2, "a": list(self.a), "b": list(self.b), "dim": self.d}


@dataclass(frozen=True)
class PhysicalElement:
    M_R: float
    tau_sigma: float
    tau_eps: float


@dataclass(frozen=True)
class PhysicalZener:
    elements: tuple[PhysicalElement, ...]
    d: int


@dataclass(frozen=True)
class KernelSpec:
    """Read-only view of the relaxation kernel of a model."""

    model: ZenerModel

    def __call__(self, t):
        return kernel_at(self.model, t)

    def derivative(self, t):
        m = self.model
        t = np.asarray(t, dtype=float)
        return np.sum(m.a_arr * m.b_arr * np.exp(-np.multiply.outer(t, m.b_arr)), axis=-1)

    def integral(self, t):
        """Closed form of int_0^t K(s) ds."""
        m = self.model
        t = np.asarray(t, dtype=float)
        return -np.sum(
            m.a_arr / m.b_arr * -np.expm1(-np.multiply.outer(t, m.b_arr)), axis=-1
        )

    @property
    def l(self) -> float:
        return equilibrium_modulus(self.model)


def new_model(c2: float, a: Sequence[float], b: Sequence[float], d: int) -> ZenerModel:
    """Validate parameters and build a model with ``b`` sorted ascending.

    ``a`` is permuted in lockstep with ``b``.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    c2 = float(c2)
    if len(a) != len(b):
        raise ModelError(f"a and b must have equal length, got {len(a)} and {len(b)}", "a")
    if len(a) < 1:
        raise ModelError("at least one relaxation element is required", "a")
    if not math.isfinite(c2) or c2 <= 0:
        raise ModelError(f"c2 must be positive, got {c2}", "c2")
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ModelError(f"dim must be a positive integer, got {d}", "dim")
    for i, (ai, bi) in enumerate(zip(a, b)):
        if not math.isfinite(bi) or bi <= 0:
            raise ModelError(f"b[{i}] must be positive, got {bi}", "b")
        if not math.isfinite(ai) or ai == 0:
            raise ModelError(f"a[{i}] must be finite and nonzero, got {ai}", "a")
    order = sorted(range(len(b)), key=lambda i: b[i])
    b_sorted = tuple(b[i] for i in order)
    a_sorted = tuple(a[i] for i in order)
    for lo, hi in zip(b_sorted, b_sorted[1:]):
        if hi - lo <= DUPLICATE_RTOL * hi:
            raise ModelError(f"b values must be pairwise distinct, got {lo} and {hi}", "b")
    return ZenerModel(c2=c2, a=a_sorted, b=b_sorted, d=int(d))


def from_physical(p: PhysicalZener) -> ZenerModel:
    """Map deformation moduli and relaxation times to kernel parameters.

    With ``r_i = tau_eps_i / tau_sigma_i``::

        c2  = sum M_R_i r_i
        b_i = 1 / tau_sigma_i
        a_i = M_R_i (1 - r_i) b_i
    """
    if not p.elements:
        raise ModelError("at least one element is required", "elements")
    c2 = 0.0
    a, b = [], []
    for i, el in enumerate(p.elements):
        for name in ("M_R", "tau_sigma", "tau_eps"):
            val = getattr(el, name)
            if not math.isfinite(val) or val <= 0:
                raise ModelError(f"elements[{i}].{name} must be positive, got {val}", name)
        ratio = el.tau_eps / el.tau_sigma
        bi = 1.0 / el.tau_sigma
        c2 += el.M_R * ratio
        b.append(bi)
        a.append(el.M_R * (1.0 - ratio) * bi)
    return new_model(c2, a, b, p.d)


def kernel_at(m: ZenerModel, t):
    """K(t) = -sum a_i exp(-b_i t); accepts scalars or arrays of t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    val = -np.sum(m.a_arr * np.exp(-np.multiply.outer(t_arr, m.b_arr)), axis=-1)
    if t_arr.ndim == 0:
        return float(val)
    return val


def equilibrium_modulus(m: ZenerModel) -> float:
    """l = c2 + sum a_i / b_i, i.e. c2 minus the total kernel mass."""
    return m.c2 + float(np.sum(m.a_arr / m.b_arr))


def absorption_status(m: ZenerModel) -> Absorption:
    if any(x > 0 for x in m.a):
        return Absorption.NON_MONOTONE_KERNEL
    if equilibrium_modulus(m) <= 0:
        return Absorption.NON_POSITIVE_EQUILIBRIUM
    return Absorption.ABSORBING


def model_from_dict(data: dict) -> ZenerModel:
    """Parse either the kernel shape or the physical-elements shape."""
    if not isinstance(data, dict):
        raise ModelError("model file must contain a JSON object", None)
    kernel_keys = {"c2", "a", "b"}
    has_kernel = bool(kernel_keys & data.keys())
    has_physical = "elements" in data
    if has_kernel and has_physical:
        raise ModelError("model must give either c2/a/b or elements, not both", "elements")
    if "dim" not in data:
        raise ModelError("missing field 'dim'", "dim")
    d = data["dim"]
    if not isinstance(d, int) or isinstance(d, bool):
        raise ModelError(f"dim must be an integer, got {d!r}", "dim")
    if has_physical:
        elements = data["elements"]
        if not isinstance(elements, list):
            raise ModelError("elements must be a list", "elements")
        parsed = []
        for i, el in enumerate(elements):
            if not isinstance(el, dict):
                raise ModelError(f"elements[{i}] must be an object", "elements")
            try:
                parsed.append(
                    PhysicalElement(
                        M_R=_number(el["M_R"], "M_R"),
                        tau_sigma=_number(el["tau_sigma"], "tau_sigma"),
                        tau_eps=_number(el["tau_eps"], "tau_eps"),
                    )
                )
            except KeyError as exc:
                raise ModelError(f"elements[{i}] missing field {exc.args[0]!r}", exc.args[0]) from None
        return from_physical(PhysicalZener(tuple(parsed), d))
    for key in ("c2", "a", "b"):
        if key not in data:
            raise ModelError(f"missing field {key!r}", key)
    for key in ("a", "b"):
        if not isinstance(data[key], list):
            raise ModelError(f"{key} must be a list of numbers", key)
    return new_model(
        _number(data["c2"], "c2"),
        [_number(x, "a") for x in data["a"]],
        [_number(x, "b") for x in data["b"]],
        d,
    )


def load_model(path: str | Path) -> ZenerModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc.strerror}", "model") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})", "model") from None
    return model_from_dict(data)


def _number(x, field: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ModelError(f"{field} must be a number, got {x!r}", field)
    return float(x)
