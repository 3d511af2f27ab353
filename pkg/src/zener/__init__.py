"""Spectral analysis of generalized Zener viscoelastic relaxation systems.

The main entry points are re-exported here; see the submodules for the full
interface.
"""

from .asymptotics import expansion_error_scan, large_xi_expansion, small_xi_expansion
from .charpoly import classify_analytic, full_classification, hurwitz_table, reduced_charpoly
from .evolution import energy_trace, evolve_mode, plane_wave_field, stability_verdict
from .expm import ExpmSaturation, matrix_exp
from .model import ModelError, ZenerModel, from_physical, load_model, new_model
from .roots import cross_validate, phi_eigenvalues, poly_roots, zero_structure
from .symbol import build_symbol, cond_bound_constant, spectral_certificate

__version__ = "0.1.0"

__all__ = [
    "ExpmSaturation", "ModelError", "ZenerModel", "build_symbol", "classify_analytic",
    "cond_bound_constant", "cross_validate", "energy_trace", "evolve_mode", "expansion_error_scan",
    "from_physical", "full_classification", "hurwitz_table", "large_xi_expansion", "load_model",
    "matrix_exp", "new_model", "phi_eigenvalues", "plane_wave_field", "poly_roots",
    "reduced_charpoly", "small_xi_expansion", "spectral_certificate", "stability_verdict",
    "zero_structure",
]
