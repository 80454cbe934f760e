"""Finite-rank Friedrichs model toolkit: Livšic matrix, resonances, Gamov vectors.

Typical use::

    from resonance_kit import bundled_model, locate_resonances, gamov_vector
    model = bundled_model("scalar")
    res = locate_resonances(model)
    gv = gamov_vector(model, res[0])
"""
from __future__ import annotations

__version__ = "0.1.0"

from .model import (ModelError, ModelSpec, Region, FormFactorTerm, bundled_model, bundled_path,
                    eval_B, eval_M, load_model, parse_model, scalar_gaussian)
from .quad import (Circle, ContourError, QuadResult, QuadratureError, Rectangle, adaptive_gl,
                   argument_integral, contour_integral, integrate_real_line, pv_integrate,
                   winding_number)
from .livsic import (Assumption2Report, LivsicEvaluator, check_assumption2, eval_L,
                     eval_L_derivative, evaluator, plemelj_jump)
from .resonance import (ConvergenceError, NotResonantError, Resonance, ResonanceList, SearchError,
                        kernel, locate_resonances, refine_newton)
from .scattering import (BWFit, FitError, SpectralDensity, breit_wigner, breit_wigner_fit,
                         prop4_check, residue_SE, s_matrix_E, s_matrix_K)
from .gamov import (FormFactorFamily, GamovError, GamovVector, GaussianFamily, RationalFamily,
                    TestFunction, dirac_pairing, eigen_defect, gamov_vector, pairing_phi0,
                    paley_wiener_check, psi_continued, psi_minus, psi_route_pairing,
                    resolvent_pairing_check)
from .semigroup import (DecayFit, DecayFitError, HardyGrid, decay_fit, hardy_project,
                        pre_gamov, semigroup_defect, survival_amplitude, truncated_evolution)
from .checks import Check, RunReport, run_verification

__all__ = [name for name in dir() if not name.startswith("_") and name not in {"annotations"}]
