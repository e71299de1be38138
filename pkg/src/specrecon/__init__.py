"""Forward and inverse Sturm-Liouville machinery with entire-function
boundary conditions: spectral solves, Cauchy-data maps, moment-problem
reconstruction, the half-inverse driver and a perturbation lab."""

from . import errors
from .cauchy import CauchyData, cauchy_data_of, rebuild_eta, weyl
from .entire import (AnalyticHandle, BoundaryPair, SpectralPoint,
                     boundary_preset, const_handle, poly_handle, rho_of)
from .glrecon import WeylData, norming_constants, reconstruct_q, weyl_data
from .grids import Grid, Potential, grid_2pi, grid_pi
from .halfinv import (HalfInverseInstance, HalfInverseResult,
                      build_boundary_pair, estimate_Omega,
                      full_dirichlet_spectrum, omega_from_instance,
                      solve_half_inverse)
from .kernels import backend_name
from .moments import (ConditionReport, MomentSolution, MomentSystem,
                      PairFunction, build_vsystem, condition_report,
                      recovered_cauchy, solve_moment)
from .propagate import (SolutionPath, SolutionSample, endpoint_values,
                        integrate_backward, integrate_forward, omega_of,
                        second_solution)
from .spectra import (EigenvalueList, SearchRegion, char_fn, char_fn_batch,
                      default_region, find_eigenvalues, find_zeros)
from .stability import (NoiseSpec, PerturbationReport, lemma53_check,
                        loglog_slope, perturb_and_measure)

__version__ = "0.1.0"

__all__ = [
    "AnalyticHandle", "BoundaryPair", "CauchyData", "ConditionReport",
    "EigenvalueList", "Grid", "HalfInverseInstance", "HalfInverseResult",
    "MomentSolution", "MomentSystem", "NoiseSpec", "PairFunction",
    "PerturbationReport", "Potential", "SearchRegion", "SolutionPath",
    "SolutionSample", "SpectralPoint", "WeylData", "backend_name",
    "boundary_preset", "build_boundary_pair", "build_vsystem",
    "cauchy_data_of", "char_fn", "char_fn_batch", "condition_report",
    "const_handle", "default_region", "endpoint_values", "errors",
    "estimate_Omega", "find_eigenvalues", "find_zeros",
    "full_dirichlet_spectrum", "grid_2pi", "grid_pi", "integrate_backward",
    "integrate_forward", "lemma53_check", "loglog_slope",
    "norming_constants", "omega_from_instance", "omega_of",
    "perturb_and_measure", "poly_handle", "rebuild_eta", "reconstruct_q",
    "recovered_cauchy", "rho_of", "second_solution", "solve_half_inverse",
    "solve_moment", "weyl", "weyl_data", "__version__",
]
