"""Convergent under-approximations of reachable sets and tubes for LTV systems.

Zonotopic set recursion with constant step inputs: every computed set is a
guaranteed subset of the true reachable set, certified constructively by
witness simulation, and converges to it as the time grid refines.
"""

from .reach import (ReachResult, StepInputMap, TimeGrid, growth_bound,
                    reach_sets, step_input_map, tube, verify_growth_bound)
from .systems import (BUILTIN_NAMES, CallbackProvider, ConstantProvider,
                      MatrixProvider, PiecewiseConstantProvider, SpecError,
                      SystemSpec, builtin_system, load_spec_file,
                      parse_spec_dict)
from .transition import TransitionOracle, matrix_exponential
from .validate import (CertificationReport, ConvergenceReport, Witness,
                       certify_under_approximation, convergence_study,
                       extract_witness, hausdorff_convex, hausdorff_tube,
                       simulate_step_inputs)
from .zonotope import Zonotope, set_norm

__version__ = "0.1.0"

__all__ = [
    "Zonotope", "set_norm",
    "MatrixProvider", "ConstantProvider", "PiecewiseConstantProvider",
    "CallbackProvider", "SystemSpec", "SpecError", "builtin_system",
    "parse_spec_dict", "load_spec_file", "BUILTIN_NAMES",
    "TransitionOracle", "matrix_exponential",
    "TimeGrid", "StepInputMap", "ReachResult", "step_input_map", "reach_sets",
    "tube", "growth_bound", "verify_growth_bound",
    "Witness", "CertificationReport", "ConvergenceReport", "extract_witness",
    "simulate_step_inputs", "certify_under_approximation", "hausdorff_convex",
    "hausdorff_tube", "convergence_study",
    "__version__",
]
