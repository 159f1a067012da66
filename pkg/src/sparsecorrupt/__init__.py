"""Recovery of sparse signals from sparsely corrupted measurements z = A x + B e."""

from .dictionaries import (CoherenceProfile, Dictionary, build_dct2d, build_dft, build_etf_approx,
                           build_haar2d, build_hadamard, build_identity, coherence, concat, etf_pair,
                           load_dictionary, mutual_coherence, profile, save_dictionary)
from .errors import (DegenerateColumnError, DimensionError, GuardExceededError, InfeasibleError,
                     NotFoundError, NumericalError, PreconditionError, SingularSystemError,
                     SparseCorruptError, UnsupportedParameterError)
from .experiments import (CellResult, ExperimentGrid, inpaint_experiment, run_cell, run_grid,
                          success_contour)
from .guarantees import ThresholdVerdict, contour, verdict
from .recovery import (Recovery, build_projected_system, check_appendix_bounds, recover_case_I,
                       recover_case_II_E, recover_case_II_X, recover_case_III, recover_case_IV)
from .signals import KnowledgeDescriptor, SparseVector, comb, concentration, random_instance, trial_rng
from .solvers import SolveReport, basis_pursuit, brute_force_p0, brute_force_p0_ne, omp, pinv_solve
from .specs import dictionary_pair, parse_dict_spec
from .uncertainty import UncertaintyCheck, check_uncertainty, f_bound, verify_common_signal

__version__ = "0.1.0"
