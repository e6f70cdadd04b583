"""pllab: a first-order optimization laboratory.

Solvers (full/coordinate/sign/stochastic/variance-reduced gradient and
their proximal variants), growth-condition estimators, and pass/fail
certification of observed convergence against closed-form linear-rate
bounds, on a suite of model problems with exact or oracle-computed optima.
"""

from . import backend
from .backend import active_backend, set_backend, use_backend
from .certify import (RateCertificate, THEOREM_TAGS, certify_deterministic,
                      certify_stochastic, default_checkpoints,
                      sgd_plateau_bound, svrg_rate_factor)
from .conditions import (ChainVerdict, ConditionReport, SampleCloud,
                         check_stationary_points_global, condition_report,
                         default_box, estimate_c2, estimate_condition,
                         estimate_kl, estimate_pl, estimate_proximal_eb,
                         estimate_proximal_pl, estimate_weighted_pl,
                         kl_residual, make_cloud, proximal_eb_residual,
                         verify_implication_chain)
from .errors import (ConfigurationError, DomainError, EstimationError,
                     EvaluationError, PllabError, SpecError)
from .model import (CallableObjective, CompositeProblem, IterateTrace,
                    Regularizer, SmoothObjective, check_gradient, estimate_L,
                    make_trace)
from .problems import (InvexExample, L1LeastSquares, LeastSquares,
                       LogisticRegression, QuadraticObjective, SvmDual,
                       build_rank_deficient_ls, diagonal_quadratic,
                       problem_from_config, problem_to_config, quad_terms,
                       quadratic_sum, quadsum_terms, svm_dual_from_data)
from .prox import (BoxReg, L1Reg, ZeroReg, box, fb_envelope,
                   forward_backward_step, l1, prox_decrease, prox_residual,
                   zero)
from .prox_solvers import (ProxSolverConfig, proximal_coordinate_descent,
                           proximal_gradient)
from .rng import Xoshiro256, seed_state, splitmix64, trial_seed
from .smooth_solvers import (SgdSchedule, SvrgConfig, check_sign_weights,
                             coordinate_descent_gs,
                             coordinate_descent_lipschitz_sampled,
                             coordinate_descent_random, gradient_descent,
                             resolve_sign_weights, run_trials, sgd,
                             sign_gradient_descent, svrg, svrg_rate_factor,
                             weighted_grad_norm)

__version__ = "0.1.0"
