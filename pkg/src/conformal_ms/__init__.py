"""Structure-preserving exponential integrators for damped/driven multi-symplectic PDEs.

Systems ``K z_t + L z_x = grad S(z, t) - a(t) K z + F(x, t)`` are advanced
with exponential box-type schemes whose discrete conformal conservation
laws hold to rounding error. See :mod:`conformal_ms.schemes` for the
generic steppers and :mod:`conformal_ms.specialized` for the reduced
Schrodinger and Camassa-Holm schemes.
"""

from .core import (DampingCoefficient, ExponentialWeights, exp_weights,
                   expdiff_residual, op_A, op_D, product_rule_residual, theta)
from .errors import (ArgumentError, ConfigurationError, ConformalMSError,
                     ConstructionError, EvaluationError, NewtonConvergenceError,
                     ParseError, SolverError, StepError, StudyError,
                     ValidationError)
from .formulation import (CUBIC, FREE, Grid1D, MultiSymplecticSystem,
                          Potential, QuadraticInvariantAction, StateField,
                          make_ch_system, make_decay_system, make_kdv_system,
                          kdv_initial_state,
                          make_nls_conjugate_system, make_nls_system,
                          make_wave_system, norm_action)
from .newton import NewtonConfig, newton_solve
from .schemes import (LSplit, SchemeKind, discrete_gradient, split_L, step,
                      step_embs, step_expbox, step_expdg,
                      step_midpoint_box_baseline, step_mixed_euler_baseline,
                      tangent_step)
from .specialized import (CHField, ComplexField, NLSParams, ic_library,
                          step_ch_expbox, step_ch_preissmann, step_nls_embs,
                          step_nls_midpoint)

__version__ = "0.1.0"
