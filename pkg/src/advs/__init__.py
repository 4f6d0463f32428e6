"""Adiabatic Grover search weakly coupled to a bosonic environment.

A two-level effective model of the search Hamiltonian, gap-adapted
schedules, bath spectral models, and four independent routes to the final
excited-state probability <P1(T)>, plus sweep and scaling-fit tooling to
test how the infrared behavior of the environment decides scalability.
"""

from .bruteforce import (FullState, Propagator2x2, evolve_full,
                         interaction_matrix_element, p1_brute_double_integral,
                         propagator_2x2, propagator_sequence)
from .errors import (BudgetExceededError, ConvergenceError,
                     InfraredDivergenceError, NormDriftError, NumericalError,
                     SaddleError)
from .failure import (FailureEstimate, p1_asymptotic, p1_frequency_domain,
                      p1_markovian, p1_scaling_law, p1_time_domain)
from .grover import (EffectiveHamiltonian, GroverInstance, MatrixElement,
                     adiabatic_coupling, adiabatic_error_estimate,
                     effective_hamiltonian, gap, gap_derivative,
                     matrix_element, phase_integral, transition_profile)
from .integrators import (QuadratureResult, SaddlePoint, adaptive_quad,
                          find_saddles, oscillatory_amplitude, reset_budget,
                          set_budget, stationary_phase_amplitude_sq)
from .schedules import (CUSTOM_TABLE, GAP_LINEAR, GAP_SQUARED, KINDS, UNIFORM,
                        PhaseIntegral, Schedule, build_custom_schedule,
                        build_schedule, runtime_scaling_sweep,
                        schedule_from_json, schedule_to_json)
from .spectral import (CorrelationKernel, CouplingConfig, MarkovianDelta,
                       PowerLaw, SpectralModel, TabulatedGrid,
                       correlation_kernel, effective_weight, f_eval, preset,
                       total_channel_weight)
from .sweep import (ExponentFit, SweepResult, SweepRow, SweepSpec,
                    fit_exponent, fit_with_log_regressor, result_to_json,
                    rows_to_csv, run_sweep, threshold_report)

__version__ = "0.1.0"
