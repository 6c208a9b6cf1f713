"""Semiclassical propagation of squeezed Gaussian wave packets.

Library layout:

* :mod:`semigauss.symplectic` -- symplectic linear algebra, shape forms
* :mod:`semigauss.models` -- catalog of classical Hamiltonians
* :mod:`semigauss.flow` -- trajectory + flow-differential integration
* :mod:`semigauss.gaussian` -- shape transport, widths, wavefunctions
* :mod:`semigauss.floquet` -- periodic-Hessian stability analysis
* :mod:`semigauss.oracle` -- grid Schrödinger reference solver
* :mod:`semigauss.cli` -- scenario runner writing CSV/JSON reports and figures
"""

from .errors import (AliasingError, AmbiguityError, ConditioningError,
                     CoverageError, NumericalGuardError, ResolutionError,
                     SemigaussError, StepUnderflowError, TrajectoryEscapeError,
                     ValidationError)
from .symplectic import (PhaseSpacePoint, SiegelForm, WignerForm, hs_norm,
                         mobius_transform, polar_decompose,
                         siegel_from_wigner_form, symplectic_defect,
                         symplectic_unity, wigner_form_from_siegel)
from .models import HamiltonianModel, MODEL_NAMES, finite_difference_check, make_model
from .flow import (FlowSample, IntegratorOptions, Trajectory, flow_map,
                   integrate_flow, lyapunov_estimate)
from .gaussian import (GaussianState, PropagationResult, WidthSeries,
                       evaluate_wavefunction, propagate_gaussian,
                       width_observable_error, wigner_function)
from .floquet import (FloquetAnalysis, FloquetSpectrum, PeriodDetection,
                      RecurrenceReport, analyze, check_width_recurrence,
                      detect_hessian_period, ehrenfest_time, floquet_spectrum,
                      gronwall_bound, monodromy, recurrence_search,
                      revival_predictor)
from .oracle import (FidelityResult, GridSpec, GridWavefunction,
                     OracleEvolution, ScalingStudy, default_grid, exact_width,
                     fidelity, from_gaussian, hbar_scaling_study, l2_distance,
                     max_split_step, plan_grid, split_step_evolve)

__version__ = "0.1.0"
