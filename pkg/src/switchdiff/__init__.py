"""Solvers for the Kolmogorov forward equation of regime-switching diffusions
with hidden states distributed over [0,1]: a spectral construction with
closed-form solution families, plus independent finite-difference and
Monte-Carlo oracles for cross-validation."""

from .basis import (KernelMatrix, OrthonormalBasis, check_q_property_continuous,
                    eval_basis, project_initial_data, project_kernel)
from .closed_form import (FourStateParams, TwoStateParams, delta_bneg,
                          four_state_A, four_state_solution, steady_state_bounds,
                          stepwise_delta_bneg, stepwise_gaussian_b0,
                          uniform_gaussian_b0, uniform_gaussian_bneg_bounds,
                          uniform_gaussian_bnz)
from .families import (InitialData, stepwise_delta, stepwise_gaussian,
                       uniform_delta, uniform_gaussian)
from .fields import DensityField, compare_fields
from .mixtures import GaussMix
from .model import (ContinuousModel, DiscreteModel, continuous_to_discrete,
                    discrete_to_continuous, validate)
from .oracle import (FDGrid, PathEnsemble, compare, estimate_density, fd_solve,
                     mc_simulate)
from .scenario import Scenario, load_scenario, preset, run_scenario
from .spectral import (ModeCoefficients, evolve_modes_b0, evolve_modes_bnz,
                       forward_transform, reassemble, solve)
from .stepwise import StepwiseFunction, StepwiseKernel

__version__ = "0.1.0"
