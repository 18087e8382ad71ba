"""Numerical laboratory for semilinear Schrodinger/Ginzburg-Landau dynamics
on expanding uniform-isotropic backgrounds: closed-form backgrounds, a
split-step pseudospectral solver with blow-up detection, balance-law
diagnostics, and a symbolic regime classifier."""

from .background import ScaleFactor, ScaleFactorParams
from .classifier import (ProblemSpec, RegimeReport, classify, corollary_verdict,
                         eval_A, theorem1_verdict, thresholds)
from .cosmology import (CosmologyModel, EquationOfStateModel, IsotropyProfile,
                        eval_kappa, friedmann_residual, isotropy_residual,
                        mass_conservation_residual, model_catalogue,
                        raychaudhuri_residual)
from .diagnostics import (ConcavityReport, DiagnosticsRecord, Trajectory,
                          charge_balance, concavity_scan, concavity_watch,
                          energy_balance, virial_watch)
from .grid import GridSpec
from .initial import gaussian, make_initial, random_band_limited, ring
from .solver import (FieldState, Nonlinearity, Safeguards, SolverConfig, Status,
                     evolve, initial_state, linear_half_step, nonlinear_step,
                     strang_step)

__version__ = "0.1.0"

__all__ = [
    "ScaleFactor", "ScaleFactorParams",
    "ProblemSpec", "RegimeReport", "classify", "corollary_verdict", "eval_A",
    "theorem1_verdict", "thresholds",
    "CosmologyModel", "EquationOfStateModel", "IsotropyProfile", "eval_kappa",
    "friedmann_residual", "isotropy_residual", "mass_conservation_residual",
    "model_catalogue", "raychaudhuri_residual",
    "ConcavityReport", "DiagnosticsRecord", "Trajectory", "charge_balance",
    "concavity_scan", "concavity_watch", "energy_balance", "virial_watch",
    "GridSpec", "gaussian", "make_initial", "random_band_limited", "ring",
    "FieldState", "Nonlinearity", "Safeguards", "SolverConfig", "Status",
    "evolve", "initial_state", "linear_half_step", "nonlinear_step", "strang_step",
    "__version__",
]
