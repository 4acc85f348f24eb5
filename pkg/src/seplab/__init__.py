"""Separatrices of single-field inflaton flows in the Hamilton-Jacobi picture.

Modules:
    potential   catalog of model potentials, class-alpha verdict, units
    flow        the first-order flow h' = sqrt(h^2 - v), charts, classification
    series      truncated asymptotic series and separatrix recurrences
    separatrix  shooting and backward solvers for the separatrix
    resum       erfc-type approximants, erfcx and Pade rationals
    timedomain  cosmic time reconstruction and blow-up detection
    cli         the ``seplab`` command line
"""

from .errors import ConfigError, NumericFailure, SeplabError
from .flow import Chart, FlowConfig, PhasePoint, Trajectory, Verdict, classify, integrate, integrate_backward
from .potential import (CATALOG, Custom, EModel, Exponential, Higgs, ModulatedExp, Monomial,
                        PotentialSpec, SteepWell, classify_class_alpha, make_potential, parse_potential)
from .resum import educated_match, erfcx, pade, quartic_approximant
from .separatrix import find_separatrix_backward, find_separatrix_shooting, separatrix_series
from .series import TruncatedSeries
from .timedomain import blow_up, reconstruct_time

__all__ = [
    "CATALOG", "Chart", "ConfigError", "Custom", "EModel", "Exponential", "FlowConfig", "Higgs",
    "ModulatedExp", "Monomial", "NumericFailure", "PhasePoint", "PotentialSpec", "SeplabError",
    "SteepWell", "Trajectory", "TruncatedSeries", "Verdict", "blow_up", "classify",
    "classify_class_alpha", "educated_match", "erfcx", "find_separatrix_backward",
    "find_separatrix_shooting", "integrate", "integrate_backward", "make_potential", "pade",
    "parse_potential", "quartic_approximant", "reconstruct_time", "separatrix_series",
]
