"""Mispricing (fads) model under asymmetric information.

Simulation of the stock and its mean-reverting pricing error, the
uninformed investor's innovation filter, CRRA-optimal portfolios, closed-form
value functions and Monte Carlo checks of all of them.
"""

from .model import CoefficientCurve, ModelParams, ParameterError, TimeGrid, validate_params
from .montecarlo import Estimand, ExperimentSpec, Rule, run_experiment
from .valuation import value_function

__all__ = [
    "CoefficientCurve", "Estimand", "ExperimentSpec", "ModelParams", "ParameterError",
    "Rule", "TimeGrid", "run_experiment", "validate_params", "value_function",
]
__version__ = "0.1.0"
