"""Homotopy-augmented hyperparameter optimization over GAM surrogates."""
from .driver import Branch, DriverConfig, HomOpt, Trial, TrialHistory, run
from .gam import GamConfig, GamRegressor, fit_gam
from .homotopy import HomotopyConfig, HomotopyPath, eval_homotopy, track_path
from .neldermead import NmConfig, NmResult, minimize
from .objectives import Objective, ObjectiveError, external_objective, gramacy_lee, modified_griewank
from .samplers import ExternalSampler, GPEISampler, RandomSampler, TPESampler
from .space import Categorical, Continuous, DomainError, Integer, SearchSpace

__version__ = "0.1.0"
