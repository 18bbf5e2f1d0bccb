"""Adaptive NARX model-predictive control with an expected-free-energy objective."""

from .basis import DelayConfig, DelayVector, PolyBasis, expand, shift
from .belief import NormalGammaBelief, update, marginal_theta, marginal_tau, joint_entropy, log_evidence
from .prediction import StudentTPrediction, predict, predictive_entropy, rollout
from .objective import ControlProblem, GoalPrior, efe, qcr, gradient, breakdown
from .optimizer import OptimizerConfig, minimize

__version__ = "0.1.0"
