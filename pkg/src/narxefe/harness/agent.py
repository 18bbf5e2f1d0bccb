"""Receding-horizon agent: filter, shift, plan, act."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..basis import DelayVector, PolyBasis, expand, shift
from ..belief import NormalGammaBelief, update
from ..objective import ControlProblem, GoalPrior, batch_value_and_grad, breakdown
from ..optimizer import OptimizerConfig, OptimizerResult, minimize


@dataclass(frozen=True)
class AgentConfig:
    kind: str
    prior: NormalGammaBelief
    basis: PolyBasis
    goal: GoalPrior
    horizon: int = 1
    u_min: float = -1.0
    u_max: float = 1.0
    eta: float = 0.0
    optimizer: OptimizerConfig = OptimizerConfig()
    warm_start: bool = True

    def __post_init__(self):
        if self.kind not in ("efe", "qcr"):
            raise ValueError(f"objective kind must be 'efe' or 'qcr', got {self.kind!r}")
        if self.kind == "efe" and not self.prior.alpha > 1:
            raise ValueError(f"EFE agent needs prior alpha > 1, got {self.prior.alpha}")
        if self.basis.feature_dim != self.prior.dim:
            raise ValueError(
                f"basis has {self.basis.feature_dim} features but prior mean has length {self.prior.dim}"
            )


@dataclass(frozen=True)
class AgentState:
    belief: NormalGammaBelief
    x: DelayVector
    u_last: float = 0.0
    plan: Optional[np.ndarray] = None
    k: int = 0

    @classmethod
    def initial(cls, config: AgentConfig) -> "AgentState":
        return cls(config.prior, DelayVector.zeros(config.basis.delays))


@dataclass
class StepDiagnostics:
    result: OptimizerResult
    problem: ControlProblem


def plan(config: AgentConfig, state: AgentState) -> tuple[np.ndarray, StepDiagnostics]:
    problem = ControlProblem(
        belief=state.belief,
        basis=config.basis,
        x0=state.x,
        goal=config.goal,
        horizon=config.horizon,
        u_min=config.u_min,
        u_max=config.u_max,
        eta=config.eta,
    )
    warm = None
    if config.warm_start and state.plan is not None and state.plan.size == config.horizon:
        warm = np.append(state.plan[1:], state.plan[-1])
    opt = replace(config.optimizer, seed=config.optimizer.seed + state.k)
    res = minimize(batch_value_and_grad(problem, config.kind), problem.bounds, opt, batched=True, warm_start=warm)
    return res.u_star, StepDiagnostics(res, problem)


def observe(config: AgentConfig, state: AgentState, y_obs: float) -> AgentState:
    """Condition on ``y_obs`` (produced by ``state.u_last``) and shift the delay vector."""
    phi = expand(config.basis, state.x, state.u_last)
    belief = update(state.belief, phi, y_obs)
    return replace(state, belief=belief, x=shift(state.x, y_obs, state.u_last))


def act(config: AgentConfig, state: AgentState):
    u_plan, diag = plan(config, state)
    u = float(u_plan[0])
    return u, replace(state, u_last=u, plan=u_plan, k=state.k + 1), diag


def run_agent_step(config: AgentConfig, state: AgentState, observation: Optional[float] = None):
    """One control cycle: filter the new observation (if any), then re-plan.

    The belief update uses the features of the previous delay vector and the
    control that was actually applied.  Only the first element of the
    optimised sequence is returned for application.
    """
    if observation is not None:
        state = observe(config, state, observation)
    return act(config, state)


def objective_breakdown(diag: StepDiagnostics):
    return breakdown(diag.problem, diag.result.u_star)
