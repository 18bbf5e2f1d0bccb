"""TOML experiment configuration.

Sections map onto the library modules::

    [experiment]  name, plant ("linear" | "pendulum"), steps, seed, agents
    [basis]       degree, intercept, cross_terms, m_y, m_u
    [prior]       mu (list) or mu_fill (scalar), lambda_scale, alpha, beta
    [goal]        m_star, v_star
    [control]     horizon, u_min, u_max, eta, warm_start
    [optimizer]   n_starts, max_iters, gtol, step_tol, seed
    [plant]       plant-specific parameters (see ``build_plant``)
    [summary]     tol, hold
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..basis import DelayConfig, PolyBasis
from ..belief import NormalGammaBelief
from ..objective import GoalPrior
from ..optimizer import OptimizerConfig
from ..plant import LinearARPlant, PendulumPlant
from .agent import AgentConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


SCHEMA = {
    "experiment": {"name", "plant", "steps", "seed", "agents"},
    "basis": {"degree", "intercept", "cross_terms", "m_y", "m_u"},
    "prior": {"mu", "mu_fill", "lambda_scale", "alpha", "beta"},
    "goal": {"m_star", "v_star"},
    "control": {"horizon", "u_min", "u_max", "eta", "warm_start"},
    "optimizer": {"n_starts", "max_iters", "gtol", "step_tol", "seed"},
    "plant": {
        "theta_star", "y0", "noise_std",
        "mass", "length", "friction", "dt", "gravity", "obs_std", "angle0", "velocity0",
    },
    "summary": {"tol", "hold"},
}


@dataclass
class ExperimentConfig:
    name: str
    plant: str
    steps: int
    seed: int
    agents: list[str]
    basis: PolyBasis
    prior_mu: np.ndarray
    lambda_scale: float
    alpha: float
    beta: float
    goal: GoalPrior
    horizon: int
    u_min: float
    u_max: float
    eta: float
    warm_start: bool
    optimizer: OptimizerConfig
    plant_params: dict = field(default_factory=dict)
    tol: float = 0.3
    hold: int = 20

    def prior(self, lambda_scale: float | None = None) -> NormalGammaBelief:
        scale = self.lambda_scale if lambda_scale is None else lambda_scale
        return NormalGammaBelief.isotropic(self.prior_mu, scale, self.alpha, self.beta)

    def agent(self, kind: str, lambda_scale: float | None = None) -> AgentConfig:
        return AgentConfig(
            kind=kind,
            prior=self.prior(lambda_scale),
            basis=self.basis,
            goal=self.goal,
            horizon=self.horizon,
            u_min=self.u_min,
            u_max=self.u_max,
            eta=self.eta,
            optimizer=self.optimizer,
            warm_start=self.warm_start,
        )


def _get(sec: dict, section: str, key: str, kind, default: Any = ...):
    if key not in sec:
        if default is ...:
            raise ConfigError(f"missing required key '{section}.{key}'")
        return default
    val = sec[key]
    try:
        if kind is bool:
            if not isinstance(val, bool):
                raise TypeError
            return val
        if kind is int and (isinstance(val, bool) or float(val) != int(val)):
            raise TypeError
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{section}.{key}' must be {kind.__name__}, got {val!r}") from None


def parse_config(raw: dict) -> ExperimentConfig:
    for section, body in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section '{section}'")
        if not isinstance(body, dict):
            raise ConfigError(f"'{section}' must be a table")
        for key in body:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key '{section}.{key}'")
    sec = {name: raw.get(name, {}) for name in SCHEMA}

    ex = sec["experiment"]
    plant = _get(ex, "experiment", "plant", str)
    if plant not in ("linear", "pendulum"):
        raise ConfigError(f"key 'experiment.plant' must be 'linear' or 'pendulum', got {plant!r}")
    steps = _get(ex, "experiment", "steps", int, 2 if plant == "linear" else 300)
    if steps < 0:
        raise ConfigError("key 'experiment.steps' must be >= 0")
    agents = ex.get("agents", ["efe", "qcr"])
    if not isinstance(agents, list) or not agents or any(a not in ("efe", "qcr") for a in agents):
        raise ConfigError(f"key 'experiment.agents' must be a non-empty list of 'efe'/'qcr', got {agents!r}")

    bs = sec["basis"]
    try:
        basis = PolyBasis(
            DelayConfig(_get(bs, "basis", "m_y", int), _get(bs, "basis", "m_u", int)),
            degree=_get(bs, "basis", "degree", int),
            include_intercept=_get(bs, "basis", "intercept", bool),
            cross_terms=_get(bs, "basis", "cross_terms", bool, False),
        )
    except NotImplementedError as err:
        raise ConfigError(f"key 'basis.cross_terms': {err}") from None
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"section 'basis': {err}") from None

    pr = sec["prior"]
    if "mu" in pr and "mu_fill" in pr:
        raise ConfigError("keys 'prior.mu' and 'prior.mu_fill' are mutually exclusive")
    if "mu" in pr:
        try:
            mu = np.asarray(pr["mu"], dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ConfigError(f"key 'prior.mu' must be a list of numbers, got {pr['mu']!r}") from None
        if mu.size != basis.feature_dim:
            raise ConfigError(f"key 'prior.mu' has length {mu.size}, basis has {basis.feature_dim} features")
    else:
        mu = np.full(basis.feature_dim, _get(pr, "prior", "mu_fill", float))
    lambda_scale = _get(pr, "prior", "lambda_scale", float)
    alpha = _get(pr, "prior", "alpha", float)
    beta = _get(pr, "prior", "beta", float)
    if not lambda_scale > 0:
        raise ConfigError("key 'prior.lambda_scale' must be positive")
    if not beta > 0:
        raise ConfigError("key 'prior.beta' must be positive")
    if not alpha > 0 or ("efe" in agents and not alpha > 1):
        raise ConfigError("key 'prior.alpha' must exceed 1 for EFE agents (and be positive otherwise)")

    gl = sec["goal"]
    v_star = _get(gl, "goal", "v_star", float, 1.0)
    if not v_star > 0:
        raise ConfigError("key 'goal.v_star' must be positive")
    goal = GoalPrior(_get(gl, "goal", "m_star", float), v_star)

    ct = sec["control"]
    horizon = _get(ct, "control", "horizon", int, 1)
    u_min = _get(ct, "control", "u_min", float, -1.0)
    u_max = _get(ct, "control", "u_max", float, 1.0)
    eta = _get(ct, "control", "eta", float, 0.0)
    if horizon < 1:
        raise ConfigError("key 'control.horizon' must be >= 1")
    if not u_min < u_max:
        raise ConfigError("keys 'control.u_min'/'control.u_max' must satisfy u_min < u_max")
    if eta < 0:
        raise ConfigError("key 'control.eta' must be non-negative")

    op = sec["optimizer"]
    try:
        optimizer = OptimizerConfig(
            n_starts=_get(op, "optimizer", "n_starts", int, 8),
            max_iters=_get(op, "optimizer", "max_iters", int, 200),
            gtol=_get(op, "optimizer", "gtol", float, 1e-8),
            step_tol=_get(op, "optimizer", "step_tol", float, 1e-10),
            seed=_get(op, "optimizer", "seed", int, 0),
        )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"section 'optimizer': {err}") from None

    sm = sec["summary"]
    return ExperimentConfig(
        name=str(ex.get("name", plant)),
        plant=plant,
        steps=steps,
        seed=_get(ex, "experiment", "seed", int, 0),
        agents=list(agents),
        basis=basis,
        prior_mu=mu,
        lambda_scale=lambda_scale,
        alpha=alpha,
        beta=beta,
        goal=goal,
        horizon=horizon,
        u_min=u_min,
        u_max=u_max,
        eta=eta,
        warm_start=_get(ct, "control", "warm_start", bool, True),
        optimizer=optimizer,
        plant_params=dict(sec["plant"]),
        tol=_get(sm, "summary", "tol", float, 0.3),
        hold=_get(sm, "summary", "hold", int, 20),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from None
    return parse_config(raw)


def build_plant(config: ExperimentConfig, seed: int):
    p = config.plant_params
    if config.plant == "linear":
        theta = p.get("theta_star", [0.5, -0.5])
        if not (isinstance(theta, list) and len(theta) == 2):
            raise ConfigError(f"key 'plant.theta_star' must be a pair, got {theta!r}")
        return LinearARPlant(
            theta_star=(float(theta[0]), float(theta[1])),
            y_prev=_get(p, "plant", "y0", float, 0.0),
            noise_std=_get(p, "plant", "noise_std", float, 0.0),
            seed=seed,
        )
    try:
        return PendulumPlant(
            mass=_get(p, "plant", "mass", float, 1.0),
            length=_get(p, "plant", "length", float, 0.5),
            friction=_get(p, "plant", "friction", float, 0.01),
            dt=_get(p, "plant", "dt", float, 0.1),
            gravity=_get(p, "plant", "gravity", float, 9.81),
            obs_std=_get(p, "plant", "obs_std", float, 0.001),
            angle=_get(p, "plant", "angle0", float, 0.0),
            velocity=_get(p, "plant", "velocity0", float, 0.0),
            seed=seed,
        )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"section 'plant': {err}") from None
