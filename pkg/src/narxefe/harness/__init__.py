from .agent import AgentConfig, AgentState, act, observe, run_agent_step
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (
    EpisodeTrace,
    first_success,
    run_episode,
    run_experiment,
    sweep_lambda,
    objective_curve,
    swing_up_study,
    write_rows,
)
