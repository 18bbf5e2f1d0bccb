"""Closed-loop episodes, parameter sweeps and objective curves."""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..belief import NormalGammaBelief
from ..objective import ControlProblem, batch_value, breakdown, mutual_information_term
from ..basis import DelayVector, expand
from ..optimizer import minimize
from ..objective import batch_value_and_grad
from .agent import AgentConfig, AgentState, act, objective_breakdown, observe
from .config import ExperimentConfig, build_plant

TRACE_VERSION = 1
TRACE_COLUMNS = [
    "k", "u", "y_obs", "y_true", "velocity_true",
    "objective", "cross_entropy", "mutual_information", "control_penalty", "belief_digest",
]


def belief_digest(belief: NormalGammaBelief) -> str:
    payload = json.dumps(belief.to_record(), separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class EpisodeTrace:
    kind: str
    records: list[dict] = field(default_factory=list)
    beliefs: list[NormalGammaBelief] = field(default_factory=list)

    @property
    def y(self) -> np.ndarray:
        return np.array([r["y_obs"] for r in self.records])

    @property
    def u(self) -> np.ndarray:
        return np.array([r["u"] for r in self.records])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# narxefe trace v{TRACE_VERSION}\n")
            writer = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for rec in self.records:
                writer.writerow({k: ("" if rec[k] is None else rec[k]) for k in TRACE_COLUMNS})

    def write_beliefs(self, path) -> None:
        Path(path).write_text(json.dumps([b.to_record() for b in self.beliefs]))


def first_success(y: np.ndarray, target: float, tol: float, hold: int) -> Optional[int]:
    """First step k (1-based) from which |y - target| < tol holds for ``hold`` steps."""
    run = 0
    for i, ok in enumerate(np.abs(np.asarray(y) - target) < tol):
        run = run + 1 if ok else 0
        if run == hold:
            return i - hold + 2
    return None


def first_excitation(u: np.ndarray, threshold: float = 0.1) -> Optional[int]:
    idx = np.flatnonzero(np.abs(np.asarray(u)) > threshold)
    return int(idx[0]) + 1 if idx.size else None


def run_episode(agent: AgentConfig, plant, steps: int, stop_after_success: Optional[tuple] = None) -> EpisodeTrace:
    """Run ``steps`` control cycles against ``plant``.

    ``beliefs[k]`` is the posterior after k observations.  With
    ``stop_after_success=(target, tol, hold)`` the episode ends as soon as the
    success window is complete.
    """
    trace = EpisodeTrace(agent.kind)
    state = AgentState.initial(agent)
    trace.beliefs.append(state.belief)
    run = 0
    for _ in range(steps):
        u, state, diag = act(agent, state)
        bd = objective_breakdown(diag)
        obs = plant.step(u)
        trace.records.append(
            {
                "k": obs.k,
                "u": u,
                "y_obs": obs.y,
                "y_true": getattr(plant, "angle", getattr(plant, "y_prev", None)),
                "velocity_true": getattr(plant, "velocity", None),
                "objective": diag.result.value,
                "cross_entropy": float(bd.cross_entropy[0]),
                "mutual_information": float(bd.mutual_information[0]),
                "control_penalty": float(bd.control_penalty[0]),
                "belief_digest": belief_digest(state.belief),
            }
        )
        state = observe(agent, state, obs.y)
        trace.beliefs.append(state.belief)
        if stop_after_success is not None:
            target, tol, hold = stop_after_success
            run = run + 1 if abs(obs.y - target) < tol else 0
            if run >= hold:
                break
    return trace


def summarize(config: ExperimentConfig, trace: EpisodeTrace) -> dict:
    y = trace.y
    out = {
        "steps": len(trace.records),
        "first_u": float(trace.u[0]) if trace.records else None,
        "first_success_step": first_success(y, config.goal.m_star, config.tol, config.hold),
        "first_excitation_step": first_excitation(trace.u),
        "final_error": float(abs(y[-1] - config.goal.m_star)) if trace.records else None,
    }
    final = trace.beliefs[-1]
    out["final_belief"] = final.to_record()
    return out


def first_problem(config: ExperimentConfig, lambda_scale: Optional[float] = None) -> ControlProblem:
    """The planning problem faced at k = 0 (prior belief, zero delay vector)."""
    return ControlProblem(
        belief=config.prior(lambda_scale),
        basis=config.basis,
        x0=DelayVector.zeros(config.basis.delays),
        goal=config.goal,
        horizon=config.horizon,
        u_min=config.u_min,
        u_max=config.u_max,
        eta=config.eta,
    )


def run_experiment(config: ExperimentConfig, out_dir, seed: Optional[int] = None) -> dict:
    seed = config.seed if seed is None else seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"name": config.name, "plant": config.plant, "seed": seed, "agents": {}}
    traces = {}
    for kind in config.agents:
        agent = config.agent(kind)
        trace = run_episode(agent, build_plant(config, seed), config.steps)
        trace.write_csv(out / f"trace_{kind}.csv")
        trace.write_beliefs(out / f"beliefs_{kind}.json")
        summary["agents"][kind] = summarize(config, trace)
        traces[kind] = trace
    if config.horizon == 1:
        summary["first_step_argmin"] = {
            kind: float(_solve(first_problem(config), kind, config)[0]) for kind in config.agents
        }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return {"summary": summary, "traces": traces}


def _solve(problem: ControlProblem, kind: str, config: ExperimentConfig) -> np.ndarray:
    res = minimize(batch_value_and_grad(problem, kind), problem.bounds, config.optimizer, batched=True)
    return res.u_star


def sweep_lambda(config: ExperimentConfig, scales: Sequence[float], grid_points: int = 201) -> list[dict]:
    """First-step argmins and MI range as the prior precision scale varies."""
    rows = []
    u_grid = np.linspace(config.u_min, config.u_max, grid_points)
    for scale in scales:
        problem = first_problem(config, float(scale))
        x0 = problem.x0
        mi = [mutual_information_term(problem.belief, expand(config.basis, x0, u)) for u in u_grid]
        rows.append(
            {
                "scale": float(scale),
                "argmin_efe": float(_solve(problem, "efe", config)[0]),
                "argmin_qcr": float(_solve(problem, "qcr", config)[0]),
                "mi_range": float(np.ptp(mi)),
            }
        )
    return rows


def objective_curve(config: ExperimentConfig, lo: float, hi: float, n: int) -> list[dict]:
    """Objectives over the first control; later controls in the horizon held at 0."""
    problem = first_problem(config)
    grid = np.linspace(lo, hi, n)
    u = np.zeros((n, config.horizon))
    u[:, 0] = grid
    j_efe = batch_value(problem, "efe", u)
    j_qcr = batch_value(problem, "qcr", u)
    rows = []
    for i, ui in enumerate(grid):
        bd = breakdown(problem, u[i])
        rows.append(
            {
                "u": float(ui),
                "J_efe": float(j_efe[i]),
                "J_qcr": float(j_qcr[i]),
                "CE": float(bd.cross_entropy.sum()),
                "MI": float(bd.mutual_information.sum()),
            }
        )
    return rows


def _swing_up_seed(config: ExperimentConfig, kind: str, seed: int) -> Optional[int]:
    trace = run_episode(
        config.agent(kind),
        build_plant(config, seed),
        config.steps,
        stop_after_success=(config.goal.m_star, config.tol, config.hold),
    )
    return first_success(trace.y, config.goal.m_star, config.tol, config.hold)


def swing_up_study(config: ExperimentConfig, seeds: Sequence[int], kinds=("efe", "qcr"), workers: int = 1) -> dict:
    """First-success step per seed and agent; episodes stop once the window is held.

    Each episode owns its plant RNG, so ``workers > 1`` runs them in separate
    processes without changing the result.
    """
    jobs = [(kind, s) for kind in kinds for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            steps = list(pool.map(_swing_up_seed, [config] * len(jobs), *zip(*jobs)))
    else:
        steps = [_swing_up_seed(config, kind, s) for kind, s in jobs]
    n = len(seeds)
    return {kind: steps[i * n:(i + 1) * n] for i, kind in enumerate(kinds)}


def write_rows(rows: list[dict], path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
