"""Simulated plants: a first-order linear AR system and a damped pendulum."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Observation:
    y: float
    k: int


@dataclass
class LinearARPlant:
    """``y_k = theta1 * y_{k-1} + theta2 * u_k (+ noise)``."""

    theta_star: tuple[float, float] = (0.5, -0.5)
    y_prev: float = 0.0
    noise_std: float = 0.0
    seed: int | None = None
    k: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    def step(self, u: float) -> Observation:
        t1, t2 = self.theta_star
        y = t1 * self.y_prev + t2 * float(u)
        if self.noise_std > 0:
            y += self._rng.normal(0.0, self.noise_std)
        self.y_prev = y
        self.k += 1
        return Observation(y, self.k)


def step_linear(plant: LinearARPlant, u: float) -> Observation:
    return plant.step(u)


@dataclass
class PendulumPlant:
    """Point-mass pendulum with viscous friction and torque input.

    The angle is measured from the hanging-down position; ``pi`` is upright.
    Only the observation is noisy, the internal state is integrated exactly
    (RK4 at ``dt``).
    """

    mass: float = 1.0
    length: float = 0.5
    friction: float = 0.01
    dt: float = 0.1
    gravity: float = 9.81
    obs_std: float = 0.001
    angle: float = 0.0
    velocity: float = 0.0
    seed: int | None = None
    k: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.obs_std < 0:
            raise ValueError(f"obs_std must be non-negative, got {self.obs_std}")
        self._rng = np.random.default_rng(self.seed)

    def accel(self, angle: float, velocity: float, u: float) -> float:
        m, l = self.mass, self.length
        return (u - self.friction * velocity - m * self.gravity * l * np.sin(angle)) / (m * l * l)

    def deriv(self, state: np.ndarray, u: float) -> np.ndarray:
        return np.array([state[1], self.accel(state[0], state[1], u)])

    def integrate(self, state: np.ndarray, u: float, dt: float) -> np.ndarray:
        k1 = self.deriv(state, u)
        k2 = self.deriv(state + 0.5 * dt * k1, u)
        k3 = self.deriv(state + 0.5 * dt * k2, u)
        k4 = self.deriv(state + dt * k3, u)
        return state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def energy(self) -> float:
        m, l = self.mass, self.length
        return 0.5 * m * l * l * self.velocity**2 + m * self.gravity * l * (1 - np.cos(self.angle))

    def step(self, u: float) -> Observation:
        s = self.integrate(np.array([self.angle, self.velocity]), float(u), self.dt)
        self.angle, self.velocity = float(s[0]), float(s[1])
        self.k += 1
        y = self.angle
        if self.obs_std > 0:
            y += self._rng.normal(0.0, self.obs_std)
        return Observation(float(y), self.k)


def step_pendulum(plant: PendulumPlant, u: float) -> Observation:
    return plant.step(u)
