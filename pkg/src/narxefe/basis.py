"""Delay vectors and polynomial feature maps for NARX models.

A regressor at time k is the newest-first window of past outputs and past
inputs, plus the current input.  The polynomial basis raises each of those
variables to the powers ``1..degree`` (no cross terms), optionally prefixed
by an intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DelayConfig:
    m_y: int
    m_u: int

    def __post_init__(self):
        if self.m_y < 0 or self.m_u < 0:
            raise ValueError(f"delays must be non-negative, got m_y={self.m_y}, m_u={self.m_u}")

    @property
    def n_vars(self) -> int:
        """Raw regressor length M, including the current input."""
        return self.m_y + self.m_u + 1


@dataclass(frozen=True)
class DelayVector:
    """Past outputs and inputs, newest first."""

    past_outputs: tuple[float, ...]
    past_inputs: tuple[float, ...]

    @classmethod
    def zeros(cls, delays: DelayConfig) -> "DelayVector":
        return cls((0.0,) * delays.m_y, (0.0,) * delays.m_u)

    def values(self) -> np.ndarray:
        return np.array(self.past_outputs + self.past_inputs, dtype=float)


@dataclass(frozen=True)
class PolyBasis:
    delays: DelayConfig
    degree: int = 1
    include_intercept: bool = True
    cross_terms: bool = False

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if self.cross_terms:
            raise NotImplementedError("polynomial cross terms are not supported")

    @property
    def feature_dim(self) -> int:
        return int(self.include_intercept) + self.delays.n_vars * self.degree

    def check(self, x: DelayVector) -> None:
        if len(x.past_outputs) != self.delays.m_y or len(x.past_inputs) != self.delays.m_u:
            raise ValueError(
                f"delay vector has {len(x.past_outputs)} outputs / {len(x.past_inputs)} inputs, "
                f"basis expects {self.delays.m_y} / {self.delays.m_u}"
            )


def monomials(v: np.ndarray, degree: int, include_intercept: bool) -> np.ndarray:
    """Power-major feature block for raw variables ``v`` (last axis).

    Leading axes are treated as batch dimensions.
    """
    powers = [v**p for p in range(1, degree + 1)]
    if include_intercept:
        powers.insert(0, np.ones(v.shape[:-1] + (1,)))
    return np.concatenate(powers, axis=-1)


def expand(basis: PolyBasis, x: DelayVector, u: float) -> np.ndarray:
    basis.check(x)
    v = np.append(x.values(), float(u))
    return monomials(v, basis.degree, basis.include_intercept)


def shift(x: DelayVector, new_y: float, new_u: float) -> DelayVector:
    ys = ((float(new_y),) + x.past_outputs)[: len(x.past_outputs)]
    us = ((float(new_u),) + x.past_inputs)[: len(x.past_inputs)]
    return DelayVector(ys, us)
