"""Posterior predictive distributions and mean-collapsed rollouts."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import betaln, digamma, gammaln

from .basis import DelayVector, PolyBasis, expand, shift
from .belief import NormalGammaBelief


@dataclass(frozen=True)
class StudentTPrediction:
    nu: float
    m: float
    s2: float

    @property
    def variance(self) -> float:
        if self.nu <= 2:
            return np.inf
        return self.s2 * self.nu / (self.nu - 2.0)


def predict(belief: NormalGammaBelief, phi) -> StudentTPrediction:
    phi = np.asarray(phi, dtype=float).reshape(-1)
    if phi.size != belief.dim:
        raise ValueError(f"feature length {phi.size} does not match belief dimension {belief.dim}")
    q = belief.quad_inv(phi)
    return StudentTPrediction(
        nu=2.0 * belief.alpha,
        m=float(belief.mu @ phi),
        s2=belief.beta / belief.alpha * (q + 1.0),
    )


def student_t_logpdf(pred: StudentTPrediction, y) -> np.ndarray | float:
    nu, s2 = pred.nu, pred.s2
    z2 = (np.asarray(y, dtype=float) - pred.m) ** 2 / (nu * s2)
    out = (
        gammaln((nu + 1) / 2)
        - gammaln(nu / 2)
        - 0.5 * np.log(np.pi * nu * s2)
        - 0.5 * (nu + 1) * np.log1p(z2)
    )
    return float(out) if np.ndim(out) == 0 else out


def predictive_entropy(pred: StudentTPrediction) -> float:
    """Entropy (nats) of the location-scale Student-t."""
    nu = pred.nu
    return float(
        (nu + 1) / 2 * (digamma((nu + 1) / 2) - digamma(nu / 2))
        + 0.5 * np.log(nu)
        + betaln(nu / 2, 0.5)
        + 0.5 * np.log(pred.s2)
    )


@dataclass(frozen=True)
class Rollout:
    u: np.ndarray
    features: np.ndarray  # (T, D)
    predictions: tuple[StudentTPrediction, ...]
    states: tuple[DelayVector, ...]  # delay vector used at each step

    @property
    def horizon(self) -> int:
        return len(self.predictions)

    @property
    def y_hat(self) -> np.ndarray:
        return np.array([p.m for p in self.predictions])

    def rows(self):
        for t, (u, p) in enumerate(zip(self.u, self.predictions), start=1):
            yield {"t": t, "u": float(u), "y_hat": p.m, "nu": p.nu, "m": p.m, "s2": p.s2}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["t", "u", "y_hat", "nu", "m", "s2"])
            writer.writeheader()
            writer.writerows(self.rows())


def rollout(belief: NormalGammaBelief, x0: DelayVector, u_seq: Sequence[float], basis: PolyBasis) -> Rollout:
    """Predict over a control sequence, feeding each predictive mode back as data.

    The belief is never updated along the way, so per-step predictive
    variance depends only on that step's features.
    """
    u_seq = np.asarray(u_seq, dtype=float).reshape(-1)
    if u_seq.size < 1:
        raise ValueError("rollout horizon must be at least 1")
    x = x0
    feats, preds, states = [], [], []
    for u in u_seq:
        phi = expand(basis, x, u)
        pred = predict(belief, phi)
        feats.append(phi)
        preds.append(pred)
        states.append(x)
        x = shift(x, pred.m, u)
    return Rollout(u_seq.copy(), np.array(feats), tuple(preds), tuple(states))
