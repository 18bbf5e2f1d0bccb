"""Normal-Gamma belief over NARX coefficients and noise precision.

The joint is ``N(theta | mu, (tau * Lambda)^-1) Gamma(tau | alpha, beta)``
with Gamma in the shape/rate parameterisation.  Observing ``y = theta' phi +
noise`` keeps the belief in the same family, so filtering is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg
from scipy.special import digamma, gammaln

# relative tolerance below which a non-positive rate is treated as round-off
BETA_TOL = 1e-9


class BeliefError(ValueError):
    """Raised when a belief fails its validity invariants."""


@dataclass(frozen=True, eq=False)
class NormalGammaBelief:
    mu: np.ndarray
    lam: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (mu.size, mu.size):
            raise BeliefError(f"precision shape {lam.shape} does not match mean length {mu.size}")
        if not np.allclose(lam, lam.T, rtol=1e-10, atol=1e-12):
            raise BeliefError("precision matrix is not symmetric")
        if not self.alpha > 0:
            raise BeliefError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > 0:
            raise BeliefError(f"beta must be positive, got {self.beta}")
        mu.flags.writeable = False
        lam.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def isotropic(cls, mu, scale: float, alpha: float, beta: float) -> "NormalGammaBelief":
        mu = np.asarray(mu, dtype=float).reshape(-1)
        return cls(mu, scale * np.eye(mu.size), alpha, beta)

    @property
    def dim(self) -> int:
        return self.mu.size

    @cached_property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor of the precision matrix."""
        try:
            return linalg.cholesky(self.lam, lower=True)
        except linalg.LinAlgError as err:
            raise BeliefError("precision matrix is not positive definite") from err

    def solve(self, b: np.ndarray) -> np.ndarray:
        """``Lambda^-1 b`` through the Cholesky factor."""
        return linalg.cho_solve((self.chol, True), b)

    def quad_inv(self, phi: np.ndarray) -> float:
        """``phi' Lambda^-1 phi``."""
        z = linalg.solve_triangular(self.chol, phi, lower=True)
        return float(z @ z)

    def logdet_lam(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def to_record(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "lambda": self.lam.reshape(-1).tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "NormalGammaBelief":
        mu = np.asarray(rec["mu"], dtype=float)
        lam = np.asarray(rec["lambda"], dtype=float).reshape(mu.size, mu.size)
        return cls(mu, lam, rec["alpha"], rec["beta"])


@dataclass(frozen=True)
class MarginalTheta:
    """Multivariate location-scale Student-t."""

    loc: np.ndarray
    scale: np.ndarray
    df: float

    @property
    def cov(self) -> np.ndarray:
        return self.scale * self.df / (self.df - 2.0)

    def logpdf(self, theta: np.ndarray) -> float:
        d = self.loc.size
        c = linalg.cholesky(self.scale, lower=True)
        z = linalg.solve_triangular(c, np.asarray(theta, dtype=float) - self.loc, lower=True)
        maha = float(z @ z)
        return float(
            gammaln((self.df + d) / 2)
            - gammaln(self.df / 2)
            - 0.5 * d * np.log(self.df * np.pi)
            - np.sum(np.log(np.diag(c)))
            - 0.5 * (self.df + d) * np.log1p(maha / self.df)
        )


@dataclass(frozen=True)
class MarginalTau:
    shape: float
    rate: float

    @property
    def mean(self) -> float:
        return self.shape / self.rate


def update(belief: NormalGammaBelief, phi, y_obs: float) -> NormalGammaBelief:
    """Condition the belief on one observation ``y_obs`` with regressor ``phi``."""
    phi = np.asarray(phi, dtype=float).reshape(-1)
    if phi.size != belief.dim:
        raise BeliefError(f"feature length {phi.size} does not match belief dimension {belief.dim}")
    y = float(y_obs)
    if not (np.all(np.isfinite(phi)) and np.isfinite(y)):
        raise BeliefError("features and observation must be finite")
    lam_new = belief.lam + np.outer(phi, phi)
    try:
        c_new = linalg.cholesky(lam_new, lower=True)
    except linalg.LinAlgError as err:
        raise BeliefError("updated precision is not positive definite") from err
    lam_mu = belief.lam @ belief.mu
    mu_new = linalg.cho_solve((c_new, True), phi * y + lam_mu)

    beta_new = belief.beta + 0.5 * (y * y - mu_new @ lam_new @ mu_new + belief.mu @ lam_mu)
    if beta_new <= 0:
        beta_new = belief.beta + 0.5 * ((y - mu_new @ phi) * y + (belief.mu - mu_new) @ lam_mu)
        if beta_new < -BETA_TOL * belief.beta:
            raise BeliefError(f"rate update went non-positive ({beta_new:.3e})")
        # the exact increment is a sum of squares, so beta never decreases
        beta_new = max(beta_new, belief.beta)

    out = NormalGammaBelief(mu_new, lam_new, belief.alpha + 0.5, float(beta_new))
    out.__dict__["chol"] = c_new
    return out


def batch_posterior(belief: NormalGammaBelief, features, ys) -> NormalGammaBelief:
    """Posterior after all rows of ``features`` at once (least-squares form)."""
    phis = np.atleast_2d(np.asarray(features, dtype=float))
    ys = np.asarray(ys, dtype=float).reshape(-1)
    lam_n = belief.lam + phis.T @ phis
    xi = belief.lam @ belief.mu + phis.T @ ys
    mu_n = linalg.solve(lam_n, xi, assume_a="pos")
    beta_n = belief.beta + 0.5 * (ys @ ys + belief.mu @ belief.lam @ belief.mu - mu_n @ lam_n @ mu_n)
    return NormalGammaBelief(mu_n, lam_n, belief.alpha + 0.5 * ys.size, beta_n)


def marginal_theta(belief: NormalGammaBelief) -> MarginalTheta:
    scale = (belief.beta / belief.alpha) * belief.solve(np.eye(belief.dim))
    return MarginalTheta(belief.mu.copy(), 0.5 * (scale + scale.T), 2.0 * belief.alpha)


def marginal_tau(belief: NormalGammaBelief) -> MarginalTau:
    return MarginalTau(belief.alpha, belief.beta)


def joint_entropy(belief: NormalGammaBelief) -> float:
    """Differential entropy of the Normal-Gamma joint, in nats."""
    d = belief.dim
    a, b = belief.alpha, belief.beta
    return float(
        0.5 * d * np.log(2 * np.pi)
        + 0.5 * d
        - 0.5 * belief.logdet_lam()
        + a
        + gammaln(a)
        - 0.5 * (d - 2 + 2 * a) * digamma(a)
        + 0.5 * (d - 2) * np.log(b)
    )


def log_evidence(belief: NormalGammaBelief, phi, y_obs: float) -> float:
    """Log marginal likelihood of ``y_obs`` before conditioning on it."""
    from .prediction import predict, student_t_logpdf

    return student_t_logpdf(predict(belief, phi), y_obs)
