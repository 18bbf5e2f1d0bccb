"""Expected-free-energy and quadratic-cost control objectives.

Both objectives are evaluated over a mean-collapsed rollout: each step's
predicted output ``mu' phi_t`` is pushed into the next delay vector.  The
evaluation is vectorised over a leading batch of candidate sequences, and
gradients are carried forward through the rollout (forward-mode, one
tangent per control in the horizon).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.special import digamma, gammaln

from .basis import DelayVector, PolyBasis
from .belief import NormalGammaBelief, joint_entropy
from .prediction import StudentTPrediction, predict, predictive_entropy

Kind = Literal["efe", "qcr"]


class ObjectiveError(ValueError):
    pass


@dataclass(frozen=True)
class GoalPrior:
    m_star: float
    v_star: float

    def __post_init__(self):
        if not self.v_star > 0:
            raise ObjectiveError(f"goal variance must be positive, got {self.v_star}")


@dataclass(frozen=True, eq=False)
class ControlProblem:
    belief: NormalGammaBelief
    basis: PolyBasis
    x0: DelayVector
    goal: GoalPrior
    horizon: int = 1
    u_min: float = -1.0
    u_max: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if self.horizon < 1:
            raise ObjectiveError(f"horizon must be >= 1, got {self.horizon}")
        if not self.u_min < self.u_max:
            raise ObjectiveError(f"empty control bounds [{self.u_min}, {self.u_max}]")
        if self.eta < 0:
            raise ObjectiveError(f"control precision must be non-negative, got {self.eta}")
        if self.basis.feature_dim != self.belief.dim:
            raise ObjectiveError(
                f"basis produces {self.basis.feature_dim} features, belief has {self.belief.dim}"
            )
        self.basis.check(self.x0)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        t = self.horizon
        return np.full(t, float(self.u_min)), np.full(t, float(self.u_max))

    @cached_property
    def cov(self) -> np.ndarray:
        """Lambda^-1, formed once per problem from the Cholesky factor."""
        s = self.belief.solve(np.eye(self.belief.dim))
        return 0.5 * (s + s.T)

    @property
    def risk_coef(self) -> float:
        a = self.belief.alpha
        if a <= 1:
            raise ObjectiveError(f"expected free energy needs alpha > 1, got {a}")
        return self.belief.beta / (self.goal.v_star * (2 * a - 2))


@dataclass
class ObjectiveBreakdown:
    u: np.ndarray
    cross_entropy: np.ndarray
    mutual_information: np.ndarray
    control_penalty: np.ndarray
    y_hat: np.ndarray = field(repr=False)

    @property
    def total(self) -> float:
        return float(np.sum(self.cross_entropy - self.mutual_information + self.control_penalty))


def cross_entropy_term(pred: StudentTPrediction, goal: GoalPrior) -> float:
    """Expected negative log goal density under the predictive distribution."""
    if pred.nu <= 2:
        raise ObjectiveError(f"cross-entropy needs nu > 2, got {pred.nu}")
    return 0.5 * np.log(2 * np.pi * goal.v_star) + (
        (pred.m - goal.m_star) ** 2 + pred.variance
    ) / (2 * goal.v_star)


def mutual_information_term(belief: NormalGammaBelief, phi) -> float:
    """Control-dependent part of the parameter/output mutual information."""
    phi = np.asarray(phi, dtype=float).reshape(-1)
    return 0.5 * np.log1p(belief.quad_inv(phi))


def joint_output_entropy(belief: NormalGammaBelief, phi) -> float:
    """Entropy of ``(y, theta, tau)`` given features ``phi``.

    Uses the explicit (D+1)-dim covariance of ``(theta, y)`` given ``tau``
    rather than the determinant shortcut, so it serves as a cross-check.
    """
    phi = np.asarray(phi, dtype=float).reshape(-1)
    d = belief.dim
    s = belief.solve(np.eye(d))
    sphi = s @ phi
    c = np.block([[s, sphi[:, None]], [sphi[None, :], np.array([[phi @ sphi + 1.0]])]])
    sign, logdet_c = np.linalg.slogdet(c)
    if sign <= 0:
        raise ObjectiveError("joint covariance is not positive definite")
    n = d + 1
    a, b = belief.alpha, belief.beta
    return float(
        0.5 * n * np.log(2 * np.pi)
        + 0.5 * n
        + 0.5 * logdet_c
        + a
        + gammaln(a)
        - 0.5 * (n - 2 + 2 * a) * digamma(a)
        + 0.5 * (n - 2) * np.log(b)
    )


def mutual_information_full(belief: NormalGammaBelief, phi) -> float:
    """Mutual information from its three differential entropies."""
    return (
        -joint_output_entropy(belief, phi)
        + joint_entropy(belief)
        + predictive_entropy(predict(belief, phi))
    )


def _evaluate(problem: ControlProblem, u, kind: str, grad: bool):
    """Batched rollout over candidate sequences ``u`` of shape (B, T).

    Returns per-step predicted means ``m`` (B, T), quadratic forms
    ``q = phi' Lambda^-1 phi`` (B, T) and, with ``grad``, their tangents
    (B, T, T) where the last axis indexes the control being perturbed.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    n, horizon = u.shape
    if horizon != problem.horizon:
        raise ObjectiveError(f"control sequence length {horizon} != horizon {problem.horizon}")
    basis, mu = problem.basis, problem.belief.mu
    my, mu_ = basis.delays.m_y, basis.delays.m_u
    nv = my + mu_ + 1
    deg, off = basis.degree, int(basis.include_intercept)
    need_q = kind != "qcr"
    cov = problem.cov if need_q else None

    # v holds the raw regressor [y_{t-1}.., u_{t-1}.., u_t]; shifting happens in place
    v = np.empty((n, nv))
    v[:, :my] = problem.x0.past_outputs
    v[:, my : my + mu_] = problem.x0.past_inputs
    phi = np.empty((n, basis.feature_dim))
    if off:
        phi[:, 0] = 1.0
    m_all = np.empty((n, horizon))
    q_all = np.empty((n, horizon)) if need_q else None
    if grad:
        jv = np.zeros((n, nv, horizon))
        jphi = np.zeros((n, basis.feature_dim, horizon))
        dm_all = np.empty((n, horizon, horizon))
        dq_all = np.empty((n, horizon, horizon)) if need_q else None
    else:
        dm_all = dq_all = None

    for t in range(horizon):
        v[:, -1] = u[:, t]
        for p in range(1, deg + 1):
            phi[:, off + (p - 1) * nv : off + p * nv] = v if p == 1 else v**p
        m = phi @ mu
        m_all[:, t] = m
        if need_q:
            sphi = phi @ cov
            q_all[:, t] = np.einsum("bd,bd->b", phi, sphi)
        if grad:
            jv[:, -1, :] = 0.0
            jv[:, -1, t] = 1.0
            for p in range(1, deg + 1):
                blk = jphi[:, off + (p - 1) * nv : off + p * nv]
                blk[...] = jv if p == 1 else (p * v ** (p - 1))[:, :, None] * jv
            dm = mu @ jphi
            dm_all[:, t] = dm
            if need_q:
                dq_all[:, t] = 2.0 * np.matmul(sphi[:, None, :], jphi)[:, 0]
            if my:
                jv[:, 1:my] = jv[:, : my - 1]
                jv[:, 0] = dm
            if mu_:
                jv[:, my + 1 : my + mu_] = jv[:, my : my + mu_ - 1]
                jv[:, my] = jv[:, -1]
        if my:
            v[:, 1:my] = v[:, : my - 1]
            v[:, 0] = m
        if mu_:
            v[:, my + 1 : my + mu_] = v[:, my : my + mu_ - 1]
            v[:, my] = v[:, -1]

    return u, m_all, q_all, dm_all, dq_all


def _reduce(problem: ControlProblem, kind: str, u, m, q, dm, dq):
    m_star, v_star, eta = problem.goal.m_star, problem.goal.v_star, problem.eta
    err = m - m_star
    pen = eta * u**2
    if kind == "qcr":
        val = np.sum(err**2 + pen, axis=1)
        g = None if dm is None else np.einsum("bs,bst->bt", 2 * err, dm)
    elif kind == "efe":
        rc = problem.risk_coef
        val = np.sum(err**2 / (2 * v_star) + rc * (q + 1) - 0.5 * np.log1p(q) + pen, axis=1)
        if dm is None:
            g = None
        else:
            w_q = rc - 0.5 / (1 + q)
            g = np.einsum("bs,bst->bt", err / v_star, dm) + np.einsum("bs,bst->bt", w_q, dq)
    else:
        raise ObjectiveError(f"unknown objective kind {kind!r}")
    if g is not None:
        g = g + 2 * eta * u
    return val, g


def batch_value_and_grad(problem: ControlProblem, kind: Kind = "efe"):
    """Return ``f(U) -> (values (B,), grads (B, T))`` for the optimizer."""
    if kind == "efe":
        problem.risk_coef  # fail fast on alpha <= 1

    def fun(u_batch):
        u, m, q, dm, dq = _evaluate(problem, u_batch, kind, grad=True)
        return _reduce(problem, kind, u, m, q, dm, dq)

    return fun


def batch_value(problem: ControlProblem, kind: Kind, u_batch) -> np.ndarray:
    u, m, q, _, _ = _evaluate(problem, u_batch, kind, grad=False)
    return _reduce(problem, kind, u, m, q, None, None)[0]


def efe(problem: ControlProblem, u_seq) -> float:
    """Expected free energy of ``u_seq``, up to control-independent constants."""
    return float(batch_value(problem, "efe", np.reshape(u_seq, (1, -1)))[0])


def qcr(problem: ControlProblem, u_seq) -> float:
    return float(batch_value(problem, "qcr", np.reshape(u_seq, (1, -1)))[0])


def gradient(problem: ControlProblem, u_seq, which: Kind = "efe") -> np.ndarray:
    _, g = batch_value_and_grad(problem, which)(np.reshape(u_seq, (1, -1)))
    return g[0]


def breakdown(problem: ControlProblem, u_seq) -> ObjectiveBreakdown:
    u, m, q, _, _ = _evaluate(problem, np.reshape(u_seq, (1, -1)), "efe", grad=False)
    b = problem.belief
    nu = 2 * b.alpha
    s2 = b.beta / b.alpha * (q[0] + 1)
    ce = np.array(
        [cross_entropy_term(StudentTPrediction(nu, mt, st), problem.goal) for mt, st in zip(m[0], s2)]
    )
    return ObjectiveBreakdown(
        u=u[0].copy(),
        cross_entropy=ce,
        mutual_information=0.5 * np.log1p(q[0]),
        control_penalty=problem.eta * u[0] ** 2,
        y_hat=m[0].copy(),
    )
