import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.load_profile("default")

from narxefe.basis import DelayConfig, DelayVector, PolyBasis
from narxefe.belief import NormalGammaBelief
from narxefe.objective import ControlProblem, GoalPrior


@pytest.fixture
def linear_basis():
    return PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)


def linear_ar_problem(scale=0.5, horizon=1, eta=0.0):
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    belief = NormalGammaBelief.isotropic([1.0, 1.0], scale, alpha=10.0, beta=1.0)
    return ControlProblem(
        belief, basis, DelayVector.zeros(basis.delays), GoalPrior(0.5, 1.0), horizon, -1.0, 1.0, eta
    )


def random_belief(rng, d, alpha=None):
    a = rng.normal(size=(d, d))
    lam = a @ a.T + 0.5 * np.eye(d)
    return NormalGammaBelief(
        rng.normal(size=d),
        lam,
        alpha if alpha is not None else rng.uniform(2.0, 20.0),
        rng.uniform(0.2, 3.0),
    )


def random_problem(rng, horizon, degree=2, m_y=2, m_u=1):
    basis = PolyBasis(DelayConfig(m_y, m_u), degree=degree, include_intercept=True)
    d = basis.feature_dim
    belief = random_belief(rng, d)
    belief = NormalGammaBelief(0.3 * belief.mu, belief.lam, belief.alpha, belief.beta)
    x0 = DelayVector(tuple(rng.uniform(-1, 1, m_y)), tuple(rng.uniform(-1, 1, m_u)))
    goal = GoalPrior(rng.uniform(-1, 1), rng.uniform(0.3, 2.0))
    return ControlProblem(belief, basis, x0, goal, horizon, -1.0, 1.0, rng.uniform(0, 0.5))
