import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from narxefe.basis import DelayConfig, DelayVector, PolyBasis
from narxefe.belief import NormalGammaBelief
from narxefe.prediction import (
    StudentTPrediction,
    predict,
    predictive_entropy,
    rollout,
    student_t_logpdf,
)

from conftest import random_belief


def linear_ar_prior():
    return NormalGammaBelief.isotropic([1.0, 1.0], 0.5, alpha=10.0, beta=1.0)


def sample_predictive(b, phi, rng, n=10**6):
    from scipy.linalg import solve_triangular

    tau = rng.gamma(b.alpha, 1 / b.beta, size=n)
    z = rng.standard_normal((n, b.dim))
    theta = b.mu + solve_triangular(b.chol.T, z.T, lower=False).T / np.sqrt(tau)[:, None]
    return theta @ phi + rng.standard_normal(n) / np.sqrt(tau)


def test_zero_features_give_pure_noise():
    b = linear_ar_prior()
    p = predict(b, np.zeros(2))
    assert (p.nu, p.m, p.s2) == (20.0, 0.0, pytest.approx(0.1))


@pytest.mark.parametrize("u", [0.0, 0.5, 0.96, -1.0])
def test_linear_ar_predictive_scale(u):
    p = predict(linear_ar_prior(), [0.0, u])
    assert p.s2 == pytest.approx(0.1 * (2 * u * u + 1))


def test_predictive_matches_sampling():
    rng = np.random.default_rng(2)
    b = linear_ar_prior()
    u = 0.96
    p = predict(b, [0.0, u])
    y = sample_predictive(b, np.array([0.0, u]), rng)
    n = y.size
    assert abs(y.mean() - p.m) < 3 * y.std() / np.sqrt(n)
    # variance of y, then rescaled back to the squared scale
    sq = (y - y.mean()) ** 2
    se_var = sq.std() / np.sqrt(n)
    assert abs(sq.mean() - p.variance) < 3 * se_var
    assert abs(sq.mean() * (p.nu - 2) / p.nu - p.s2) < 3 * se_var * (p.nu - 2) / p.nu


def test_entropy_scale_law_and_translation():
    base = StudentTPrediction(7.0, 0.3, 0.4)
    for c in (0.01, 3.0, 100.0):
        scaled = StudentTPrediction(7.0, 0.3, 0.4 * c)
        assert predictive_entropy(scaled) - predictive_entropy(base) == pytest.approx(0.5 * np.log(c), abs=1e-12)
    assert predictive_entropy(StudentTPrediction(7.0, -9.0, 0.4)) == predictive_entropy(base)


def test_entropy_matches_quadrature():
    p = StudentTPrediction(20.0, 0.0, 0.1)

    def integrand(y):
        lp = student_t_logpdf(p, y)
        return -np.exp(lp) * lp

    h, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert predictive_entropy(p) == pytest.approx(h, abs=1e-6)


def test_entropy_agrees_with_scipy():
    from scipy.stats import t

    p = StudentTPrediction(5.0, 1.0, 2.0)
    assert predictive_entropy(p) == pytest.approx(t(df=5.0, loc=1.0, scale=np.sqrt(2.0)).entropy(), abs=1e-12)


def test_rollout_single_step_is_predict():
    b = linear_ar_prior()
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    x0 = DelayVector((0.2,), ())
    r = rollout(b, x0, [0.7], basis)
    assert r.predictions[0] == predict(b, [0.2, 0.7])
    assert r.horizon == 1


def test_rollout_zero_mean():
    basis = PolyBasis(DelayConfig(2, 1), degree=2)
    b = NormalGammaBelief.isotropic(np.zeros(basis.feature_dim), 1.0, 3.0, 1.0)
    r = rollout(b, DelayVector.zeros(basis.delays), [0.3, -0.5, 0.9, 0.1], basis)
    np.testing.assert_array_equal(r.y_hat, 0.0)
    assert all(y == 0.0 for s in r.states for y in s.past_outputs)


def test_rollout_hand_iteration():
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    b = NormalGammaBelief([0.5, -0.5], np.eye(2), 3.0, 1.0)
    r = rollout(b, DelayVector((1.0,), ()), [0.0, 0.0, 0.0], basis)
    np.testing.assert_allclose(r.y_hat, [0.5, 0.25, 0.125])


def test_rollout_empty_rejected():
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    with pytest.raises(ValueError):
        rollout(linear_ar_prior(), DelayVector((0.0,), ()), [], basis)


def test_rollout_csv(tmp_path):
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    r = rollout(linear_ar_prior(), DelayVector((0.0,), ()), [0.1, 0.2], basis)
    path = tmp_path / "roll.csv"
    r.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,u,y_hat,nu,m,s2"
    assert len(lines) == 3


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0), st.floats(1.01, 10.0))
def test_scale_decreases_with_precision(seed, c, factor):
    rng = np.random.default_rng(seed)
    b = random_belief(rng, 3)
    phi = rng.normal(size=3)
    lo = NormalGammaBelief(b.mu, c * b.lam, b.alpha, b.beta)
    hi = NormalGammaBelief(b.mu, c * factor * b.lam, b.alpha, b.beta)
    assert predict(hi, phi).s2 < predict(lo, phi).s2


@given(st.integers(0, 2**32 - 1), st.floats(-5, 5))
def test_location_linear_scale_invariant_in_mean(seed, a):
    rng = np.random.default_rng(seed)
    b = random_belief(rng, 3)
    phi = rng.normal(size=3)
    moved = NormalGammaBelief(a * b.mu, b.lam, b.alpha, b.beta)
    assert predict(moved, phi).m == pytest.approx(a * predict(b, phi).m, abs=1e-12)
    assert predict(moved, phi).s2 == predict(b, phi).s2


@given(st.integers(0, 2**32 - 1))
def test_rollout_variance_does_not_accumulate(seed):
    rng = np.random.default_rng(seed)
    basis = PolyBasis(DelayConfig(2, 1), degree=2)
    b = random_belief(rng, basis.feature_dim)
    x0 = DelayVector(tuple(rng.uniform(-1, 1, 2)), tuple(rng.uniform(-1, 1, 1)))
    u = rng.uniform(-1, 1, 5)
    r = rollout(b, x0, u, basis)
    again = rollout(b, x0, u, basis)
    for t, (phi, pred) in enumerate(zip(r.features, r.predictions)):
        assert pred == predict(b, phi)
        assert again.predictions[t] == pred
