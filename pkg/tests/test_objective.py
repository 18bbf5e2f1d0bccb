import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from narxefe.basis import DelayConfig, DelayVector, PolyBasis, expand
from narxefe.belief import NormalGammaBelief
from narxefe.objective import (
    ControlProblem,
    GoalPrior,
    ObjectiveError,
    breakdown,
    cross_entropy_term,
    efe,
    gradient,
    mutual_information_full,
    mutual_information_term,
    qcr,
)
from narxefe.optimizer import OptimizerConfig, minimize
from narxefe.objective import batch_value_and_grad
from narxefe.prediction import StudentTPrediction, predict, student_t_logpdf

from conftest import random_problem, linear_ar_problem


def argmin(problem, kind="efe"):
    return minimize(batch_value_and_grad(problem, kind), problem.bounds, OptimizerConfig(), batched=True).u_star


def test_cross_entropy_constant_only():
    goal = GoalPrior(0.5, 1.0)
    ce = cross_entropy_term(StudentTPrediction(20.0, 0.5, 1e-14), goal)
    assert ce == pytest.approx(0.5 * np.log(2 * np.pi), abs=1e-12)


def test_cross_entropy_matches_sampling():
    rng = np.random.default_rng(7)
    pred, goal = StudentTPrediction(8.0, 0.3, 0.5), GoalPrior(-0.2, 0.8)
    y = pred.m + np.sqrt(pred.s2) * rng.standard_t(pred.nu, size=10**6)
    nll = 0.5 * np.log(2 * np.pi * goal.v_star) + (y - goal.m_star) ** 2 / (2 * goal.v_star)
    assert abs(nll.mean() - cross_entropy_term(pred, goal)) < 3 * nll.std() / np.sqrt(y.size)


def test_cross_entropy_matches_quadrature():
    pred, goal = StudentTPrediction(20.0, 0.96, 0.2843), GoalPrior(0.5, 1.0)

    def integrand(y):
        return np.exp(student_t_logpdf(pred, y)) * (
            0.5 * np.log(2 * np.pi * goal.v_star) + (y - goal.m_star) ** 2 / (2 * goal.v_star)
        )

    ce, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert cross_entropy_term(pred, goal) == pytest.approx(ce, abs=1e-6)


def test_cross_entropy_needs_finite_variance():
    with pytest.raises(ObjectiveError):
        cross_entropy_term(StudentTPrediction(2.0, 0.0, 1.0), GoalPrior(0.0, 1.0))


def test_mi_zero_features():
    b = NormalGammaBelief.isotropic([1.0, 1.0], 0.5, 10.0, 1.0)
    assert mutual_information_term(b, np.zeros(2)) == 0.0


def test_mi_flat_under_high_precision():
    b = NormalGammaBelief.isotropic([1.0, 1.0], 100.0, 10.0, 1.0)
    for u in np.linspace(-1, 1, 21):
        phi = np.array([0.0, u])
        assert mutual_information_term(b, phi) <= 0.5 * np.log1p(phi @ phi / 100) + 1e-15


def test_full_mi_differs_by_constant():
    rng = np.random.default_rng(1)
    problem = random_problem(rng, horizon=1)
    b, basis, x0 = problem.belief, problem.basis, problem.x0
    diffs = []
    for u in np.linspace(-1, 1, 101):
        phi = expand(basis, x0, u)
        diffs.append(mutual_information_full(b, phi) - mutual_information_term(b, phi))
    assert np.ptp(diffs) < 1e-8


def test_delta_belief_limit():
    p = linear_ar_problem(scale=1e12, horizon=1)
    b = p.belief
    for u in np.linspace(-1, 1, 11):
        expected = (u - 0.5) ** 2 / 2 + b.beta / (2 * b.alpha - 2)
        assert efe(p, [u]) == pytest.approx(expected, abs=1e-9)
    assert argmin(p)[0] == pytest.approx(argmin(p, "qcr")[0], abs=1e-6)


def test_risk_coefficient_forms_agree():
    b = NormalGammaBelief.isotropic([1.0, 1.0], 0.5, 10.0, 1.0)
    p = linear_ar_problem()
    a, v = b.alpha, p.goal.v_star
    assert p.risk_coef == pytest.approx((b.beta / a) * (2 * a / (2 * a - 2)) / (2 * v), rel=1e-14)


def test_efe_needs_alpha_above_one():
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    b = NormalGammaBelief.isotropic([1.0, 1.0], 0.5, 1.0, 1.0)
    p = ControlProblem(b, basis, DelayVector.zeros(basis.delays), GoalPrior(0.5, 1.0))
    with pytest.raises(ObjectiveError):
        efe(p, [0.1])
    assert qcr(p, [0.5]) == pytest.approx(0.0)


@pytest.mark.parametrize("scale,expected,tol", [(0.5, 0.96, 0.02), (2.0, 0.75, 0.02), (100.0, 0.50, 0.02)])
def test_linear_ar_efe_argmins(scale, expected, tol):
    assert argmin(linear_ar_problem(scale))[0] == pytest.approx(expected, abs=tol)


def test_linear_ar_qcr_argmin():
    assert argmin(linear_ar_problem(), "qcr")[0] == pytest.approx(0.5, abs=0.01)


def test_qcr_zero_mean_with_penalty():
    basis = PolyBasis(DelayConfig(1, 1), degree=2)
    b = NormalGammaBelief.isotropic(np.zeros(basis.feature_dim), 1.0, 3.0, 1.0)
    p = ControlProblem(b, basis, DelayVector((0.4,), (0.2,)), GoalPrior(1.0, 1.0), 2, -1.0, 1.0, 0.3)
    np.testing.assert_allclose(argmin(p, "qcr"), 0.0, atol=1e-8)


def test_qcr_two_step_symbolic():
    sp = pytest.importorskip("sympy")
    a, c, y0, m, eta, u1, u2 = sp.symbols("a c y0 m eta u1 u2")
    y1 = a * y0 + c * u1
    y2 = a * y1 + c * u2
    expr = (y1 - m) ** 2 + eta * u1**2 + (y2 - m) ** 2 + eta * u2**2
    vals = {a: 0.8, c: -0.3, y0: 0.4, m: 0.5, eta: 0.05}
    f = sp.lambdify((u1, u2), expr.subs(vals))
    grad = sp.lambdify((u1, u2), [sp.diff(expr, s).subs(vals) for s in (u1, u2)])

    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    b = NormalGammaBelief([0.8, -0.3], np.eye(2), 3.0, 1.0)
    p = ControlProblem(b, basis, DelayVector((0.4,), ()), GoalPrior(0.5, 1.0), 2, -1.0, 1.0, 0.05)
    for us in ([0.1, -0.7], [1.0, 1.0], [-0.3, 0.6]):
        assert qcr(p, us) == pytest.approx(f(*us), abs=1e-12)
        np.testing.assert_allclose(gradient(p, us, "qcr"), grad(*us), atol=1e-12)


def central_diff(f, u, h=1e-5):
    return np.array([(f(u + h * e) - f(u - h * e)) / (2 * h) for e in np.eye(u.size)])


@pytest.mark.parametrize("horizon", [1, 3, 10])
@pytest.mark.parametrize("kind", ["efe", "qcr"])
def test_gradient_matches_finite_differences(horizon, kind):
    rng = np.random.default_rng(horizon)
    f_obj = efe if kind == "efe" else qcr
    for _ in range(10):
        p = random_problem(rng, horizon)
        u = rng.uniform(-1, 1, horizon)
        g = gradient(p, u, kind)
        fd = central_diff(lambda v: f_obj(p, v), u)
        assert np.max(np.abs(g - fd)) <= 1e-5 * max(np.max(np.abs(fd)), 1e-3)


def test_penalty_only_gradient():
    basis = PolyBasis(DelayConfig(2, 2), degree=2)
    b = NormalGammaBelief.isotropic(np.zeros(basis.feature_dim), 1e6, 3.0, 1.0)
    p = ControlProblem(b, basis, DelayVector.zeros(basis.delays), GoalPrior(0.0, 1.0), 4, -1.0, 1.0, 0.7)
    u = np.array([0.3, -0.2, 0.9, -1.0])
    np.testing.assert_array_equal(gradient(p, u, "qcr"), 2 * 0.7 * u)


def test_qcr_gradient_by_hand():
    basis = PolyBasis(DelayConfig(1, 0), degree=1, include_intercept=False)
    my, mu_, y0, m_star, eta = 0.7, -0.4, 0.3, 0.5, 0.2
    b = NormalGammaBelief([my, mu_], np.eye(2), 3.0, 1.0)
    p = ControlProblem(b, basis, DelayVector((y0,), ()), GoalPrior(m_star, 1.0), 1, -1.0, 1.0, eta)
    for u in (-0.8, 0.0, 0.45):
        expected = 2 * (my * y0 + mu_ * u - m_star) * mu_ + 2 * eta * u
        assert gradient(p, [u], "qcr")[0] == pytest.approx(expected, abs=1e-14)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_breakdown_sums(seed, horizon):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, horizon)
    u = rng.uniform(-1, 1, horizon)
    bd = breakdown(p, u)
    assert bd.total == pytest.approx(
        np.sum(bd.cross_entropy - bd.mutual_information + bd.control_penalty), abs=1e-12
    )
    const = horizon * 0.5 * np.log(2 * np.pi * p.goal.v_star)
    assert bd.total - const == pytest.approx(efe(p, u), abs=1e-9)
    assert np.all(bd.mutual_information >= 0)


def test_breakdown_mi_grows_with_magnitude():
    p = linear_ar_problem()
    grid = np.linspace(0, 1, 51)
    mi = np.array([breakdown(p, [u]).mutual_information[0] for u in grid])
    mi_neg = np.array([breakdown(p, [-u]).mutual_information[0] for u in grid])
    assert np.all(np.diff(mi) > 0) and np.all(np.diff(mi_neg) > 0)


def test_difference_identity_on_grid():
    p = linear_ar_problem()
    grid = np.linspace(-1, 1, 101)
    j = np.array([efe(p, [u]) for u in grid])
    decomposed = np.array([breakdown(p, [u]).total for u in grid])
    diff_j = j[:, None] - j[None, :]
    diff_d = decomposed[:, None] - decomposed[None, :]
    assert np.max(np.abs(diff_j - diff_d)) < 1e-8


def test_mi_flattens_with_certainty():
    grid = np.linspace(-1, 1, 201)
    ranges = []
    for c in np.geomspace(0.1, 1000, 9):
        b = NormalGammaBelief.isotropic([1.0, 1.0], c, 10.0, 1.0)
        mi = [mutual_information_term(b, [0.0, u]) for u in grid]
        ranges.append(np.ptp(mi))
    assert np.all(np.diff(ranges) < 0)


def test_argmin_interpolates_towards_qcr():
    argmins = [argmin(linear_ar_problem(c))[0] for c in np.geomspace(0.5, 100, 8)]
    assert np.all(np.diff(argmins) <= 1e-9)
    assert argmins[0] == pytest.approx(0.96, abs=0.02)
    assert argmins[-1] == pytest.approx(0.5, abs=0.02)


def test_problem_validation(linear_basis):
    b = NormalGammaBelief.isotropic([1.0, 1.0], 0.5, 10.0, 1.0)
    x0 = DelayVector.zeros(linear_basis.delays)
    with pytest.raises(ObjectiveError):
        ControlProblem(b, linear_basis, x0, GoalPrior(0.0, 1.0), 0)
    with pytest.raises(ObjectiveError):
        ControlProblem(b, linear_basis, x0, GoalPrior(0.0, 1.0), 1, 1.0, -1.0)
    with pytest.raises(ObjectiveError):
        GoalPrior(0.0, 0.0)
    with pytest.raises(ObjectiveError):
        efe(ControlProblem(b, linear_basis, x0, GoalPrior(0.0, 1.0), 2), [0.1])
