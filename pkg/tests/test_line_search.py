"""Backtracking line search: closed-form acceptance cases, rejected-iterate
bookkeeping, and parameter validation."""

import math

import numpy as np
import pytest

from qnpe import (
    LineSearchError,
    LineSearchParams,
    MatvecCounter,
    backtrack,
    default_max_backtracks,
)


def params(alpha1=0.25, alpha2=0.25, beta=0.5, mu=0.0, max_backtracks=40):
    return LineSearchParams(alpha1=alpha1, alpha2=alpha2, beta=beta, mu=mu,
                            max_backtracks=max_backtracks)


def affine_eval(a, z_star):
    return lambda z: a @ (z - z_star)


def test_zero_gradient_accepts_immediately():
    z = np.array([1.0, -1.0])
    out = backtrack(z, np.zeros(2), lambda v: v, lambda v: v, sigma=1.0,
                    params=params(), f_eval=lambda zz: zz - z)
    assert out.eta == 1.0
    assert not out.backtracked
    assert np.array_equal(out.z_hat, z)
    assert out.trial_count == 1


def test_exact_model_with_exact_solve_accepts_first_trial():
    # B equals the true Jacobian and alpha1 = 0: the proximal subproblem is
    # solved to machine precision, so any sigma is accepted
    rng = np.random.default_rng(0)
    a = np.diag(rng.uniform(0.5, 2.0, size=6))
    z_star = rng.standard_normal(6)
    z = z_star + rng.standard_normal(6)
    f = affine_eval(a, z_star)
    out = backtrack(z, f(z), lambda v: a @ v, lambda v: a @ v, sigma=50.0,
                    params=params(alpha1=0.0), f_eval=f, b_symmetric=True)
    assert out.eta == 50.0
    assert not out.backtracked
    assert out.z_tilde is None
    # z_hat solves z_hat - z + eta F(z_hat) = 0 up to the exact-solve tolerance
    resid = out.z_hat - z + out.eta * f(out.z_hat)
    assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(out.z_hat - z)


def test_identity_jacobian_closed_form_step():
    # F(z) = z, B = I: the inner solve gives s = -eta z / (1 + eta) and the
    # acceptance residual is exactly zero
    z = np.array([2.0, 0.0, -1.0])
    f = lambda zz: zz
    out = backtrack(z, z.copy(), lambda v: v, lambda v: v, sigma=1.0,
                    params=params(alpha1=0.25), f_eval=f, b_symmetric=True)
    assert out.eta == 1.0
    expected = z - (out.eta / (1.0 + out.eta)) * z
    assert np.allclose(out.z_hat, expected, atol=1e-10)


def test_mismatched_model_backtracks_and_keeps_rejected_iterate():
    # B = 0 but F has a large Jacobian: sigma = 4 must shrink, and the last
    # rejected trial is exposed for the learner
    a = 10.0 * np.eye(3)
    z_star = np.zeros(3)
    f = affine_eval(a, z_star)
    z = np.array([1.0, 1.0, 1.0])
    counter = MatvecCounter()
    out = backtrack(z, f(z), lambda v: 0 * v, lambda v: 0 * v, sigma=4.0,
                    params=params(), f_eval=f, b_symmetric=True,
                    matvec_counter=counter)
    assert out.backtracked
    assert out.trial_count > 1
    assert out.eta == pytest.approx(4.0 * 0.5 ** (out.trial_count - 1))
    assert out.operator_evals == out.trial_count
    assert out.z_tilde is not None
    assert np.array_equal(out.f_ztilde, f(out.z_tilde))
    # the rejected iterate is the previous trial's z_hat: z - sigma*beta^(t-2)*g
    eta_prev = 4.0 * 0.5 ** (out.trial_count - 2)
    assert np.allclose(out.z_tilde, z - eta_prev * f(z), atol=1e-12)
    # accepted step satisfies the proximal condition, recomputed here
    s = out.z_hat - z
    lhs = np.linalg.norm(s + out.eta * f(out.z_hat))
    assert lhs <= 0.5 * np.linalg.norm(s) + 1e-12


def test_exhaustion_raises():
    a = 10.0 * np.eye(2)
    f = affine_eval(a, np.zeros(2))
    z = np.ones(2)
    with pytest.raises(LineSearchError):
        backtrack(z, f(z), lambda v: 0 * v, lambda v: 0 * v, sigma=4.0,
                  params=params(max_backtracks=2), f_eval=f, b_symmetric=True)


def test_nonfinite_gradient_rejected():
    with pytest.raises(LineSearchError):
        backtrack(np.zeros(2), np.array([np.nan, 0.0]), lambda v: v, lambda v: v,
                  sigma=1.0, params=params(), f_eval=lambda z: z)


def test_default_max_backtracks_formula():
    sigma, l1, alpha2, beta = 2.0, 3.0, 0.25, 0.5
    expected = 1 + math.ceil(math.log(sigma * 8 * l1 / alpha2) / math.log(2.0)) + 8
    assert default_max_backtracks(sigma, l1, alpha2, beta) == expected
    # floor at ratio 1 keeps the count positive for tiny sigma
    assert default_max_backtracks(1e-12, 1.0, 0.25, 0.5) == 9


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha1": -0.1},
        {"alpha1": 0.5},
        {"alpha2": 0.0},
        {"alpha2": 0.5},
        {"beta": 0.0},
        {"beta": 1.0},
        {"alpha1": 0.45, "alpha2": 0.45, "beta": 0.5, "mu": -1.0},
    ],
)
def test_parameter_validation(kwargs):
    base = dict(alpha1=0.25, alpha2=0.25, beta=0.5, mu=0.0, max_backtracks=10)
    base.update(kwargs)
    with pytest.raises(ValueError):
        LineSearchParams(**base)


def test_sigma_must_be_positive():
    with pytest.raises(ValueError):
        backtrack(np.zeros(2), np.ones(2), lambda v: v, lambda v: v, sigma=0.0,
                  params=params(), f_eval=lambda z: z)
