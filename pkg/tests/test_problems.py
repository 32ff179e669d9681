"""Generators, gap evaluation, and serialization.

Derived expectations come from independent dense oracles (numpy eigensolvers,
central finite differences, pairwise sampling), never from the code under test.
"""

import numpy as np
import pytest

from qnpe import (
    FunctionValueGap,
    JSymmetric,
    PrimalDualBox,
    Problem,
    Sparse,
    Symmetric,
    WeakGapBall,
    evaluate_gap,
    make_bilinear_minimax,
    make_logsumexp_min,
    make_quadratic_min,
    make_sparse_equation,
    problem_from_json,
    problem_to_json,
)


def sampled_monotonicity_range(problem, n_pairs=200, scale=2.0, seed=0):
    """Range of <F(z)-F(z'), z-z'> / ||z-z'||^2 over random pairs."""
    rng = np.random.default_rng(seed)
    lo, hi = np.inf, -np.inf
    for _ in range(n_pairs):
        z = scale * rng.standard_normal(problem.dim)
        zp = scale * rng.standard_normal(problem.dim)
        dz = z - zp
        ratio = float((problem.eval(z) - problem.eval(zp)) @ dz) / float(dz @ dz)
        lo, hi = min(lo, ratio), max(hi, ratio)
    return lo, hi


def sampled_lipschitz_max(problem, n_pairs=200, scale=2.0, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        z = scale * rng.standard_normal(problem.dim)
        zp = scale * rng.standard_normal(problem.dim)
        dz = z - zp
        worst = max(
            worst,
            float(np.linalg.norm(problem.eval(z) - problem.eval(zp)))
            / float(np.linalg.norm(dz)),
        )
    return worst


def check_fd_jacobian(problem, n_dirs=5, h=1e-6, seed=2):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(problem.dim)
    for _ in range(n_dirs):
        v = rng.standard_normal(problem.dim)
        fd = (problem.eval(z + h * v) - problem.eval(z - h * v)) / (2 * h)
        jv = problem.jacobian_matvec(z, v)
        assert np.linalg.norm(fd - jv) <= 1e-4 * problem.l1 * np.linalg.norm(v)


# ---------------------------------------------------------------------------
# quadratic


def test_quadratic_1d_is_shifted_identity():
    p = make_quadratic_min(1, 1.0, 1.0, seed=3)
    z = np.array([2.5])
    assert np.allclose(p.eval(z), z - p.known_root)
    assert np.allclose(p.eval(p.known_root), 0.0)


def test_quadratic_spectrum_attains_endpoints():
    p = make_quadratic_min(10, 0.1, 1.0, seed=7)
    a = p.jacobian_dense(np.zeros(10))
    assert np.allclose(a, a.T)
    eigs = np.linalg.eigvalsh(a)
    assert abs(eigs[0] - 0.1) <= 1e-12
    assert abs(eigs[-1] - 1.0) <= 1e-12


def test_quadratic_sampled_monotonicity_in_band():
    p = make_quadratic_min(10, 0.1, 1.0, seed=7)
    lo, hi = sampled_monotonicity_range(p)
    assert lo >= 0.1 - 1e-12
    assert hi <= 1.0 + 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_quadratic_root_and_jacobian(seed):
    p = make_quadratic_min(8, 0.3, 2.0, seed=seed)
    assert np.linalg.norm(p.eval(p.known_root)) <= 1e-12
    check_fd_jacobian(p)


def test_quadratic_rejects_bad_args():
    with pytest.raises(ValueError):
        make_quadratic_min(0, 0.1, 1.0, seed=0)
    with pytest.raises(ValueError):
        make_quadratic_min(5, -0.1, 1.0, seed=0)
    with pytest.raises(ValueError):
        make_quadratic_min(5, 2.0, 1.0, seed=0)


# ---------------------------------------------------------------------------
# log-sum-exp


def test_logsumexp_gradient_matches_objective():
    p = make_logsumexp_min(6, 15, mu=0.5, smoothing=0.7, seed=11)
    rng = np.random.default_rng(4)
    z = rng.standard_normal(6)
    h = 1e-5
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        fd = (p.objective(z + h * e) - p.objective(z - h * e)) / (2 * h)
        assert abs(fd - p.eval(z)[j]) <= 1e-6


def test_logsumexp_regularity_bounds_hold_on_samples():
    p = make_logsumexp_min(5, 12, mu=0.3, smoothing=0.5, seed=5)
    lo, _ = sampled_monotonicity_range(p)
    assert lo >= p.mu / 1.001
    assert sampled_lipschitz_max(p) <= p.l1 * 1.001
    assert np.linalg.norm(p.eval(p.known_root)) <= 1e-10
    check_fd_jacobian(p)
    assert isinstance(p.structure, Symmetric)


# ---------------------------------------------------------------------------
# bilinear minimax


def test_bilinear_is_monotone_not_strongly():
    p = make_bilinear_minimax(4, 6, mu=0.0, l1=1.0, seed=9)
    rng = np.random.default_rng(6)
    for _ in range(50):
        z = rng.standard_normal(10)
        assert abs(p.eval(z) @ z) <= 1e-12 * max(1.0, z @ z)
    assert np.allclose(p.eval(np.zeros(10)), 0.0)
    assert p.structure == JSymmetric(4, 6)


def test_bilinear_jacobian_is_j_symmetric_and_scaled():
    p = make_bilinear_minimax(3, 5, mu=0.2, l1=1.5, seed=2)
    j = p.jacobian_dense(np.zeros(8))
    sgn = np.concatenate([np.ones(3), -np.ones(5)])
    resid = j - sgn[:, None] * j.T * sgn[None, :]
    assert np.max(np.abs(resid)) <= 1e-12
    assert abs(np.linalg.norm(j, 2) - p.l1) <= 1e-10 * p.l1
    lo, _ = sampled_monotonicity_range(p)
    assert lo >= p.mu - 1e-10


# ---------------------------------------------------------------------------
# sparse nonlinear


def test_sparse_jacobian_respects_pattern():
    p = make_sparse_equation(12, 3, mu=0.2, l1=2.0, seed=13)
    assert isinstance(p.structure, Sparse)
    rng = np.random.default_rng(8)
    j = p.jacobian_dense(rng.standard_normal(12))
    allowed = np.zeros((12, 12), dtype=bool)
    np.fill_diagonal(allowed, True)
    for (i, k) in p.structure.pattern:
        allowed[i, k] = True
    assert np.all(j[~allowed] == 0.0)


def test_sparse_regularity_and_root():
    p = make_sparse_equation(12, 3, mu=0.2, l1=2.0, seed=13)
    lo, _ = sampled_monotonicity_range(p)
    assert lo >= p.mu * 0.999
    assert sampled_lipschitz_max(p) <= p.l1 * 1.001
    assert np.linalg.norm(p.eval(p.known_root)) <= 1e-10
    check_fd_jacobian(p)


# ---------------------------------------------------------------------------
# gap evaluation


def _diag_quadratic():
    a = np.diag([1.0, 2.0])
    return Problem(
        dim=2,
        eval=lambda z: a @ z,
        mu=1.0,
        l1=2.0,
        l2=0.0,
        structure=Symmetric(),
        known_root=np.zeros(2),
        jacobian_matvec=lambda z, v: a @ v,
        objective=lambda z: 0.5 * float(z @ (a @ z)),
    )


def test_function_value_gap_closed_form():
    p = _diag_quadratic()
    assert abs(evaluate_gap(p, np.array([1.0, 1.0]), FunctionValueGap()) - 1.5) <= 1e-12
    assert abs(evaluate_gap(p, np.zeros(2), FunctionValueGap())) <= 1e-12


def test_primal_dual_box_gap_vanishes_at_saddle():
    p = make_bilinear_minimax(5, 5, mu=0.0, l1=1.0, seed=1)
    box = PrimalDualBox(-np.ones(5), np.ones(5), -np.ones(5), np.ones(5))
    assert evaluate_gap(p, np.zeros(10), box) <= 1e-10
    z = 0.3 * np.ones(10)
    assert evaluate_gap(p, z, box) >= 0.0


def test_weak_gap_ball_lower_bound_behaviour():
    p = make_quadratic_min(4, 0.5, 1.0, seed=3)
    spec = WeakGapBall(center=p.known_root, radius=2.0)
    # at the root every <F(z'), z* - z'> = -<F(z'), z' - z*> <= 0, max is 0
    assert abs(evaluate_gap(p, p.known_root, spec)) <= 1e-8
    z = p.known_root + np.array([1.0, 0, 0, 0])
    assert evaluate_gap(p, z, spec) > 0.0


def test_weak_gap_ball_validation():
    with pytest.raises(ValueError):
        WeakGapBall(center=np.zeros(2), radius=0.0)


# ---------------------------------------------------------------------------
# serialization


@pytest.mark.parametrize(
    "maker",
    [
        lambda: make_quadratic_min(6, 0.2, 1.0, seed=5),
        lambda: make_logsumexp_min(4, 9, mu=0.4, smoothing=0.6, seed=6),
        lambda: make_bilinear_minimax(3, 4, mu=0.1, l1=1.0, seed=7),
        lambda: make_sparse_equation(10, 2, mu=0.1, l1=1.5, seed=8),
    ],
)
def test_json_roundtrip_reproduces_operator(maker):
    p = maker()
    q = problem_from_json(problem_to_json(p))
    rng = np.random.default_rng(0)
    for _ in range(5):
        z = rng.standard_normal(p.dim)
        assert np.array_equal(p.eval(z), q.eval(z))
    assert q.mu == p.mu and q.l1 == p.l1
    if p.known_root is not None:
        assert np.array_equal(p.known_root, q.known_root)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        problem_from_json('{"family": "nope"}')
