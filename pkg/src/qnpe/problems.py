"""Problem definitions: the operator abstraction, synthetic generators for
each structural family, and suboptimality-gap evaluation.

Known roots for the nonlinear generators are found at generation time by a
dense damped-Newton solve; this is test scaffolding only, the solver itself
never sees a Jacobian.  All randomness flows through an explicit 64-bit seed
and identical seeds reproduce problems bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


# ---------------------------------------------------------------------------
# Structure tags


@dataclass(frozen=True)
class General:
    pass


@dataclass(frozen=True)
class Symmetric:
    pass


@dataclass(frozen=True)
class JSymmetric:
    m: int
    n: int


@dataclass(frozen=True)
class Sparse:
    pattern: frozenset  # off-diagonal (i, j) pairs; the diagonal is always allowed


StructureSpec = General | Symmetric | JSymmetric | Sparse


# ---------------------------------------------------------------------------
# Gap specifications


@dataclass(frozen=True)
class WeakGapBall:
    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class FunctionValueGap:
    pass


@dataclass(frozen=True)
class PrimalDualBox:
    x_lo: np.ndarray
    x_hi: np.ndarray
    y_lo: np.ndarray
    y_hi: np.ndarray


GapSpec = WeakGapBall | FunctionValueGap | PrimalDualBox


# ---------------------------------------------------------------------------
# Problem


@dataclass
class Problem:
    """An operator F: R^d -> R^d with its regularity metadata.

    jacobian_matvec and objective are verification/reporting hooks; the solver
    never calls them.  Problems are immutable after construction and safe to
    share across threads.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    mu: float
    l1: float
    l2: float
    structure: StructureSpec
    known_root: np.ndarray | None = None
    jacobian_matvec: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    objective: Callable[[np.ndarray], float] | None = None
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mu > self.l1:
            raise ValueError("require mu <= l1")

    def jacobian_dense(self, z: np.ndarray) -> np.ndarray:
        if self.jacobian_matvec is None:
            raise ValueError("problem has no Jacobian matvec")
        d = self.dim
        eye = np.eye(d)
        return np.column_stack([self.jacobian_matvec(z, eye[:, j]) for j in range(d)])


class GenerationError(RuntimeError):
    """Raised when a synthetic instance cannot be constructed as specified."""


def _damped_newton_root(
    f: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    z0: np.ndarray,
    tol: float = 1e-12,
    max_iters: int = 200,
) -> np.ndarray:
    """Dense damped Newton with halving backtracking on ||F||."""
    z = z0.astype(float).copy()
    fz = f(z)
    for _ in range(max_iters):
        nrm = np.linalg.norm(fz)
        if nrm <= tol:
            return z
        try:
            step = np.linalg.solve(jac(z), -fz)
        except np.linalg.LinAlgError as exc:
            raise GenerationError("singular Jacobian in root finding") from exc
        t = 1.0
        for _ in range(60):
            z_new = z + t * step
            f_new = f(z_new)
            if np.linalg.norm(f_new) < nrm:
                z, fz = z_new, f_new
                break
            t *= 0.5
        else:
            raise GenerationError("damped Newton stalled")
    if np.linalg.norm(fz) <= tol:
        return z
    raise GenerationError("damped Newton did not reach tolerance")


# ---------------------------------------------------------------------------
# Generators


def make_quadratic_min(d: int, mu: float, l1: float, seed: int) -> Problem:
    """F(z) = A (z - z*) with A symmetric, spectrum in [mu, l1] and both
    endpoints attained."""
    if d < 1 or not (0 < mu <= l1):
        raise ValueError("require d >= 1 and 0 < mu <= l1")
    rng = np.random.default_rng(seed)
    if d == 1:
        # a single eigenvalue can only attain both endpoints when mu == l1
        a = np.array([[l1]])
    else:
        eigs = rng.uniform(mu, l1, size=d)
        eigs[0], eigs[-1] = mu, l1
        qmat, _ = np.linalg.qr(rng.standard_normal((d, d)))
        a = (qmat * eigs) @ qmat.T
        a = 0.5 * (a + a.T)
    z_star = rng.standard_normal(d)

    def f(z: np.ndarray) -> np.ndarray:
        return a @ (z - z_star)

    return Problem(
        dim=d,
        eval=f,
        mu=mu,
        l1=l1,
        l2=0.0,
        structure=Symmetric(),
        known_root=z_star,
        jacobian_matvec=lambda z, v: a @ v,
        objective=lambda z: 0.5 * float((z - z_star) @ (a @ (z - z_star))),
        descriptor={"family": "quadratic_min", "d": d, "mu": mu, "l1": l1, "seed": seed},
    )


def make_logsumexp_min(
    d: int, n_terms: int, mu: float, smoothing: float, seed: int
) -> Problem:
    """F = grad of rho*log(sum_i exp((a_i.z - b_i)/rho)) + (mu/2)||z||^2."""
    if mu <= 0 or smoothing <= 0:
        raise ValueError("require mu > 0 and smoothing > 0")
    rng = np.random.default_rng(seed)
    rho = smoothing
    amat = rng.standard_normal((n_terms, d)) / np.sqrt(d)
    bvec = rng.standard_normal(n_terms)
    row_norms = np.linalg.norm(amat, axis=1)
    max_norm = float(row_norms.max()) if n_terms > 0 else 0.0
    l1 = mu + max_norm**2 / rho
    l2 = 2.0 * max_norm**3 / rho**2  # conservative analytic bound

    def softmax_weights(z: np.ndarray) -> np.ndarray:
        t = (amat @ z - bvec) / rho
        t -= t.max()
        w = np.exp(t)
        return w / w.sum()

    def objective(z: np.ndarray) -> float:
        t = (amat @ z - bvec) / rho
        tmax = t.max()
        return float(rho * (tmax + np.log(np.exp(t - tmax).sum())) + 0.5 * mu * (z @ z))

    def f(z: np.ndarray) -> np.ndarray:
        return amat.T @ softmax_weights(z) + mu * z

    def jac(z: np.ndarray) -> np.ndarray:
        pi = softmax_weights(z)
        return (amat.T * pi) @ amat / rho - np.outer(amat.T @ pi, amat.T @ pi) / rho + mu * np.eye(d)

    z_star = _damped_newton_root(f, jac, np.zeros(d))

    return Problem(
        dim=d,
        eval=f,
        mu=mu,
        l1=l1,
        l2=l2,
        structure=Symmetric(),
        known_root=z_star,
        jacobian_matvec=lambda z, v: jac(z) @ v,
        objective=objective,
        descriptor={
            "family": "logsumexp_min",
            "d": d,
            "n_terms": n_terms,
            "mu": mu,
            "smoothing": smoothing,
            "seed": seed,
        },
    )


def make_bilinear_minimax(m: int, n: int, mu: float, l1: float, seed: int) -> Problem:
    """Saddle operator of f(x, y) = (mu/2)||x||^2 + x^T C y - (mu/2)||y||^2,
    with C scaled so ||grad F||_op = l1."""
    if m < 1 or n < 1:
        raise ValueError("require m, n >= 1")
    if not (0 <= mu < l1):
        raise ValueError("require 0 <= mu < l1")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((m, n))
    smax = np.linalg.svd(c, compute_uv=False)[0]
    target = np.sqrt(l1**2 - mu**2)
    if smax > 0:
        c *= target / smax
    d = m + n

    def f(z: np.ndarray) -> np.ndarray:
        x, y = z[:m], z[m:]
        return np.concatenate([mu * x + c @ y, -c.T @ x + mu * y])

    def jmv(z: np.ndarray, v: np.ndarray) -> np.ndarray:
        vx, vy = v[:m], v[m:]
        return np.concatenate([mu * vx + c @ vy, -c.T @ vx + mu * vy])

    def objective(z: np.ndarray) -> float:
        x, y = z[:m], z[m:]
        return float(0.5 * mu * (x @ x) + x @ (c @ y) - 0.5 * mu * (y @ y))

    return Problem(
        dim=d,
        eval=f,
        mu=mu,
        l1=l1,
        l2=0.0,
        structure=JSymmetric(m, n),
        known_root=np.zeros(d),
        jacobian_matvec=jmv,
        objective=objective,
        descriptor={"family": "bilinear_minimax", "m": m, "n": n, "mu": mu, "l1": l1, "seed": seed},
    )


def make_sparse_equation(
    d: int, avg_degree: int, mu: float, l1: float, seed: int, eps_frac: float = 0.2
) -> Problem:
    """F(z) = M z + eps*tanh(z) - c with M supported on a random pattern Omega
    (plus diagonal), sym(M) >= mu I and ||M||_op + eps <= l1."""
    if not (0 <= avg_degree < d):
        raise ValueError("require 0 <= avg_degree < d")
    if not (0 <= mu < (1 - eps_frac) * l1):
        raise GenerationError("infeasible spectral scaling: mu too close to l1")
    rng = np.random.default_rng(seed)

    pattern = set()
    for i in range(d):
        cols = rng.choice(d, size=min(avg_degree, d - 1), replace=False)
        for j in cols:
            if j != i:
                pattern.add((int(i), int(j)))
    pattern = frozenset(pattern)

    m0 = np.zeros((d, d))
    for (i, j) in pattern:
        m0[i, j] = rng.standard_normal()
    m0[np.diag_indices(d)] = rng.standard_normal(d)
    op_norm = np.linalg.norm(m0, 2)
    if op_norm > 0:
        m0 /= op_norm
    lam_min = float(np.linalg.eigvalsh(0.5 * (m0 + m0.T))[0])

    eps = eps_frac * l1
    # M = t*M0 + beta*I with lambda_min(sym(M)) = mu and ||M||_op <= t + beta
    t = ((1 - eps_frac) * l1 - mu) / (1.0 + max(-lam_min, 0.0))
    if t <= 0:
        raise GenerationError("infeasible spectral scaling")
    beta = mu - t * lam_min
    mmat = t * m0 + beta * np.eye(d)
    cvec = rng.standard_normal(d)

    def f(z: np.ndarray) -> np.ndarray:
        return mmat @ z + eps * np.tanh(z) - cvec

    def jac(z: np.ndarray) -> np.ndarray:
        return mmat + np.diag(eps / np.cosh(z) ** 2)

    z_star = _damped_newton_root(f, jac, np.zeros(d))
    l2 = eps * 0.8  # |d^2/dz^2 tanh| <= 4/(3*sqrt(3)) < 0.77

    return Problem(
        dim=d,
        eval=f,
        mu=mu,
        l1=l1,
        l2=l2,
        structure=Sparse(pattern),
        known_root=z_star,
        jacobian_matvec=lambda z, v: jac(z) @ v,
        descriptor={
            "family": "sparse_equation",
            "d": d,
            "avg_degree": avg_degree,
            "mu": mu,
            "l1": l1,
            "seed": seed,
            "eps_frac": eps_frac,
        },
    )


# ---------------------------------------------------------------------------
# Gap evaluation


def evaluate_gap(problem: Problem, z: np.ndarray, spec: GapSpec) -> float:
    z = np.asarray(z, dtype=float)
    if isinstance(spec, FunctionValueGap):
        if problem.objective is None or problem.known_root is None:
            raise ValueError("FunctionValueGap needs an objective and a known root")
        return problem.objective(z) - problem.objective(problem.known_root)

    if isinstance(spec, PrimalDualBox):
        if not isinstance(problem.structure, JSymmetric):
            raise ValueError("PrimalDualBox applies to minimax problems")
        return _primal_dual_box_gap(problem, z, spec)

    if isinstance(spec, WeakGapBall):
        return _weak_gap_ball(problem, z, spec)
    raise ValueError(f"unknown gap spec: {spec!r}")


def _primal_dual_box_gap(problem: Problem, z: np.ndarray, spec: PrimalDualBox) -> float:
    """max_{y' in box} f(x, y') - min_{x' in box} f(x', y) in closed form for
    the bilinear family: both inner problems are separable quadratics."""
    desc = problem.descriptor
    if desc.get("family") != "bilinear_minimax":
        raise ValueError("closed-form box gap is available for the bilinear family only")
    m = desc["m"]
    mu = problem.mu
    x, y = z[:m], z[m:]
    # reconstruct C via the Jacobian matvec on basis vectors (reporting only)
    n = problem.dim - m
    c = np.column_stack(
        [problem.jacobian_matvec(z, np.concatenate([np.zeros(m), e]))[:m] for e in np.eye(n)]
    )

    cx = c.T @ x  # linear coefficients of y'
    if mu > 0:
        y_opt = np.clip(cx / mu, spec.y_lo, spec.y_hi)
    else:
        y_opt = np.where(cx >= 0, spec.y_hi, spec.y_lo)
    f_max = 0.5 * mu * float(x @ x) + float(cx @ y_opt) - 0.5 * mu * float(y_opt @ y_opt)

    cy = c @ y  # linear coefficients of x'
    if mu > 0:
        x_opt = np.clip(-cy / mu, spec.x_lo, spec.x_hi)
    else:
        x_opt = np.where(cy >= 0, spec.x_lo, spec.x_hi)
    f_min = 0.5 * mu * float(x_opt @ x_opt) + float(cy @ x_opt) - 0.5 * mu * float(y @ y)
    return f_max - f_min


def _weak_gap_ball(problem: Problem, z: np.ndarray, spec: WeakGapBall) -> float:
    """max over the ball of <F(z'), z - z'> by multistart projected gradient
    ascent (8 starts, 500 steps).  The reported value is a lower bound."""
    if problem.jacobian_matvec is None:
        raise ValueError("weak-gap evaluation needs the Jacobian matvec")
    rng = np.random.default_rng(0)
    center = np.asarray(spec.center, dtype=float)
    r = spec.radius

    def project(p: np.ndarray) -> np.ndarray:
        delta = p - center
        nrm = np.linalg.norm(delta)
        return p if nrm <= r else center + delta * (r / nrm)

    def value(zp: np.ndarray) -> float:
        return float(problem.eval(zp) @ (z - zp))

    best = -np.inf
    step = 0.5 / max(problem.l1, 1e-12)
    for trial in range(8):
        if trial == 0:
            zp = project(z)
        else:
            u = rng.standard_normal(problem.dim)
            zp = center + u * (r * rng.uniform() / np.linalg.norm(u))
        for _ in range(500):
            jt_dir = problem.jacobian_dense(zp).T @ (z - zp)
            grad = jt_dir - problem.eval(zp)
            zp = project(zp + step * grad)
        best = max(best, value(zp))
    return best


# ---------------------------------------------------------------------------
# Serialization


_FAMILIES = {
    "quadratic_min": lambda d: make_quadratic_min(d["d"], d["mu"], d["l1"], d["seed"]),
    "logsumexp_min": lambda d: make_logsumexp_min(
        d["d"], d["n_terms"], d["mu"], d["smoothing"], d["seed"]
    ),
    "bilinear_minimax": lambda d: make_bilinear_minimax(
        d["m"], d["n"], d["mu"], d["l1"], d["seed"]
    ),
    "sparse_equation": lambda d: make_sparse_equation(
        d["d"], d["avg_degree"], d["mu"], d["l1"], d["seed"], d.get("eps_frac", 0.2)
    ),
}


def problem_to_json(problem: Problem) -> str:
    if not problem.descriptor:
        raise ValueError("problem has no descriptor")
    return json.dumps(problem.descriptor, sort_keys=True)


def problem_from_descriptor(descriptor: dict) -> Problem:
    family = descriptor.get("family")
    if family not in _FAMILIES:
        raise ValueError(f"unknown problem family: {family!r}")
    return _FAMILIES[family](descriptor)


def problem_from_json(text: str) -> Problem:
    return problem_from_descriptor(json.loads(text))
