"""Randomized Lanczos machinery and the two spectral separation primitives.

ext_evec approximates the extreme eigenpairs of the symmetrized input and
either certifies that its spectrum fits in the (scaled) unit interval or
returns a rank-one separating matrix.  max_svec does the same for the operator
norm by running Lanczos on the implicit 2d x 2d augmented operator
(u, v) -> (W v, W^T u), which is never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .linear_solver import MatvecCounter


class SepCase(Enum):
    CASE_I = 1
    CASE_II = 2


@dataclass
class SepResult:
    """Output (gamma, S) of an approximate separation oracle.

    Case I (gamma <= 1) certifies approximate feasibility and carries S = 0.
    Case II carries a separating matrix with ||S||_F <= 1, stored as rank-one
    factors: S = scale * left @ right.T.
    """

    gamma: float
    case: SepCase
    # rank-one factorization of S; None in Case I
    s_left: np.ndarray | None = None
    s_right: np.ndarray | None = None
    s_scale: float = 1.0
    # densified (e.g. subspace-projected) S overriding the factored form
    s_matrix: np.ndarray | None = None

    def s_dense(self, d: int) -> np.ndarray:
        if self.s_matrix is not None:
            return self.s_matrix
        if self.case is SepCase.CASE_I or self.s_left is None:
            return np.zeros((d, d))
        return self.s_scale * np.outer(self.s_left, self.s_right)


@dataclass
class LanczosResult:
    alphas: np.ndarray  # diagonal of T, length N
    betas: np.ndarray  # off-diagonal of T, length N-1
    basis: np.ndarray  # d x N orthonormal Lanczos vectors
    steps_taken: int
    broke_down: bool


def lanczos(
    apply_sym: Callable[[np.ndarray], np.ndarray],
    d: int,
    n_steps: int,
    rng: np.random.Generator,
    reorthogonalize: bool = True,
) -> LanczosResult:
    """Lanczos three-term recurrence on a symmetric operator with a start
    vector drawn uniformly from the unit sphere.

    Full reorthogonalization is on by default; the step count is small, and
    orthogonality loss would silently void the randomized guarantee.  Stops
    early (broke_down=True) when the new off-diagonal is negligible relative
    to a running norm estimate, in which case the Krylov space is invariant
    and the Ritz values are exact on it.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)

    basis = np.zeros((d, n_steps))
    alphas = np.zeros(n_steps)
    betas = np.zeros(max(n_steps - 1, 0))
    v_prev = np.zeros(d)
    beta = 0.0
    norm_estimate = 0.0
    steps = 0
    broke_down = False
    for k in range(n_steps):
        basis[:, k] = v
        w = apply_sym(v) - beta * v_prev
        if not np.all(np.isfinite(w)):
            raise FloatingPointError("NaN/Inf in Lanczos recurrence")
        alpha = float(w @ v)
        w = w - alpha * v
        if reorthogonalize:
            w -= basis[:, : k + 1] @ (basis[:, : k + 1].T @ w)
        alphas[k] = alpha
        steps = k + 1
        norm_estimate = max(norm_estimate, abs(alpha) + abs(beta))
        beta_next = float(np.linalg.norm(w))
        if k + 1 < n_steps:
            if beta_next <= 1e-12 * max(norm_estimate, 1e-300):
                broke_down = True
                break
            betas[k] = beta_next
            v_prev = v
            v = w / beta_next
            beta = beta_next

    return LanczosResult(
        alphas=alphas[:steps],
        betas=betas[: max(steps - 1, 0)],
        basis=basis[:, :steps],
        steps_taken=steps,
        broke_down=broke_down,
    )


def tridiag_extreme_eigs(
    alphas: np.ndarray, betas: np.ndarray
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Extreme eigenpairs (lambda_max, z_max, lambda_min, z_min) of a symmetric
    tridiagonal matrix, via LAPACK bisection + inverse iteration."""
    n = len(alphas)
    if n == 1:
        e1 = np.ones(1)
        lam = float(alphas[0])
        return lam, e1, lam, e1.copy()
    w_min, v_min = eigh_tridiagonal(alphas, betas, select="i", select_range=(0, 0))
    w_max, v_max = eigh_tridiagonal(alphas, betas, select="i", select_range=(n - 1, n - 1))
    return float(w_max[0]), v_max[:, 0], float(w_min[0]), v_min[:, 0]


def lanczos_step_count(d: int, delta: float, q: float, augmented: bool = False) -> int:
    """Iteration count ceil(1/4 * sqrt(2(1 + 1/delta)) * log(c*d/q^2) + 1/2)
    with c = 11 for the symmetrized oracle and c = 22 for the augmented one."""
    c = 22.0 if augmented else 11.0
    return math.ceil(0.25 * math.sqrt(2.0 * (1.0 + 1.0 / delta)) * math.log(c * d / q**2) + 0.5)


def ext_evec(
    w_apply: Callable[[np.ndarray], np.ndarray],
    w_apply_t: Callable[[np.ndarray], np.ndarray],
    d: int,
    delta: float,
    q: float,
    rng: np.random.Generator,
    symmetric: bool = False,
    matvec_counter: MatvecCounter | None = None,
    reorthogonalize: bool = True,
) -> SepResult:
    """Approximate extreme-eigenvalue separation oracle for the symmetrized
    input sym(W) = (W + W^T)/2.

    With probability >= 1 - q the output satisfies: Case I (gamma <= 1)
    implies the spectrum of sym(W) lies in [-(1+delta), 1+delta]; Case II
    implies the gamma-scaled spectrum does, and S = +/- u u^T separates W from
    every matrix whose symmetric part fits in the unit interval.
    """
    if delta <= 0 or not (0 < q < 1):
        raise ValueError("require delta > 0 and q in (0, 1)")
    n_steps = lanczos_step_count(d, delta, q, augmented=False)
    n_steps = min(n_steps, d)

    counter = matvec_counter if matvec_counter is not None else MatvecCounter()

    if symmetric:
        def apply_sym(v: np.ndarray) -> np.ndarray:
            counter.add(1)
            return w_apply(v)
    else:
        def apply_sym(v: np.ndarray) -> np.ndarray:
            counter.add(2)
            return 0.5 * (w_apply(v) + w_apply_t(v))

    res = lanczos(apply_sym, d, n_steps, rng, reorthogonalize=reorthogonalize)
    lam_max, z_max, lam_min, z_min = tridiag_extreme_eigs(res.alphas, res.betas)
    gamma = max(lam_max, -lam_min)
    if gamma <= 1.0:
        return SepResult(gamma=gamma, case=SepCase.CASE_I)
    if lam_max >= -lam_min:
        u = res.basis @ z_max
        sign = 1.0
    else:
        u = res.basis @ z_min
        sign = -1.0
    nrm = np.linalg.norm(u)
    if nrm > 1.0:  # guard rounding so ||S||_F <= 1 holds exactly
        u = u / nrm
    return SepResult(gamma=gamma, case=SepCase.CASE_II, s_left=sign * u, s_right=u, s_scale=1.0)


def max_svec(
    w_apply: Callable[[np.ndarray], np.ndarray],
    w_apply_t: Callable[[np.ndarray], np.ndarray],
    d: int,
    delta: float,
    q: float,
    rng: np.random.Generator,
    matvec_counter: MatvecCounter | None = None,
    reorthogonalize: bool = True,
) -> SepResult:
    """Approximate maximum-singular-triplet separation oracle.

    Runs Lanczos on the implicit augmented operator (u, v) -> (W v, W^T u)
    whose top eigenvalue is sigma_max(W); gamma = lambda_1 / 3.  Case II
    returns S = (2/3) a b^T from the partitioned top Ritz vector [a, b], which
    satisfies <S, W> = gamma and ||S||_F <= 1.
    """
    if delta <= 0 or not (0 < q < 1):
        raise ValueError("require delta > 0 and q in (0, 1)")
    n_steps = lanczos_step_count(d, delta, q, augmented=True)
    n_steps = min(n_steps, 2 * d)

    counter = matvec_counter if matvec_counter is not None else MatvecCounter()

    def apply_aug(x: np.ndarray) -> np.ndarray:
        counter.add(2)
        return np.concatenate([w_apply(x[d:]), w_apply_t(x[:d])])

    res = lanczos(apply_aug, 2 * d, n_steps, rng, reorthogonalize=reorthogonalize)
    lam_max, z_max, _, _ = tridiag_extreme_eigs(res.alphas, res.betas)
    gamma = lam_max / 3.0
    if gamma <= 1.0:
        return SepResult(gamma=gamma, case=SepCase.CASE_I)
    v_tilde = res.basis @ z_max
    nrm = np.linalg.norm(v_tilde)
    if nrm > 1.0:
        v_tilde = v_tilde / nrm
    a, b = v_tilde[:d], v_tilde[d:]
    return SepResult(gamma=gamma, case=SepCase.CASE_II, s_left=a, s_right=b, s_scale=2.0 / 3.0)
