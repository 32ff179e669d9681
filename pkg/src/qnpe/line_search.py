"""Backtracking line search producing a step size / iterate pair that
satisfies the two acceptance conditions

    (A)  ||zh - z + eta (g + B (zh - z))||  <=  alpha1 sqrt(1 + eta mu) ||zh - z||
    (B)  ||zh - z + eta F(zh)||             <=  (alpha1 + alpha2) sqrt(1 + eta mu) ||zh - z||

Condition (A) is met by driving the inner Krylov solve of
(I + eta B) s = -eta g to relative residual alpha1 sqrt(1 + eta mu); the trial
step is accepted once (B) holds, otherwise eta is multiplied by beta and the
rejected iterate is retained (it feeds the learner's loss observation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linear_solver import LinearOp, MatvecCounter, linear_solve


EXACT_SOLVE_TOL = 1e-12  # practical meaning of alpha1 = 0


class LineSearchError(RuntimeError):
    """Backtracking exhausted or the inner solver failed; usually signals a
    misconfigured Lipschitz constant."""


@dataclass
class LineSearchParams:
    alpha1: float
    alpha2: float
    beta: float
    mu: float
    max_backtracks: int

    def __post_init__(self) -> None:
        if not (0 <= self.alpha1 < 0.5):
            raise ValueError("require alpha1 in [0, 1/2)")
        if not (0 < self.alpha2 < 0.5):
            raise ValueError("require alpha2 in (0, 1/2)")
        if not (0 < self.beta < 1):
            raise ValueError("require beta in (0, 1)")
        if self.alpha1 + self.alpha2 >= 1:
            raise ValueError("require alpha1 + alpha2 < 1")
        if self.mu < 0:
            raise ValueError("require mu >= 0")


def default_max_backtracks(sigma: float, l1: float, alpha2: float, beta: float) -> int:
    """Backtracking is guaranteed to stop once eta < alpha2 / (L1 + ||B||_op)
    with ||B||_op <= 7 L1, so the trial count is bounded; add slack."""
    ratio = max(sigma * 8.0 * l1 / alpha2, 1.0)
    return 1 + math.ceil(math.log(ratio) / math.log(1.0 / beta)) + 8


@dataclass
class LineSearchOutcome:
    eta: float
    z_hat: np.ndarray
    backtracked: bool
    z_tilde: np.ndarray | None
    trial_count: int
    operator_evals: int
    f_zhat: np.ndarray
    f_ztilde: np.ndarray | None
    inner_iterations: int
    inner_matvecs: int


def backtrack(
    z: np.ndarray,
    g: np.ndarray,
    b_apply: Callable[[np.ndarray], np.ndarray],
    b_apply_t: Callable[[np.ndarray], np.ndarray],
    sigma: float,
    params: LineSearchParams,
    f_eval: Callable[[np.ndarray], np.ndarray],
    b_symmetric: bool = False,
    matvec_counter: MatvecCounter | None = None,
) -> LineSearchOutcome:
    """Try step sizes sigma * beta^i until (B) holds; one fresh operator
    evaluation per trial.  g = F(z) is supplied by the caller so it is never
    re-evaluated here."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not np.all(np.isfinite(g)):
        raise LineSearchError("non-finite operator value at the base point")

    d = len(z)
    counter = matvec_counter if matvec_counter is not None else MatvecCounter()
    eta = sigma
    z_tilde: np.ndarray | None = None
    f_ztilde: np.ndarray | None = None
    inner_iters = 0
    inner_mv = 0
    for trial in range(1, params.max_backtracks + 1):
        rho_tol = params.alpha1 * math.sqrt(1.0 + eta * params.mu)
        if rho_tol == 0.0:
            rho_tol = EXACT_SOLVE_TOL
        op = LinearOp(
            dim=d,
            apply=lambda v, e=eta: v + e * b_apply(v),
            apply_transpose=lambda v, e=eta: v + e * b_apply_t(v),
            symmetric=b_symmetric,
            matvec_counter=counter,
        )
        report = linear_solve(op, -eta * g, rho_tol)
        if not report.converged:
            raise LineSearchError(
                f"inner linear solve did not reach tolerance at eta={eta:.3e} "
                f"(residual {report.residual_norm:.3e})"
            )
        inner_iters += report.iterations
        inner_mv += report.matvecs
        s = report.solution
        z_hat = z + s
        f_zhat = f_eval(z_hat)
        lhs = np.linalg.norm(s + eta * f_zhat)
        rhs = (params.alpha1 + params.alpha2) * math.sqrt(1.0 + eta * params.mu) * np.linalg.norm(s)
        if lhs <= rhs:
            return LineSearchOutcome(
                eta=eta,
                z_hat=z_hat,
                backtracked=trial > 1,
                z_tilde=z_tilde,
                trial_count=trial,
                operator_evals=trial,
                f_zhat=f_zhat,
                f_ztilde=f_ztilde,
                inner_iterations=inner_iters,
                inner_matvecs=inner_mv,
            )
        z_tilde = z_hat
        f_ztilde = f_zhat
        eta *= params.beta

    raise LineSearchError(
        f"no acceptable step size within {params.max_backtracks} trials "
        f"(last eta={eta / params.beta:.3e}); check the Lipschitz constant"
    )
