"""Outer solver loop and the fixed-step extragradient baseline.

Each iteration evaluates the operator at the current point, runs the
backtracking line search to obtain (eta, z_hat), applies the extragradient
mixing step z+ = theta (z - eta F(z_hat)) + (1 - theta) z_hat with
theta = 1 / (1 + 2 eta mu), and — only when the line search backtracked —
feeds the model-mismatch loss at the last rejected iterate to the online
learner.  The monotone mode additionally maintains the eta-weighted average of
the z_hat iterates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .learner import (
    LearnerOption,
    LearnerParams,
    LossObservation,
    current_matrix,
    learner_init,
    loss_value,
    observe_loss,
)
from .linear_solver import MatvecCounter
from .line_search import LineSearchParams, backtrack, default_max_backtracks
from .problems import Problem, Symmetric
from .separation import FeasibleSetParams
from .trace import RunTrace, TraceRow


class Mode(Enum):
    STRONGLY_MONOTONE = "strongly_monotone"
    MONOTONE = "monotone"


class CertificateViolation(AssertionError):
    """An in-loop debug certificate failed."""


@dataclass
class SolverConfig:
    mode: Mode
    alpha1: float = 0.25
    alpha2: float = 0.25
    beta: float = 0.5
    sigma0: float = 0.0  # floored to the theory-backed minimum
    p: float = 0.1  # overall oracle failure budget
    max_iterations: int = 100
    stop_tolerance: float = 1e-10
    rng_seed: int = 0
    rho: float | None = None  # learner step size override
    radius: float | None = None  # learner ball radius override
    max_backtracks: int | None = None
    debug_certificates: bool = False

    def step_size_floor(self, l1: float) -> float:
        denom = 7.5 if self.mode is Mode.STRONGLY_MONOTONE else 5.0
        return self.alpha2 * self.beta / (denom * l1)

    def effective_sigma0(self, l1: float) -> float:
        return max(self.sigma0, self.step_size_floor(l1))

    def eval_budget(self, n_iters: int, sigma0: float, l1: float) -> float:
        """Theory bound on total operator evaluations over n_iters iterations."""
        denom = 7.5 if self.mode is Mode.STRONGLY_MONOTONE else 5.0
        return 3 * n_iters + math.log(denom * sigma0 * l1 / self.alpha2) / math.log(1 / self.beta)


def _validate(problem: Problem, config: SolverConfig) -> None:
    if config.mode is Mode.STRONGLY_MONOTONE and problem.mu <= 0:
        raise ValueError("strongly monotone mode requires problem.mu > 0")
    if not (0 < config.p < 1):
        raise ValueError("failure budget p must be in (0, 1)")


def solve(
    problem: Problem,
    config: SolverConfig,
    z0: np.ndarray | None = None,
    b0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray | None, RunTrace]:
    """Run the solver; returns (z_final, averaged iterate or None, trace)."""
    _validate(problem, config)
    d = problem.dim
    mu = problem.mu if config.mode is Mode.STRONGLY_MONOTONE else 0.0
    l1 = problem.l1
    z = np.zeros(d) if z0 is None else np.asarray(z0, dtype=float).copy()

    sigma0 = config.effective_sigma0(l1)
    option = LearnerOption.OPTION_I if config.mode is Mode.STRONGLY_MONOTONE else LearnerOption.OPTION_II
    feasible = FeasibleSetParams(mu=mu, l1=l1, structure=problem.structure)
    lparams = LearnerParams.make(
        option, feasible, d, config.p, rho=config.rho, radius=config.radius
    )
    rng = np.random.default_rng(config.rng_seed)
    counter = MatvecCounter()
    if b0 is None:
        b0 = (l1 + mu) * np.eye(d)
    state = learner_init(b0, lparams, rng, matvec_counter=counter)

    sym_structure = isinstance(problem.structure, Symmetric)
    floor = config.step_size_floor(l1)
    root = problem.known_root

    trace = RunTrace(
        solver="qnpe",
        z0=z.copy(),
        meta={
            "mode": config.mode.value,
            "alpha1": config.alpha1,
            "alpha2": config.alpha2,
            "beta": config.beta,
            "sigma0": sigma0,
            "mu": mu,
            "l1": l1,
            "p": config.p,
            "rng_seed": config.rng_seed,
        },
    )

    sigma = sigma0
    cum_evals = 0
    eta_sum = 0.0
    zbar_acc = np.zeros(d)

    for k in range(config.max_iterations):
        g = problem.eval(z)
        cum_evals += 1
        norm_g = float(np.linalg.norm(g))
        if norm_g <= config.stop_tolerance:
            break

        b_mat, b_mv, b_mv_t = current_matrix(state, lparams)
        max_bt = (
            config.max_backtracks
            if config.max_backtracks is not None
            else default_max_backtracks(sigma, l1, config.alpha2, config.beta)
        )
        ls_params = LineSearchParams(
            alpha1=config.alpha1,
            alpha2=config.alpha2,
            beta=config.beta,
            mu=mu,
            max_backtracks=max_bt,
        )
        out = backtrack(
            z, g, b_mv, b_mv_t, sigma, ls_params, problem.eval,
            b_symmetric=sym_structure, matvec_counter=counter,
        )
        cum_evals += out.operator_evals

        eta = out.eta
        theta = 1.0 / (1.0 + 2.0 * eta * mu)
        z_next = theta * (z - eta * out.f_zhat) + (1.0 - theta) * out.z_hat
        eta_sum += eta
        zbar_acc += eta * out.z_hat

        s = out.z_hat - z
        step_norm = float(np.linalg.norm(s))
        sq = math.sqrt(1.0 + eta * mu)
        cond_a_lhs = float(np.linalg.norm(s + eta * (g + b_mv(s))))
        cond_a_margin = config.alpha1 * sq * step_norm - cond_a_lhs
        cond_b_lhs = float(np.linalg.norm(s + eta * out.f_zhat))
        cond_b_margin = (config.alpha1 + config.alpha2) * sq * step_norm - cond_b_lhs

        loss = math.nan
        if out.backtracked:
            obs = LossObservation(u=out.f_ztilde - g, s=out.z_tilde - z)
            loss = loss_value(b_mat, obs)
            if config.debug_certificates:
                # backtracking lower-bound certificate on the accepted step
                denom = float(np.linalg.norm(obs.u - b_mat @ obs.s))
                if denom > 0:
                    bound = config.alpha2 * config.beta * float(np.linalg.norm(obs.s)) / denom
                    if eta <= bound * (1 - 1e-10):
                        raise CertificateViolation(
                            f"step size {eta:.3e} below backtracking bound {bound:.3e}"
                        )
            observe_loss(state, obs, lparams)

        if config.debug_certificates:
            if cond_b_margin < -1e-9 * max(1.0, step_norm):
                raise CertificateViolation("accepted step violates the proximal condition")
            if eta < floor - 1e-12:
                raise CertificateViolation(f"step size {eta:.3e} below floor {floor:.3e}")

        trace.rows.append(
            TraceRow(
                k=k,
                eta=eta,
                theta=theta,
                norm_F=norm_g,
                dist=float(np.linalg.norm(z - root)) if root is not None else math.nan,
                step_norm=step_norm,
                backtracked=out.backtracked,
                trials=out.trial_count,
                loss=loss,
                cond_a_margin=cond_a_margin,
                cond_b_margin=cond_b_margin,
                cum_evals=cum_evals,
                cum_matvecs=counter.count,
            )
        )
        sigma = eta / config.beta
        z = z_next

    final_g = problem.eval(z)
    z_bar = zbar_acc / eta_sum if eta_sum > 0 else None

    trace.z_final = z
    trace.z_bar = z_bar
    trace.eta_sum = eta_sum
    trace.final_norm_F = float(np.linalg.norm(final_g))
    trace.final_dist = float(np.linalg.norm(z - root)) if root is not None else math.nan
    trace.total_evals = cum_evals + 1
    trace.total_matvecs = counter.count
    return z, (z_bar if config.mode is Mode.MONOTONE else None), trace


def extragradient_baseline(
    problem: Problem,
    step_size: float,
    n_iters: int,
    z0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray | None, RunTrace]:
    """Classical fixed-step extragradient with the same trace schema."""
    if not (0 < step_size <= 1.0 / problem.l1):
        raise ValueError("step_size must lie in (0, 1/L1]")
    d = problem.dim
    z = np.zeros(d) if z0 is None else np.asarray(z0, dtype=float).copy()
    root = problem.known_root
    trace = RunTrace(solver="extragradient", z0=z.copy(), meta={"step_size": step_size})

    cum_evals = 0
    zbar_acc = np.zeros(d)
    eta_sum = 0.0
    for k in range(n_iters):
        g = problem.eval(z)
        z_hat = z - step_size * g
        f_hat = problem.eval(z_hat)
        cum_evals += 2
        z_next = z - step_size * f_hat
        eta_sum += step_size
        zbar_acc += step_size * z_hat
        trace.rows.append(
            TraceRow(
                k=k,
                eta=step_size,
                theta=1.0,
                norm_F=float(np.linalg.norm(g)),
                dist=float(np.linalg.norm(z - root)) if root is not None else math.nan,
                step_norm=float(np.linalg.norm(z_hat - z)),
                backtracked=False,
                trials=2,
                loss=math.nan,
                cond_a_margin=math.nan,
                cond_b_margin=math.nan,
                cum_evals=cum_evals,
                cum_matvecs=0,
            )
        )
        z = z_next

    z_bar = zbar_acc / eta_sum if eta_sum > 0 else None
    trace.z_final = z
    trace.z_bar = z_bar
    trace.eta_sum = eta_sum
    trace.final_norm_F = float(np.linalg.norm(problem.eval(z)))
    trace.final_dist = float(np.linalg.norm(z - root)) if root is not None else math.nan
    trace.total_evals = cum_evals + 1
    trace.total_matvecs = 0
    return z, z_bar, trace
