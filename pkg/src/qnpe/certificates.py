"""Offline re-verification of the per-iteration guarantees from recorded
traces.  Verification is separated from solving so the hot loop
stays lean: the trace records everything needed."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .driver import Mode, SolverConfig
from .problems import GapSpec, Problem, evaluate_gap
from .trace import RunTrace


@dataclass
class CertificateCheck:
    name: str
    passed: bool
    worst_margin: float  # >= 0 means satisfied; the most negative value seen
    detail: str = ""


@dataclass
class CertificateReport:
    checks: list[CertificateCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status} {c.name}: worst margin {c.worst_margin:.3e} {c.detail}".rstrip())
        return out


def verify_iteration_certificates(
    trace: RunTrace,
    problem: Problem,
    config: SolverConfig,
    gap_spec: GapSpec | None = None,
) -> CertificateReport:
    report = CertificateReport()
    rows = trace.rows
    if not rows:
        # the solver stopped before taking a step; fine iff it started at a root
        at_root = trace.final_norm_F <= config.stop_tolerance
        report.checks.append(
            CertificateCheck(
                "converged-at-start",
                at_root,
                config.stop_tolerance - trace.final_norm_F,
                "no iterations recorded",
            )
        )
        return report

    l1 = problem.l1
    mu = problem.mu if config.mode is Mode.STRONGLY_MONOTONE else 0.0
    dists = trace.dists()
    have_dists = np.all(np.isfinite(dists))

    # per-iteration contraction / nonexpansion
    if have_dists:
        if config.mode is Mode.STRONGLY_MONOTONE:
            worst = math.inf
            for i, row in enumerate(rows):
                bound = dists[i] ** 2 / (1.0 + 2.0 * row.eta * mu) * (1.0 + 1e-8)
                worst = min(worst, bound - dists[i + 1] ** 2)
            report.checks.append(
                CertificateCheck("per-iteration-contraction", worst >= 0, worst)
            )
        else:
            worst = math.inf
            for i in range(len(rows)):
                worst = min(worst, dists[i] + 1e-10 - dists[i + 1])
            report.checks.append(CertificateCheck("nonexpansion", worst >= 0, worst))

        # cumulative displacement bound
        total_sq = sum(r.step_norm**2 for r in rows)
        bound = dists[0] ** 2 / (1.0 - config.alpha1 - config.alpha2) * (1.0 + 1e-6)
        margin = bound - total_sq
        report.checks.append(CertificateCheck("cumulative-displacement", margin >= 0, margin))

    # step-size floor
    floor = config.step_size_floor(l1)
    worst = min(r.eta for r in rows) - (floor - 1e-12)
    report.checks.append(CertificateCheck("step-size-floor", worst >= 0, worst))

    # operator-evaluation budget (trace rows count one base eval + trials per iteration)
    sigma0 = trace.meta.get("sigma0", config.effective_sigma0(l1))
    budget = config.eval_budget(len(rows), sigma0, l1)
    margin = budget - rows[-1].cum_evals
    report.checks.append(
        CertificateCheck("operator-eval-budget", margin >= 0, margin, f"budget {budget:.1f}")
    )

    # accepted line-search condition margins, recorded at acceptance time
    worst_a = min(r.cond_a_margin for r in rows)
    worst_b = min(r.cond_b_margin for r in rows)
    if math.isfinite(worst_a):
        scale = max(max(r.step_norm for r in rows), 1.0)
        report.checks.append(
            CertificateCheck("inexact-solve-condition", worst_a >= -1e-9 * scale, worst_a)
        )
        report.checks.append(
            CertificateCheck("proximal-condition", worst_b >= -1e-9 * scale, worst_b)
        )

    # averaged-iterate gap bound (monotone mode)
    if (
        config.mode is Mode.MONOTONE
        and gap_spec is not None
        and trace.z_bar is not None
        and trace.eta_sum > 0
        and trace.z0 is not None
    ):
        gap = evaluate_gap(problem, trace.z_bar, gap_spec)
        bound = _max_sq_distance(trace.z0, gap_spec) / (2.0 * trace.eta_sum) * (1.0 + 1e-6)
        margin = bound - gap
        report.checks.append(
            CertificateCheck("averaged-gap-bound", margin >= 0, margin, f"gap {gap:.3e}")
        )

    return report


def _max_sq_distance(z0: np.ndarray, gap_spec: GapSpec) -> float:
    """max over the comparison set of ||z0 - z||^2 (closed form per family)."""
    from .problems import PrimalDualBox, WeakGapBall

    if isinstance(gap_spec, WeakGapBall):
        return (np.linalg.norm(z0 - gap_spec.center) + gap_spec.radius) ** 2
    if isinstance(gap_spec, PrimalDualBox):
        lo = np.concatenate([gap_spec.x_lo, gap_spec.y_lo])
        hi = np.concatenate([gap_spec.x_hi, gap_spec.y_hi])
        per_coord = np.maximum((z0 - lo) ** 2, (z0 - hi) ** 2)
        return float(per_coord.sum())
    raise ValueError("gap bound needs a ball or box comparison set")
