"""Per-iteration run traces with CSV / JSON-lines export.

The CSV format is versioned via the leading comment line `# qnpe-trace-v1`
and has a fixed column order; floats are written with full repr precision so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TRACE_VERSION = "qnpe-trace-v1"

COLUMNS = [
    "k",
    "eta",
    "theta",
    "norm_F",
    "dist",
    "step_norm",
    "backtracked",
    "trials",
    "loss",
    "cond_a_margin",
    "cond_b_margin",
    "cum_evals",
    "cum_matvecs",
]


@dataclass
class TraceRow:
    k: int
    eta: float
    theta: float
    norm_F: float
    dist: float  # ||z_k - z*||, nan when the root is unknown
    step_norm: float  # ||z_hat_k - z_k||
    backtracked: bool
    trials: int
    loss: float  # model-mismatch loss, nan when not backtracked
    cond_a_margin: float  # rhs - lhs of the inner-solve condition at acceptance
    cond_b_margin: float  # rhs - lhs of the proximal condition at acceptance
    cum_evals: int
    cum_matvecs: int

    def as_list(self) -> list:
        return [getattr(self, c) for c in COLUMNS]


@dataclass
class RunTrace:
    solver: str
    rows: list[TraceRow] = field(default_factory=list)
    z0: np.ndarray | None = None
    z_final: np.ndarray | None = None
    z_bar: np.ndarray | None = None
    eta_sum: float = 0.0
    final_norm_F: float = math.nan
    final_dist: float = math.nan
    total_evals: int = 0  # includes the final stopping-check evaluation
    total_matvecs: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.rows)

    def dists(self) -> np.ndarray:
        """Distances ||z_k - z*|| for k = 0..N, including the final iterate."""
        return np.array([r.dist for r in self.rows] + [self.final_dist])


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def trace_to_csv(trace: RunTrace) -> str:
    lines = [f"# {TRACE_VERSION}", ",".join(COLUMNS)]
    for row in trace.rows:
        lines.append(",".join(_fmt(v) for v in row.as_list()))
    return "\n".join(lines) + "\n"


def trace_from_csv(text: str) -> RunTrace:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != f"# {TRACE_VERSION}":
        raise ValueError("missing or unknown trace version header")
    header = lines[1].split(",")
    if header != COLUMNS:
        raise ValueError("unexpected trace columns")
    trace = RunTrace(solver="")
    for ln in lines[2:]:
        parts = ln.split(",")
        vals = dict(zip(COLUMNS, parts))
        trace.rows.append(
            TraceRow(
                k=int(vals["k"]),
                eta=float(vals["eta"]),
                theta=float(vals["theta"]),
                norm_F=float(vals["norm_F"]),
                dist=float(vals["dist"]),
                step_norm=float(vals["step_norm"]),
                backtracked=vals["backtracked"] == "1",
                trials=int(vals["trials"]),
                loss=float(vals["loss"]),
                cond_a_margin=float(vals["cond_a_margin"]),
                cond_b_margin=float(vals["cond_b_margin"]),
                cum_evals=int(vals["cum_evals"]),
                cum_matvecs=int(vals["cum_matvecs"]),
            )
        )
    return trace


def trace_to_jsonl(trace: RunTrace) -> str:
    lines = [json.dumps({"version": TRACE_VERSION, "solver": trace.solver})]
    for row in trace.rows:
        lines.append(json.dumps(dict(zip(COLUMNS, row.as_list())), sort_keys=True))
    return "\n".join(lines) + "\n"
