"""Drive the `qnpe` command-line harness end to end: write a config, run it,
re-verify the recorded certificates, and produce a solver comparison table.

Run:  python3 demos/05_cli_benchmark.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

config = {
    "problems": [
        {"family": "quadratic_min", "d": 30, "mu": 0.1, "l1": 1.0, "seed": 4},
        {"family": "sparse_equation", "d": 20, "avg_degree": 3, "mu": 0.1,
         "l1": 1.5, "seed": 9},
    ],
    "solvers": [
        {"name": "qnpe", "mode": "strongly_monotone", "max_iterations": 500,
         "stop_tolerance": 1e-12, "z0_scale": 1.0},
        {"name": "eg", "step_size": 0.33, "n_iters": 2000, "z0_scale": 1.0},
    ],
    "repetitions": 2,
}


def cli(*args):
    proc = subprocess.run([sys.executable, "-m", "qnpe.cli", *args],
                          capture_output=True, text=True)
    return proc


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg_path = tmp / "bench.json"
    cfg_path.write_text(json.dumps(config, indent=2))

    print("== qnpe run ==")
    proc = cli("run", str(cfg_path), "--out", str(tmp / "out"), "--threads", "2")
    print(f"exit code {proc.returncode}")
    for s in json.loads((tmp / "out" / "summary.json").read_text()):
        print(f"  {s['run_id']}: {s['iterations']} iters, "
              f"final ||F|| = {s['final_norm_F']:.2e}")

    print("\n== qnpe verify ==")
    proc = cli("verify", str(tmp / "out"))
    print(f"exit code {proc.returncode}")
    for line in proc.stdout.strip().splitlines()[:6]:
        print(" ", line)
    print("  ...")

    print("\n== qnpe compare ==")
    proc = cli("compare", str(cfg_path), "--out", str(tmp / "cmp"))
    print(f"exit code {proc.returncode}")
    print((tmp / "cmp" / "compare.txt").read_text())
