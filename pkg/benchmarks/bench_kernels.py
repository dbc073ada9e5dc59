"""Time the compiled and pure-Python rollout kernels on identical batches.

    python benchmarks/bench_kernels.py [--episodes 100] [--repeat 5]

Each environment runs its shipped policy from the same seeded start states on
both backends, checks that the returns agree exactly, and reports the best
wall time over ``--repeat`` runs.
"""

from __future__ import annotations

import argparse
import json
import time
from importlib import resources

import numpy as np

from ruleevo import _pykernel, kernel
from ruleevo.envs import SPECS, initial_state
from ruleevo.policy import parse_policy


def best_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(episodes: int, repeat: int) -> list[dict]:
    backends = {"python": _pykernel}
    if kernel.compiled_available():
        from ruleevo import _ckernel
        backends["cython"] = _ckernel
    rows = []
    for name, spec in SPECS.items():
        policy = parse_policy((resources.files("ruleevo") / "policies" / f"{name}.txt").read_text())
        states0 = np.array([initial_state(spec, s) for s in range(episodes)], dtype=np.float64)
        args = (spec.env_id, states0, *policy.flat(), spec.max_steps, spec.step_reward)
        results = {b: mod.rollout_batch(*args) for b, mod in backends.items()}
        ref_returns, ref_steps = results["python"]
        for b, (ret, steps) in results.items():
            if not (np.array_equal(ret, ref_returns) and np.array_equal(steps, ref_steps)):
                raise SystemExit(f"{b} backend disagrees with python on {name}")
        row = {"env": name, "episodes": episodes, "env_steps": int(ref_steps.sum())}
        for b, mod in backends.items():
            row[f"{b}_s"] = best_time(lambda: mod.rollout_batch(*args), repeat)
        if "cython" in backends:
            row["speedup"] = row["python_s"] / row["cython_s"]
        rows.append(row)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print machine-readable rows")
    args = ap.parse_args()
    rows = bench(args.episodes, args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'env':<12}{'steps':>9}{'python s':>11}{'cython s':>11}{'speedup':>9}")
    for r in rows:
        print(f"{r['env']:<12}{r['env_steps']:>9}{r['python_s']:>11.4f}"
              f"{r.get('cython_s', float('nan')):>11.4f}{r.get('speedup', float('nan')):>8.1f}x")


if __name__ == "__main__":
    main()
