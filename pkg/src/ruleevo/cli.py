"""Command-line entry point.

    ruleevo run --config cartpole.json --seed 7 --out runs/cp
    ruleevo eval best_policy.txt --env cartpole --episodes 100
    ruleevo dump-archive runs/cp/archive.json --format csv
    ruleevo replay runs/cp/summary.json --out runs/cp-replay

Exit status: 0 success, 1 runtime failure (or replay mismatch), 2 invalid
input (config, policy text, archive).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import kernel
from .config import apply_overrides, load_config, run_config_from_dict, run_config_to_dict
from .engine import GenerationStats, RunResult, run_evolution
from .envs import get_spec
from .errors import ConfigError, RuleEvoError
from .fitness import evaluate
from .policy import format_policy, parse_policy
from .qd import archive_csv, archive_dump, archive_load

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2

# columns of stats.csv; per-generation wall time goes to timing.json so that
# stats.csv is reproducible byte for byte
STATS_COLUMNS = ("generation", "best_fitness", "mean_fitness", "best_performance", "occupancy", "best_complexity")


def stats_csv(stats: list[GenerationStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_COLUMNS)
    for st in stats:
        w.writerow([repr(getattr(st, c)) if isinstance(getattr(st, c), float) else getattr(st, c)
                    for c in STATS_COLUMNS])
    return buf.getvalue()


def summary_doc(result: RunResult, dedup: bool = False) -> dict:
    best = result.best
    policy = best.policy.dedup() if dedup else best.policy
    return {
        "best_policy_text": format_policy(policy),
        "performance": best.performance,
        "complexity": sum(len(r.predicates) for r in policy.rules),
        "fitness": best.fitness,
        "generations_run": result.generations_run,
        "solved": result.solved,
        "evaluations": result.evaluations,
        "episodes": result.episodes,
        "dedup": dedup,
        "config": run_config_to_dict(result.config),
    }


def write_run_outputs(result: RunResult, out_dir: Path, dedup: bool = False) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summary_doc(result, dedup)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out_dir / "stats.csv").write_text(stats_csv(result.stats))
    (out_dir / "archive.json").write_text(archive_dump(result.archive) + "\n")
    (out_dir / "best_policy.txt").write_text(summary["best_policy_text"] + "\n")
    timing = {
        "wall_time_s": result.wall_time,
        "generation_wall_time_s": [st.wall_time for st in result.stats],
        "backend": kernel.BACKEND,
    }
    (out_dir / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    return summary


def _run_from_doc(doc: dict, out_dir: Path, quiet: bool, dedup: bool) -> dict:
    cfg = run_config_from_dict(doc)
    if not quiet:
        print(f"running {cfg.env_name}: N={cfg.population} G={cfg.generations} E={cfg.eval_episodes} "
              f"lambda={cfg.complexity_penalty} seed={cfg.run_seed} backend={kernel.BACKEND}", file=sys.stderr)

    def progress(st: GenerationStats) -> None:
        if not quiet:
            print(f"gen {st.generation:4d}  best_fitness {st.best_fitness:9.3f}  best_perf {st.best_performance:9.3f}"
                  f"  occupancy {st.occupancy:3d}", file=sys.stderr)

    result = run_evolution(cfg, progress)
    summary = write_run_outputs(result, out_dir, dedup)
    print(summary["best_policy_text"])
    if not quiet:
        print(f"performance {summary['performance']}  complexity {summary['complexity']}  "
              f"fitness {summary['fitness']}  generations {summary['generations_run']}  "
              f"wall {result.wall_time:.2f}s", file=sys.stderr)
    return summary


def cmd_run(args) -> int:
    doc = load_config(args.config)
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    doc = apply_overrides(doc, overrides)
    run_config_from_dict(doc)  # validate before creating outputs
    _run_from_doc(doc, Path(args.out), args.quiet, args.dedup)
    return EXIT_OK


def cmd_eval(args) -> int:
    spec = get_spec(args.env)
    policy = parse_policy(Path(args.policy_file).read_text(), spec.obs_dim, spec.action_count)
    if args.dedup:
        policy = policy.dedup()
    report = evaluate(policy, spec.name, args.episodes, 0.0, args.seed)
    for i, r in enumerate(report.episode_returns):
        print(f"episode {i}: {r}")
    print(f"mean: {report.performance}")
    return EXIT_OK


def cmd_dump_archive(args) -> int:
    archive = archive_load(Path(args.archive_file).read_text())
    sys.stdout.write(archive_dump(archive) + "\n" if args.format == "json" else archive_csv(archive))
    return EXIT_OK


def cmd_replay(args) -> int:
    """Re-run the config echoed in a summary and compare the new summary with it."""
    original = json.loads(Path(args.summary_file).read_text())
    if not isinstance(original, dict) or not isinstance(original.get("config"), dict):
        raise ConfigError("summary has no 'config' object")
    summary = _run_from_doc(original["config"], Path(args.out), args.quiet, bool(original.get("dedup", False)))
    if summary == original:
        print("replay matches", file=sys.stderr)
        return EXIT_OK
    print("replay differs from the recorded summary", file=sys.stderr)
    return EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ruleevo", description="Evolve rule-list control policies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an evolution experiment from a JSON config")
    p.add_argument("--config", required=True, help="config path, or the name of a shipped config")
    p.add_argument("--seed", type=int, help="run seed (overrides the config)")
    p.add_argument("--out", default="runs/latest", help="output directory")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    p.add_argument("--workers", type=int, help="evaluation threads")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--dedup", action="store_true", help="drop duplicate predicates from the reported policy")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="evaluate a policy text file")
    p.add_argument("policy_file")
    p.add_argument("--env", required=True)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dedup", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dump-archive", help="print an archive as JSON or CSV")
    p.add_argument("archive_file")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_dump_archive)

    p = sub.add_parser("replay", help="re-run the config recorded in a summary.json")
    p.add_argument("summary_file")
    p.add_argument("--out", default="runs/replay")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (RuleEvoError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
