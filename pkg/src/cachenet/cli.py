"""Command-line entry point.

Verbs:
  run <spec.json>    execute a sweep spec, write per-run and summary CSVs
  validate <spec.json>  check a spec without running it
  demo               tiny built-in cache-size sweep
"""

from __future__ import annotations

import argparse
import sys

from .experiment import ConfigError, demo_spec, load_spec, run_experiment, validate_spec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cachenet",
                                     description="Content placement and in-network cache simulator")
    sub = parser.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="run a sweep spec")
    run_p.add_argument("spec", help="path to a JSON sweep spec")
    run_p.add_argument("--seed-override", type=int, default=None,
                       help="run every cell with this single seed")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run_p.add_argument("--output", default=None, help="output directory (overrides spec)")

    val_p = sub.add_parser("validate", help="validate a sweep spec without running")
    val_p.add_argument("spec", help="path to a JSON sweep spec")

    demo_p = sub.add_parser("demo", help="run a tiny built-in sweep")
    demo_p.add_argument("--output", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.verb == "validate":
        try:
            load_spec(args.spec)
        except ConfigError as exc:
            for diag in exc.diagnostics:
                print(f"INVALID: {diag}")
            return 1
        except OSError as exc:
            print(f"INVALID: {exc}")
            return 1
        print("ok")
        return 0

    if args.verb == "demo":
        spec = demo_spec()
        per_run, summary = run_experiment(spec, output_dir=args.output)
        print(f"wrote {per_run}")
        print(f"wrote {summary}")
        return 0

    # run
    try:
        spec = load_spec(args.spec)
    except ConfigError as exc:
        for diag in exc.diagnostics:
            print(f"INVALID: {diag}")
        return 1
    except OSError as exc:
        print(f"error: {exc}")
        return 1
    try:
        per_run, summary = run_experiment(spec, jobs=args.jobs,
                                          seed_override=args.seed_override,
                                          output_dir=args.output)
    except OSError as exc:
        print(f"error: {exc}")
        return 1
    print(f"wrote {per_run}")
    print(f"wrote {summary}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
