"""Command line entry point: ``cstar-ergodic run|validate|list-examples``."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .dynamics import DEFAULT_HORIZON
from .errors import ErgodicError, HypothesisError
from .scenario import (
    OUT_DIR_ENV,
    RunOptions,
    default_out_dir,
    load_raw,
    resolve,
    run_scenario,
    shipped_scenarios,
    validate,
    write_outputs,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_HYPOTHESIS = 3


def _run_one(path: Path, opts: RunOptions) -> tuple[int, str]:
    try:
        report, tables = run_scenario(path, opts)
    except HypothesisError as exc:
        msg = f"{path}: {exc.code.replace('-', ' ')}: {exc.detail}"
        partial = getattr(exc, "report", None)
        if partial is not None:
            write_outputs(partial, exc.tables, opts.out)
        return EXIT_HYPOTHESIS, msg
    except (ErgodicError, OSError) as exc:
        return EXIT_INVALID, f"{path}: {exc}"
    out = write_outputs(report, tables, opts.out)
    return EXIT_OK, f"{path}: wrote {out}"


def cmd_run(args) -> int:
    opts = RunOptions(
        out=Path(args.out) if args.out else default_out_dir(),
        horizon=args.horizon,
        epsilon=args.epsilon,
        seed=args.seed,
        timestamp=not args.no_timestamp,
    )
    paths = [resolve(f) for f in args.files]
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, paths, [opts] * len(paths)))
    else:
        results = [_run_one(p, opts) for p in paths]
    code = EXIT_OK
    for status, msg in results:
        print(msg, file=sys.stderr if status else sys.stdout)
        code = max(code, status)
    return code


def cmd_validate(args) -> int:
    code = EXIT_OK
    for f in args.files:
        path = resolve(f)
        diags = validate(path)
        if diags:
            code = EXIT_INVALID
            for d in diags:
                print(f"{path}: {d}")
        else:
            print(f"{path}: ok")
    return code


def cmd_list(args) -> int:
    for name, path in shipped_scenarios().items():
        raw, _ = load_raw(path)
        desc = str(raw.get("description", "")).strip().splitlines()
        print(f"{name:28s} {desc[0] if desc else ''}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cstar-ergodic", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenarios and write reports")
    run.add_argument("files", nargs="+", help="scenario files or shipped scenario names")
    run.add_argument("--out", help=f"output directory (default: ${OUT_DIR_ENV} or ./reports)")
    run.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help="default Cesàro/scan horizon")
    run.add_argument("--epsilon", type=float, default=0.1, help="default recurrence tolerance")
    run.add_argument("--seed", type=int, default=0, help="seed for randomized property checks")
    run.add_argument("--jobs", type=int, default=1, help="run independent scenarios in parallel")
    run.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from reports")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check scenarios without running analyses")
    val.add_argument("files", nargs="+")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list-examples", help="list shipped scenarios")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "horizon", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("horizon and jobs must be positive", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
