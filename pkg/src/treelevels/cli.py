"""Command-line entry point.

    treelevels run --config cfg.json [--seed S] [--threads T] [--out DIR]
    treelevels list-suites
    treelevels moments --k K --t T

Exit codes: 0 all checks passed, 1 statistical failure, 2 usage or config
error, 3 resource budget exceeded.  ``TREELEVELS_OUT`` sets the default
output directory; flags override config fields.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConditioningError, ConfigError, ResourceBudgetError
from .moments import count_variance, variance_decomposition_residual
from .reporting import Row, format_rows_csv, write_csv, write_json
from .suites import ExperimentConfig, list_suites, run_suite

EXIT_OK = 0
EXIT_STAT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

OUT_ENV_VAR = "TREELEVELS_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treelevels",
        description="verification suites for recursive-tree level profiles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one suite from a JSON config")
    run_p.add_argument("--config", required=True, help="path to JSON config")
    run_p.add_argument("--seed", type=int, default=None, help="override seed")
    run_p.add_argument(
        "--threads", default=None, help="override worker count ('auto' or int)"
    )
    run_p.add_argument("--out", default=None, help="override output directory")

    sub.add_parser("list-suites", help="list suites with descriptions")

    mom_p = sub.add_parser(
        "moments", help="print closed-form moment values for one (k, t)"
    )
    mom_p.add_argument("--k", type=int, required=True)
    mom_p.add_argument("--t", type=float, required=True)
    mom_p.add_argument("--out", default=None, help="also write the row as CSV here")
    return parser


def _load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(payload)


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads if args.threads == "auto" else int(args.threads)
    out_dir = args.out or cfg.out_dir or os.environ.get(OUT_ENV_VAR) or "treelevels-out"
    cfg.out_dir = out_dir
    cfg.validate()

    result = run_suite(cfg)

    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, cfg.suite)
    write_csv(f"{base}.csv", result.rows)
    write_json(
        f"{base}-summary.json",
        {
            "suite": cfg.suite,
            "seed": cfg.seed,
            "all_passed": result.all_passed,
            "reports": [r.to_dict() for r in result.reports],
            "summary": result.summary,
        },
    )
    for fname, svg in result.plots.items():
        with open(os.path.join(out_dir, fname), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(svg)

    for rep in result.reports:
        status = "PASS" if rep.passed else "FAIL"
        pv = f" p={rep.p_value:.4g}" if rep.p_value is not None else ""
        print(f"[{status}] {rep.suite}: statistic={rep.statistic:.6g}{pv}")
    print(
        f"{cfg.suite}: {'all checks passed' if result.all_passed else 'FAILURES'}"
        f"; artifacts in {out_dir}"
    )
    return EXIT_OK if result.all_passed else EXIT_STAT_FAIL


def _cmd_list_suites() -> int:
    for name, desc in list_suites():
        print(f"{name:26s} {desc}")
    return EXIT_OK


def _cmd_moments(args) -> int:
    if args.k < 2:
        print("moments: --k must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    if args.t < 0:
        print("moments: --t must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    value = count_variance(args.k, args.t).to_float()
    residual = variance_decomposition_residual(args.k, args.t)
    row = Row(0, None, args.k, args.t, value, residual)
    sys.stdout.write(format_rows_csv([row]))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_csv(os.path.join(args.out, "moments.csv"), [row])
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-suites":
            return _cmd_list_suites()
        if args.command == "moments":
            return _cmd_moments(args)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"config error{field}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceBudgetError as exc:
        print(f"resource budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConditioningError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
