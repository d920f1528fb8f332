"""Command-line entry points.

Subcommands: generate, poo, solve, verify, majorant, report.
Exit codes: 0 success, 2 check failure, 3 unsupported cocycle class,
4 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .majorant import check_majorant_domination, solve_G_scaled
from .pipeline import (canonical_json, generate_pair, load_cocycle, run_poo,
                       run_solve, run_verify, solution_from_record,
                       solution_to_record)
from .solver import HolderEstimate, OrbitNotDenseError, UnsupportedLinearCocycle

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_UNSUPPORTED = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="livsic-germs",
        description="Cohomological-equation experiments for cocycles of "
                    "truncated analytic germs over hyperbolic base systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        p.add_argument("--tol", type=float, default=None,
                       help="override the relevant tolerance")
        p.add_argument("--orbit-length", type=int, default=None,
                       help="override orbit_length")
        p.add_argument("--kmax", type=int, default=None, help="override kmax")

    p = sub.add_parser("generate", help="write a seeded ground truth and its coboundary")
    add_common(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("poo", help="periodic orbit obstruction check of a cocycle file")
    add_common(p, config_required=False)
    p.add_argument("--cocycle", required=True)
    p.add_argument("--out", default=None, help="JSON-lines output path")

    p = sub.add_parser("solve", help="full solve pipeline on a cocycle file")
    add_common(p, config_required=False)
    p.add_argument("--cocycle", required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("verify", help="re-verify a solution file against a cocycle file")
    add_common(p, config_required=False)
    p.add_argument("--cocycle", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("majorant", help="majorant coefficient table (and domination check)")
    p.add_argument("--scale", type=float, required=True, help="the scale S")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--solve-report", default=None,
                   help="check domination against a solve report's seminorms")

    p = sub.add_parser("report", help="summary, CSV tables and figures from solve reports")
    p.add_argument("reports", nargs="*", help="solve report JSON files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true")

    return parser


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "orbit_length", None) is not None:
        out["orbit_length"] = args.orbit_length
    if getattr(args, "kmax", None) is not None:
        out["kmax"] = args.kmax
    return out


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config is required for this invocation")
    return ExperimentConfig.from_file(args.config, _overrides(args))


def _load_cocycle_file(args):
    with open(args.cocycle) as fh:
        record = json.load(fh)
    system, obs, config = load_cocycle(record)
    over = _overrides(args)
    if args.config is not None or over:
        base = ExperimentConfig.from_file(args.config, over) if args.config \
            else ExperimentConfig.from_mapping(
                {k: _str(v) for k, v in record["config"].items()}, over)
        config = base
    return system, obs, config


def _str(v) -> str:
    if isinstance(v, list):
        return " ".join(str(x) for row in v for x in (row if isinstance(row, list) else [row]))
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _write(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def cmd_generate(args) -> int:
    config = _load_config(args)
    h_record, f_record = generate_pair(config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write(outdir / "h_true.json", canonical_json(h_record))
    _write(outdir / "cocycle.json", canonical_json(f_record))
    print(f"wrote {outdir / 'h_true.json'} and {outdir / 'cocycle.json'}")
    return EXIT_OK


def cmd_poo(args) -> int:
    system, obs, config = _load_cocycle_file(args)
    report = run_poo(system, obs, config, kmax=args.kmax, tol=args.tol)
    lines = "".join(json.dumps(row, sort_keys=True) + "\n"
                    for row in report["orbits"])
    if args.out:
        _write(args.out, lines)
    else:
        sys.stdout.write(lines)
    print(f"POO max residual {report['max_residual']:.3e} "
          f"(tol {report['tol']:.1e}): {'PASS' if report['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_solve(args) -> int:
    system, obs, config = _load_cocycle_file(args)
    if args.tol is not None:
        config = ExperimentConfig.from_mapping(
            {k: _str(v) for k, v in config.to_record().items()},
            {"solve_tol": args.tol})
    outdir = Path(args.out)
    report, solution = run_solve(system, obs, config)
    outdir.mkdir(parents=True, exist_ok=True)
    _write(outdir / "solve_report.json", canonical_json(report))
    if solution is not None:
        _write(outdir / "solution.json",
               canonical_json(solution_to_record(solution)))
    verdict = "PASS" if report.get("passed") else "FAIL"
    if "verify" in report:
        detail = f"verify residual {report['verify']['max_residual']:.3e}"
    elif not report.get("poo", {}).get("passed", True):
        detail = (f"obstruction residual {report['poo']['max_residual']:.3e} "
                  f"exceeds tol {report['poo']['tol']:.1e}")
    else:
        detail = "linear-part reduction failed"
    print(f"solve {report['config_hash'][:12]}: {detail}, {verdict}")
    return EXIT_OK if report.get("passed") else EXIT_CHECK_FAILED


def cmd_verify(args) -> int:
    system, obs, config = _load_cocycle_file(args)
    with open(args.solution) as fh:
        solution = solution_from_record(json.load(fh))
    report = run_verify(system, obs, solution, config)
    if args.out:
        _write(args.out, canonical_json(report))
    print(f"verify residual {report['max_residual']:.3e} "
          f"(tol {report['tol']:.1e}): {'PASS' if report['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_majorant(args) -> int:
    table = solve_G_scaled(args.scale, args.d, args.N)
    if args.out:
        _write(args.out, canonical_json(table.to_record()))
    print(f"majorant table S={table.S:g} d={table.dims} N={table.max_degree}: "
          f"growth rate {table.growth_rate:.6g}")
    if args.solve_report:
        with open(args.solve_report) as fh:
            rep = json.load(fh)
        seminorms = {
            (row["component"], tuple(row["index"])): HolderEstimate(
                alpha=rep.get("alpha", 1.0), seminorm=row["seminorm"],
                sup_norm=row["sup"], method="empirical")
            for row in rep.get("seminorms", [])
        }
        dom = check_majorant_domination(seminorms, table)
        print(f"domination: {'PASS' if dom.passed else 'FAIL'} "
              f"(chain {'PASS' if dom.chain_passed else 'FAIL'})")
        if not (dom.passed and dom.chain_passed):
            return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_report(args) -> int:
    from .reporting import write_report_bundle

    reports = []
    for path in args.reports:
        with open(path) as fh:
            reports.append(json.load(fh))
    bundle = write_report_bundle(reports, args.out, figures=not args.no_figures)
    sys.stdout.write(bundle["summary"])
    for p in bundle["csv_paths"] + bundle["figure_paths"]:
        print(f"wrote {p}")
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "poo": cmd_poo,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "majorant": cmd_majorant,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UnsupportedLinearCocycle as exc:
        print(f"unsupported cocycle: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except OrbitNotDenseError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (ConfigError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"configuration or I/O error: {exc!r}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
