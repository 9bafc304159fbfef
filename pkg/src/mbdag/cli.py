"""Command-line entry point.

Graph sources are either a ``.dag`` file path or ``scenario:NAME``.
Exit status: 0 success, 1 analysis error, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bias import EffectQuery, analyze_effect, differentiality_derived_mode, singleton_report
from .dsl import DslParseFailure, parse, serialize, to_dot
from .errors import MbdagError, ParamsError, UnknownNode, UnknownScenario
from .paths import d_separated, enumerate_paths, path_status
from .report import analysis_report, paths_report, render_report, simulation_report, singleton_report_dict
from .scenarios import SCENARIO_NAMES, builtin_scenario
from .scm import (
    Reading,
    differentiality_empirical,
    error_summary,
    exact_joint,
    load_params,
    sample,
    substitution_estimates,
)

EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _names(text):
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


def _load_source(src):
    """Return (dag, scenario-or-None)."""
    if src.startswith("scenario:"):
        spec = builtin_scenario(src.split(":", 1)[1])
        return spec.dag, spec
    path = Path(src)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {src}: {exc.strerror}") from None
    return parse(text), None


def _require_nodes(dag, **flags):
    for flag, value in flags.items():
        for name in ([value] if isinstance(value, str) else value or ()):
            if name not in dag:
                raise UsageError(f"--{flag.replace('_', '-')}: unknown node {name!r}")


def _query(args, dag, spec, required=True):
    flags = {
        "exposure": args.exposure,
        "outcome": args.outcome,
        "exposure_proxy": args.exposure_proxy,
        "outcome_proxy": args.outcome_proxy,
    }
    if all(v is None for v in flags.values()):
        if spec is not None and spec.query is not None:
            return spec.query
        if not required:
            return None
    default = spec.query if spec is not None else None
    for k in flags:
        if flags[k] is None and default is not None:
            flags[k] = getattr(default, k)
    missing = [k for k, v in flags.items() if v is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
    _require_nodes(dag, **flags)
    q = EffectQuery(**flags)
    q.check(dag)
    return q


def cmd_validate(args, out):
    dag, _ = _load_source(args.source)
    report = dag.validate()
    for e in report.errors:
        out.write(f"error: {e}\n")
    for w in report.warnings:
        out.write(f"warning: {w}\n")
    out.write(f"{'valid' if report.ok else 'invalid'}: {len(dag)} nodes, {len(dag.edges)} edges, "
              f"{len(dag.conditioned)} conditioned\n")
    return EXIT_OK if report.ok else EXIT_ANALYSIS


def cmd_paths(args, out):
    dag, _ = _load_source(args.source)
    given = _names(args.adjust)
    _require_nodes(dag, **{"from": args.src, "to": args.dst}, adjust=given)
    given = dag.conditioned if given is None else frozenset(given)
    verdicts = [path_status(dag, p, given) for p in enumerate_paths(dag, args.src, args.dst)]
    out.write(render_report(paths_report(args.source, dag, args.src, args.dst, given, verdicts),
                            "json" if args.json else "text"))
    return EXIT_OK


def cmd_dsep(args, out):
    dag, _ = _load_source(args.source)
    given = _names(args.given)
    _require_nodes(dag, x=args.x, y=args.y, given=given)
    result = d_separated(dag, args.x, args.y, given)
    out.write(f"d-separated: {'true' if result else 'false'}\n")
    return EXIT_OK


def cmd_analyze(args, out):
    dag, spec = _load_source(args.source)
    fmt = "json" if args.json else "text"
    has_flags = any(v is not None for v in (args.exposure, args.outcome, args.exposure_proxy, args.outcome_proxy))
    if spec is not None and spec.singleton and not has_flags:
        sr = singleton_report(dag, spec.singleton)
        out.write(render_report(singleton_report_dict(args.source, dag, sr), fmt))
        return EXIT_OK
    q = _query(args, dag, spec)
    out.write(render_report(analysis_report(args.source, dag, analyze_effect(dag, q)), fmt))
    return EXIT_OK


def cmd_simulate(args, out):
    dag, spec = _load_source(args.source)
    if args.params:
        try:
            text = Path(args.params).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {args.params}: {exc.strerror}") from None
        scm = load_params(dag, text)
    elif spec is not None:
        scm = spec.params
    else:
        raise UsageError("--params is required when the source is a file")
    q = _query(args, dag, spec, required=False)

    dataset_info = None
    if args.n is not None:
        data = sample(scm, args.n, args.seed)
        if args.output is None:
            out.write(data.to_csv())
            return EXIT_OK
        Path(args.output).write_text(data.to_csv(), encoding="utf-8")
        dataset_info = {"path": args.output, "rows": args.n, "raw_draws": data.raw_draws, "seed": args.seed}

    jd = exact_joint(scm)
    errors = [error_summary(jd, b) for b in dag.bindings]
    empirical, derived, estimates = (), None, None
    if q is not None:
        empirical = tuple(differentiality_empirical(scm, q, r, jd=jd) for r in Reading)
        derived = differentiality_derived_mode(dag, q)
        estimates = substitution_estimates(jd, q)
    doc = simulation_report(args.source, jd, scm.condition_events, errors, q, empirical,
                            derived, estimates, dataset_info)
    out.write(render_report(doc, "json" if args.json else "text"))
    return EXIT_OK


def cmd_scenario(args, out):
    if args.action == "list":
        for name in SCENARIO_NAMES:
            out.write(f"{name:<16}{builtin_scenario(name).narrative}\n")
        return EXIT_OK
    if not args.name:
        raise UsageError("scenario show: a scenario name is required")
    out.write(serialize(builtin_scenario(args.name).dag))
    return EXIT_OK


def cmd_export_dot(args, out):
    dag, spec = _load_source(args.source)
    name = spec.name if spec is not None else Path(args.source).stem
    text = to_dot(dag, name)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def _query_flags(p):
    p.add_argument("--exposure", metavar="A")
    p.add_argument("--outcome", metavar="Y")
    p.add_argument("--exposure-proxy", metavar="A*")
    p.add_argument("--outcome-proxy", metavar="Y*")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mbdag",
        description="Measurement-bias analysis of causal diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    src_help = "a .dag file or scenario:NAME"

    p = sub.add_parser("validate", help="parse and check a graph")
    p.add_argument("source", help=src_help)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="list paths between two nodes with open/blocked verdicts")
    p.add_argument("source", help=src_help)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--adjust", help="comma-separated conditioning set (default: the graph's)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("dsep", help="d-separation query")
    p.add_argument("source", help=src_help)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--given", help="comma-separated conditioning set (default: the graph's)")
    p.set_defaults(func=cmd_dsep)

    p = sub.add_parser("analyze", help="mechanisms and differentiality for an exposure/outcome pair")
    p.add_argument("source", help=src_help)
    _query_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="exact binary-model evaluation, optional sampling")
    p.add_argument("source", help=src_help)
    p.add_argument("--params", help="JSON parameter file")
    p.add_argument("--n", type=int, help="number of rows to sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="write the sampled CSV here instead of stdout")
    _query_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="built-in scenarios")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("export-dot", help="write Graphviz text")
    p.add_argument("source", help=src_help)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def run_cli(argv, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if getattr(args, "n", None) is not None and args.n < 1:
        err.write(parser.format_usage())
        err.write("mbdag: error: --n must be at least 1\n")
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except DslParseFailure as exc:
        for e in exc.errors:
            err.write(f"{args.source}:{e}\n")
        return EXIT_USAGE
    except (UsageError, UnknownScenario, UnknownNode, ParamsError) as exc:
        err.write(parser.format_usage())
        err.write(f"mbdag: error: {exc}\n")
        return EXIT_USAGE
    except MbdagError as exc:
        err.write(f"mbdag: {type(exc).__name__}: {exc}\n")
        return EXIT_ANALYSIS


def main():
    sys.exit(run_cli(sys.argv[1:]))
