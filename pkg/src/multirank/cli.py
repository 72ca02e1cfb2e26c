"""Command line front end.

Subcommands: ``generate`` (synthetic loans), ``build`` (one window's layer
edge lists), ``rank`` (scores on explicit layer files), ``features`` (one
window's feature rows), ``pipeline`` (rolling feature table), ``sweep``
(parameter grid report), and ``inspect`` (network summary).  Exit codes:
0 success, 1 validation problem, 2 I/O problem.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .errors import MultirankError, ValidationError
from .graph import (
    Layer,
    build_network,
    largest_component_fraction,
    read_layer_csv,
    supra_adjacency,
    supra_transition,
    write_layer_csv,
)
from .ingest import (
    WindowSpec,
    build_window_network,
    defaulter_set,
    format_month,
    load_loans,
    parse_month,
    write_loans_csv,
)
from .propagation import (
    RESTART_MODES,
    SCENARIOS,
    InfluenceSpec,
    build_influence_matrix,
    multilayer_pagerank,
    personalized_pagerank,
    write_node_scores,
    write_state_scores,
)
from .synth import SynthConfig, generate_loans

logger = logging.getLogger(__name__)


def _add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window-start", required=True, help="first window month, YYYY-MM")
    parser.add_argument("--window-months", type=int, default=60, help="window length in months")
    parser.add_argument("--tail-months", type=int, default=1, help="scoring tail length in months")


def _add_rank_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--r", type=float, default=None, help="damping factor in [0, 1]")
    parser.add_argument("--stickiness", type=float, default=None, help="inter-layer coupling weight")
    parser.add_argument(
        "--restart-mode",
        choices=RESTART_MODES,
        default=None,
        help="personalized restart semantics",
    )
    parser.add_argument("--tol", type=float, default=None, help="L1 convergence tolerance")
    parser.add_argument("--max-iter", type=int, default=None, help="iteration cap")


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--loans", required=True, help="loan CSV path")
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--window-months", type=int, default=None, help="window length in months")
    parser.add_argument("--tail-months", type=int, default=None, help="scoring tail length in months")
    _add_rank_flags(parser)
    parser.add_argument(
        "--scenarios",
        default=None,
        help="comma separated subset of intra,inter,combined",
    )
    parser.add_argument(
        "--no-flat",
        action="store_true",
        help="skip the flattened-network Aggregate column",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker pool size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multirank",
        description="Multilayer network features for loan portfolios.",
    )
    sub = parser.add_subparsers(
        dest="command", required=True, metavar="COMMAND", help="subcommand to run"
    )

    p = sub.add_parser("generate", help="write a synthetic loan CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--borrowers", type=int, default=1000, help="number of borrowers")
    p.add_argument("--products", type=int, default=20, help="number of products")
    p.add_argument("--districts", type=int, default=10, help="number of districts")
    p.add_argument("--areas-per-district", type=int, default=4, help="areas nested per district")
    p.add_argument("--months", type=int, default=72, help="origination month span")
    p.add_argument("--base-default-rate", type=float, default=0.005, help="no-shock monthly default hazard")
    p.add_argument("--area-shock-strength", type=float, default=0.0, help="hazard multiplier minus one in shocked area-months")
    p.add_argument("--product-shock-strength", type=float, default=0.0, help="hazard multiplier minus one in shocked product-months")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("build", help="build one window's network as layer edge lists")
    p.add_argument("--loans", required=True, help="loan CSV path")
    _add_window_flags(p)
    p.add_argument("--out-dir", required=True, help="directory for layer files")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("rank", help="score a network given as layer edge lists")
    p.add_argument(
        "--layer",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="layer edge list, repeatable, order defines layer order",
    )
    p.add_argument("--stickiness", type=float, default=1.0, help="inter-layer coupling weight")
    p.add_argument(
        "--scenario",
        choices=("standard",) + SCENARIOS,
        default="standard",
        help="influence scenario (standard = uniform teleport)",
    )
    p.add_argument("--sources", default=None, help="file with one source node id per line")
    p.add_argument("--r", type=float, default=0.85, help="damping factor in [0, 1]")
    p.add_argument(
        "--restart-mode",
        choices=RESTART_MODES,
        default="faithful_matrix",
        help="personalized restart semantics",
    )
    p.add_argument("--tol", type=float, default=1e-10, help="L1 convergence tolerance")
    p.add_argument("--max-iter", type=int, default=1000, help="iteration cap")
    p.add_argument("--out-prefix", required=True, help="prefix for score files")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("features", help="feature rows for one explicit window")
    p.add_argument("--loans", required=True, help="loan CSV path")
    _add_window_flags(p)
    _add_rank_flags(p)
    p.add_argument("--scenarios", default=None, help="comma separated subset of intra,inter,combined")
    p.add_argument("--no-flat", action="store_true", help="skip the flattened-network Aggregate column")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("pipeline", help="rolling-window feature table")
    _add_pipeline_flags(p)
    p.add_argument("--out", default=None, help="output CSV path (or 'out' config key)")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("sweep", help="grid sweep over r and stickiness")
    _add_pipeline_flags(p)
    p.add_argument("--r-grid", required=True, help="comma separated damping values")
    p.add_argument("--s-grid", default="1", help="comma separated stickiness values")
    p.add_argument("--out", default=None, help="output CSV path (or 'out' config key)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("inspect", help="summarize a network")
    p.add_argument(
        "--layer",
        action="append",
        default=None,
        metavar="NAME=PATH",
        help="layer edge list, repeatable (alternative to --loans)",
    )
    p.add_argument("--stickiness", type=float, default=1.0, help="inter-layer coupling weight")
    p.add_argument("--loans", default=None, help="loan CSV path (needs --window-start)")
    p.add_argument("--window-start", default=None, help="window month, YYYY-MM")
    p.add_argument("--window-months", type=int, default=60, help="window length in months")
    p.add_argument("--tail-months", type=int, default=1, help="scoring tail length in months")
    p.set_defaults(func=_cmd_inspect)
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    config = SynthConfig(
        n_borrowers=args.borrowers,
        n_products=args.products,
        n_districts=args.districts,
        areas_per_district=args.areas_per_district,
        months=args.months,
        base_default_rate=args.base_default_rate,
        area_shock_strength=args.area_shock_strength,
        product_shock_strength=args.product_shock_strength,
        seed=args.seed,
    )
    records = generate_loans(config)
    write_loans_csv(records, args.out)
    defaults = sum(r.defaulted for r in records)
    print(f"wrote {len(records)} loans ({defaults} defaulted) to {args.out}")
    return 0


def _window_from_args(args: argparse.Namespace) -> WindowSpec:
    return WindowSpec(
        parse_month(args.window_start), args.window_months, args.tail_months
    )


def _cmd_build(args: argparse.Namespace) -> int:
    records = load_loans(args.loans)
    window = _window_from_args(args)
    net = build_window_network(records, window)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for layer in net.layers:
        write_layer_csv(layer, out_dir / f"{layer.name}.csv")
    sources = sorted(defaulter_set(records, window))
    (out_dir / "defaulters.txt").write_text(
        "".join(f"{s}\n" for s in sources), encoding="utf-8"
    )
    print(f"window {format_month(window.start)}: N={net.n_nodes} L={net.n_layers}")
    for layer in net.layers:
        print(f"edges[{layer.name}]: {len(layer.edges)}")
    print(f"defaulters: {len(sources)}")
    print(f"layer files in {out_dir}")
    return 0


def _parse_layer_args(specs: list[str]) -> list[Layer]:
    layers = []
    for spec in specs:
        if "=" not in spec:
            raise ValidationError(f"--layer expects NAME=PATH, got {spec!r}")
        name, path = spec.split("=", 1)
        if not name or not path:
            raise ValidationError(f"--layer expects NAME=PATH, got {spec!r}")
        layers.append(read_layer_csv(path, name))
    return layers


def _cmd_rank(args: argparse.Namespace) -> int:
    net = build_network(_parse_layer_args(args.layer), args.stickiness)
    transition = supra_transition(supra_adjacency(net))
    if args.scenario == "standard":
        result = multilayer_pagerank(
            transition, r=args.r, tol=args.tol, max_iter=args.max_iter
        )
    else:
        if not args.sources:
            raise ValidationError(f"scenario '{args.scenario}' needs --sources")
        text = Path(args.sources).read_text(encoding="utf-8")
        sources = frozenset(line.strip() for line in text.splitlines() if line.strip())
        spec = InfluenceSpec(sources, args.scenario, args.restart_mode)
        influence = build_influence_matrix(net, spec)
        result = personalized_pagerank(
            transition,
            influence,
            r=args.r,
            tol=args.tol,
            max_iter=args.max_iter,
            mode=args.restart_mode,
        )
    node_path = f"{args.out_prefix}_nodes.csv"
    state_path = f"{args.out_prefix}_states.csv"
    write_node_scores(result, node_path)
    write_state_scores(result, state_path)
    status = "converged" if result.converged else "NOT converged"
    print(
        f"{status} after {result.iterations} iterations "
        f"(residual {result.residual:.3e})"
    )
    print(f"scores in {node_path} and {state_path}")
    return 0


def _pipeline_config(args: argparse.Namespace) -> pl.PipelineConfig:
    config = pl.PipelineConfig()
    if args.config:
        config = pl.load_config_file(args.config, config)
    overrides: dict[str, str] = {}
    for key, value in (
        ("window_months", args.window_months),
        ("tail_months", args.tail_months),
        ("r", args.r),
        ("stickiness", args.stickiness),
        ("restart_mode", args.restart_mode),
        ("tol", args.tol),
        ("max_iter", args.max_iter),
        ("scenarios", args.scenarios),
        ("threads", args.threads),
        ("out", args.out),
    ):
        if value is not None:
            overrides[key] = str(value)
    if args.no_flat:
        overrides["flat_baseline"] = "false"
    config = pl.config_from_mapping(overrides, config)
    if config.out is None:
        raise ValidationError("no output path: pass --out or set 'out' in the config")
    return config


def _cmd_features(args: argparse.Namespace) -> int:
    records = load_loans(args.loans)
    window = _window_from_args(args)
    base = pl.PipelineConfig(
        window_months=window.length_months, tail_months=window.scoring_tail_months
    )
    overrides: dict[str, str] = {}
    for key, value in (
        ("r", args.r),
        ("stickiness", args.stickiness),
        ("restart_mode", args.restart_mode),
        ("tol", args.tol),
        ("max_iter", args.max_iter),
        ("scenarios", args.scenarios),
    ):
        if value is not None:
            overrides[key] = str(value)
    if args.no_flat:
        overrides["flat_baseline"] = "false"
    config = pl.config_from_mapping(overrides, base)
    rows, stats = pl.window_feature_rows(records, window, config)
    pl.write_feature_table(rows, args.out, include_aggregate=config.flat_baseline)
    print(
        f"window {format_month(window.start)}: {len(rows)} rows "
        f"({stats.n_sources} defaulters) -> {args.out}"
    )
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    records = load_loans(args.loans)
    config = _pipeline_config(args)
    run = pl.run_rolling(records, config)
    pl.write_feature_table(run.rows, config.out, include_aggregate=config.flat_baseline)
    ranked = [s.rank_seconds for s in run.stats if s.rank_seconds > 0]
    slowest = max(ranked) if ranked else 0.0
    print(
        f"windows: {len(run.stats)}  rows: {len(run.rows)}  "
        f"slowest rank stage: {slowest:.2f}s  output: {config.out}"
    )
    return 0


def _parse_grid(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"{flag} expects comma separated numbers, got {text!r}") from None
    if not values:
        raise ValidationError(f"{flag} is empty")
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    records = load_loans(args.loans)
    config = _pipeline_config(args)
    r_grid = _parse_grid(args.r_grid, "--r-grid")
    s_grid = _parse_grid(args.s_grid, "--s-grid")
    entries = pl.tune_sweep(records, r_grid, s_grid, config)
    pl.write_sweep_table(entries, config.out)
    print(
        f"swept {len(r_grid)} x {len(s_grid)} grid points, "
        f"{len(entries)} rows -> {config.out}"
    )
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    if args.layer:
        net = build_network(_parse_layer_args(args.layer), args.stickiness)
    elif args.loans:
        if not args.window_start:
            raise ValidationError("inspect with --loans needs --window-start")
        records = load_loans(args.loans)
        window = WindowSpec(
            parse_month(args.window_start), args.window_months, args.tail_months
        )
        net = build_window_network(records, window, args.stickiness)
    else:
        raise ValidationError("inspect needs either --layer or --loans")
    print(f"N: {net.n_nodes}")
    print(f"L: {net.n_layers}")
    print(f"common nodes: {len(net.common_ids)}")
    for layer in net.layers:
        print(f"edges[{layer.name}]: {len(layer.edges)}")
    print(f"stickiness: {net.stickiness:g}")
    print(f"largest_component_fraction: {largest_component_fraction(net):.6g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MultirankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
