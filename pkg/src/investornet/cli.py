"""Command-line interface: ``analyze``, ``synth``, ``selftest``, ``export-trees``.

Exit codes are stable API: 0 success, 1 configuration error, 2 data error,
3 selftest failure.  Errors are reported as one JSON object per line on
stderr.  Option precedence is CLI flags over config file over built-in
defaults; the log level can also come from the ``INVESTORNET_LOG``
environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, DataError
from .exports import (
    NetworkDumpWriter,
    write_metrics_csv,
    write_metrics_json,
    write_nodes_csv,
    write_price_csv,
    write_trees_csv,
)
from .ingest import (
    DEFAULT_CATEGORY_MAPPING,
    daily_price_series,
    load_category_mapping,
    parse_transactions,
)
from .metrics import CATEGORY_ORDER, PipelineResult, run_pipeline
from .oracles import run_selftest
from .synth import (
    SynthConfig,
    generate_market,
    load_preset,
    write_price,
    write_transactions_csv,
)
from .windows import WindowSpec

log = logging.getLogger("investornet.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_SELFTEST = 3

_LOG_LEVELS = ("debug", "info", "warning", "error")

_ANALYZE_DEFAULTS = {
    "input": None,
    "output_dir": ".",
    "format": "csv",
    "window_days": 126,
    "step_days": 21,
    "min_active_days": 20,
    "smooth_days": 5,
    "category_mapping": None,
    "lenient": False,
    "export_trees": False,
    "export_networks": False,
    "export_nodes": False,
    "export_price": False,
    "jobs": None,
    "log_level": None,
}


def _emit_error(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors use the config exit code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        _emit_error("config", message)
        raise SystemExit(EXIT_CONFIG)


def _configure_logging(level_name: str | None) -> None:
    name = level_name or os.environ.get("INVESTORNET_LOG") or "warning"
    level = getattr(logging, name.upper(), None)
    if not isinstance(level, int):
        raise ConfigError(
            f"unknown log level {name!r}; choose from {', '.join(_LOG_LEVELS)}"
        )
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(raw) - set(_ANALYZE_DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config file keys: {', '.join(unknown)}")
    return raw


def _layered(args: argparse.Namespace) -> dict:
    """Merge flag values over config-file values over defaults."""
    config = _load_config_file(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key, default in _ANALYZE_DEFAULTS.items():
        flag = getattr(args, key, None)
        merged[key] = flag if flag is not None else config.get(key, default)
    return merged


def _resolve_jobs(jobs: object) -> int:
    if jobs is None:
        return os.cpu_count() or 1
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError(f"--jobs must be a positive integer; got {jobs!r}")
    return jobs


def _read_records(path: object, lenient: bool):
    if not path:
        raise ConfigError("an input transactions file is required (--input)")
    p = Path(str(path))
    if not p.exists():
        raise DataError(f"input file not found: {p}")
    result = parse_transactions(p, lenient=bool(lenient))
    if result.errors:
        log.warning("dropped %d malformed row(s)", result.dropped_rows)
    return result.records


def _run(settings: dict, *, collect_trees: bool, collect_nodes: bool,
         network_sink=None) -> tuple[PipelineResult, list]:
    spec = WindowSpec(
        width_days=int(settings["window_days"]),
        step_days=int(settings["step_days"]),
        min_active_days=int(settings["min_active_days"]),
        smooth_days=int(settings["smooth_days"]),
    )
    mapping = (
        load_category_mapping(settings["category_mapping"])
        if settings["category_mapping"]
        else DEFAULT_CATEGORY_MAPPING
    )
    records = _read_records(settings["input"], settings["lenient"])
    result = run_pipeline(
        records,
        spec,
        mapping,
        jobs=_resolve_jobs(settings["jobs"]),
        collect_trees=collect_trees,
        collect_nodes=collect_nodes,
        network_sink=network_sink,
    )
    return result, records


def _summary_lines(result: PipelineResult) -> list[str]:
    rows_by_cat: dict[str, list] = {cat: [] for cat in CATEGORY_ORDER}
    for row in result.rows:
        rows_by_cat[row.category].append(row)
    lines = []
    for cat in CATEGORY_ORDER:
        rows = rows_by_cat[cat]
        mean_active = sum(r.n_active for r in rows) / len(rows) if rows else 0.0
        lmin = [r.l_min for r in rows if r.l_min is not None]
        lmax = [r.l_max for r in rows if r.l_max is not None]
        span = (
            f"l_min [{min(lmin):.4f}, {max(lmin):.4f}] "
            f"l_max [{min(lmax):.4f}, {max(lmax):.4f}]"
            if lmin and lmax
            else "no non-degenerate windows"
        )
        lines.append(
            f"{cat}: {len(rows)} windows, mean n_active {mean_active:.1f}, {span}"
        )
    return lines


def cmd_analyze(args: argparse.Namespace) -> int:
    settings = _layered(args)
    out_dir = Path(str(settings["output_dir"]))
    out_dir.mkdir(parents=True, exist_ok=True)

    writer = None
    try:
        if settings["export_networks"]:
            writer = NetworkDumpWriter(out_dir / "networks.csv")
            sink = writer.write_network
        else:
            sink = None
        result, records = _run(
            settings,
            collect_trees=bool(settings["export_trees"]),
            collect_nodes=bool(settings["export_nodes"]),
            network_sink=sink,
        )
        if writer is not None:
            writer.close()
            writer = None
    except BaseException:
        if writer is not None:
            writer.abort()
        raise

    if settings["format"] == "json":
        write_metrics_json(result.rows, out_dir / "metrics.json")
    elif settings["format"] == "csv":
        write_metrics_csv(result.rows, out_dir / "metrics.csv")
    else:
        raise ConfigError(f"unknown format {settings['format']!r} (csv or json)")
    if settings["export_trees"]:
        write_trees_csv(result.tree_rows, out_dir / "trees.csv")
    if settings["export_nodes"]:
        write_nodes_csv(result.node_rows, out_dir / "nodes.csv")
    if settings["export_price"]:
        days, prices = daily_price_series(records)
        write_price_csv(days, prices, out_dir / "price.csv")

    for line in _summary_lines(result):
        print(line)
    return EXIT_OK


def cmd_export_trees(args: argparse.Namespace) -> int:
    settings = _layered(args)
    result, _ = _run(settings, collect_trees=True, collect_nodes=True)
    write_trees_csv(result.tree_rows, args.out_trees)
    write_nodes_csv(result.node_rows, args.out_nodes)
    print(
        f"wrote {len(result.tree_rows)} tree edges and "
        f"{len(result.node_rows)} node rows over {len(result.windows)} windows"
    )
    return EXIT_OK


_SYNTH_OVERRIDES = (
    ("households", "n_households"),
    ("nfi", "n_nfi"),
    ("fi", "n_fi"),
    ("days", "n_days"),
    ("tipping_day", "tipping_day"),
    ("herding_ramp", "herding_ramp"),
    ("contrarian_fraction", "contrarian_fraction"),
    ("contrarian_onset_day", "contrarian_onset_day"),
    ("trade_probability", "trade_probability"),
    ("noise_scale", "noise_scale"),
    ("volume_scale", "volume_scale"),
    ("seed", "seed"),
)


def cmd_synth(args: argparse.Namespace) -> int:
    base = load_preset(args.preset) if args.preset else {}
    for flag_dest, field in _SYNTH_OVERRIDES:
        value = getattr(args, flag_dest)
        if value is not None:
            base[field] = value
    if base.get("seed") is None:
        raise ConfigError("--seed is required (no wall-clock defaults)")
    config = SynthConfig.from_dict(base)
    market = generate_market(config)
    write_transactions_csv(market.records, args.out_transactions)
    if args.out_price:
        write_price(market.price, args.out_price)
    print(
        f"wrote {len(market.records)} records for {config.n_investors} investors "
        f"over {config.n_days} days to {args.out_transactions}"
    )
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    if args.iterations < 1:
        raise ConfigError("--iterations must be >= 1")
    report = run_selftest(args.iterations, inject_fault=args.inject_fault)
    print(f"selftest: {report.passed} passed, {report.failed} failed")
    for failure in report.failures:
        print(f"  FAIL {failure}")
    if not report.ok:
        _emit_error("selftest", f"{report.failed} oracle case(s) failed")
        return EXIT_SELFTEST
    return EXIT_OK


def _add_window_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-days", type=int, help="window width in trading days (default 126)")
    p.add_argument("--step-days", type=int, help="window displacement in trading days (default 21)")
    p.add_argument("--min-active-days", type=int,
                   help="trading days required inside a window to count as active (default 20)")
    p.add_argument("--smooth-days", type=int,
                   help="trailing moving-average width for net volumes (default 5)")


def _add_common_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="transactions CSV to analyze")
    p.add_argument("--category-mapping",
                   help="JSON file mapping sector codes to HH/NFI/FI")
    p.add_argument("--lenient", action="store_true", default=None,
                   help="drop malformed rows instead of aborting")
    p.add_argument("--jobs", type=int, help="worker threads (default: all cores)")
    p.add_argument("--config", help="JSON config file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="investornet",
                     description="Rolling-window investor correlation networks "
                                 "and spanning-tree metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the full pipeline on a transactions CSV")
    _add_common_input_flags(pa)
    _add_window_flags(pa)
    pa.add_argument("--output-dir", help="directory for metrics and exports (default .)")
    pa.add_argument("--format", choices=("csv", "json"), help="metrics format (default csv)")
    pa.add_argument("--export-trees", action="store_true", default=None,
                    help="also write trees.csv (spanning-tree edges)")
    pa.add_argument("--export-nodes", action="store_true", default=None,
                    help="also write nodes.csv (per-window node volumes)")
    pa.add_argument("--export-networks", action="store_true", default=None,
                    help="also write networks.csv (full edge lists; large)")
    pa.add_argument("--export-price", action="store_true", default=None,
                    help="also write price.csv (daily volume-weighted price)")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("synth", help="generate a synthetic market")
    ps.add_argument("--preset", help="preset name (e.g. dotcom) or JSON file path")
    ps.add_argument("--seed", type=int, help="RNG seed (required)")
    ps.add_argument("--out-transactions", default="transactions.csv",
                    help="output transactions CSV (default transactions.csv)")
    ps.add_argument("--out-price", help="optional output price CSV")
    ps.add_argument("--households", dest="households", type=int,
                    help="number of household investors")
    ps.add_argument("--nfi", type=int, help="number of non-financial institutions")
    ps.add_argument("--fi", type=int, help="number of financial institutions")
    ps.add_argument("--days", type=int, help="number of trading days")
    ps.add_argument("--tipping-day", type=int, help="day index of the price peak")
    ps.add_argument("--herding-ramp", type=float,
                    help="per-day loading increment for households before the tipping day")
    ps.add_argument("--contrarian-fraction", type=float,
                    help="fraction of households that flip loading sign")
    ps.add_argument("--contrarian-onset-day", type=int,
                    help="day index at which contrarians flip")
    ps.add_argument("--trade-probability", type=float,
                    help="per investor-day probability of trading")
    ps.add_argument("--noise-scale", type=float, help="idiosyncratic noise scale")
    ps.add_argument("--volume-scale", type=float, help="share-volume scale factor")
    ps.set_defaults(func=cmd_synth)

    pt = sub.add_parser("selftest", help="run embedded oracle checks")
    pt.add_argument("--iterations", type=int, default=1000,
                    help="randomized cases per oracle suite (default 1000)")
    pt.add_argument("--inject-fault", action="store_true",
                    help="internal: force one failure to verify the failure path")
    pt.set_defaults(func=cmd_selftest)

    pe = sub.add_parser("export-trees", help="run the pipeline and export only trees")
    _add_common_input_flags(pe)
    _add_window_flags(pe)
    pe.add_argument("--out-trees", default="trees.csv",
                    help="output tree-edge CSV (default trees.csv)")
    pe.add_argument("--out-nodes", default="nodes.csv",
                    help="output node-table CSV (default nodes.csv)")
    pe.set_defaults(func=cmd_export_trees)

    for p in (pa, ps, pt, pe):
        p.add_argument("--log-level", choices=_LOG_LEVELS,
                       help="log verbosity (also INVESTORNET_LOG)")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        level = getattr(args, "log_level", None)
        if level is None and getattr(args, "config", None):
            level = _load_config_file(args.config).get("log_level")
        _configure_logging(level)
        return args.func(args)
    except ConfigError as exc:
        _emit_error("config", str(exc))
        return EXIT_CONFIG
    except DataError as exc:
        _emit_error("data", str(exc))
        return EXIT_DATA
    except OSError as exc:
        _emit_error("data", str(exc))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
