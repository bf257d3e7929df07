"""Entry-point for ``python -m thz_bench`` (also installed as ``thz-bench``).

Subcommands::

    run           --config PATH          run the experiment a config describes
    sweep-pilots  [--preset fig4]        NMSE vs number of pilots at fixed SNR
    sweep-snr     [--preset fig5]        NMSE vs SNR at fixed number of pilots
    gen-dataset   --out PATH             write simulated training blocks as JSON
    evaluate      --dataset PATH         run the estimators on a saved dataset
    plot          --in CSV --out FILE    plot a results CSV

Experiment subcommands write ``results.csv``, ``summary.csv``, ``nmse.html``
and ``config.json`` to the output directory. Exit status is 0 only when no
record failed; configuration and input errors exit with 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from thz_bench import __version__
from thz_bench.bench import emit_csv, emit_plot, emit_summary, evaluate_trials, parse_csv, run_experiment
from thz_bench.config import LOG_FORMAT, LOG_LEVEL
from thz_bench.datasets import gen_dataset, load_dataset
from thz_bench.errors import ThzBenchError
from thz_bench.experiment import load_experiment_config, parse_override
from thz_bench.models import ExperimentConfig, NmseRecord

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_RECORDS = 1
EXIT_ERROR = 2


def _add_config_flags(parser: argparse.ArgumentParser, preset: str | None = None) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--preset", default=preset, help="preset to start from")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a config field (JSON value; channel.* for the channel section)",
    )
    parser.add_argument("--realizations", type=int, help="number of channel realizations")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int, help="parallel work units")
    parser.add_argument("--out-dir", help="output directory")
    parser.add_argument(
        "--wall-time", action="store_true",
        help="record per-run wall time (CSVs are then no longer byte-reproducible)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thz-bench",
        description="THz MIMO one-bit channel-estimation benchmark",
    )
    parser.add_argument("--version", action="version", version=f"thz_bench v{__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run the experiment described by a config")
    _add_config_flags(run)

    pilots = sub.add_parser("sweep-pilots", help="NMSE vs number of pilots")
    _add_config_flags(pilots, preset="fig4")

    snr = sub.add_parser("sweep-snr", help="NMSE vs SNR")
    _add_config_flags(snr, preset="fig5")

    dataset = sub.add_parser("gen-dataset", help="write simulated training blocks as JSON")
    _add_config_flags(dataset)
    dataset.add_argument("--out", type=Path, help="dataset path (default: <out-dir>/dataset.json)")

    evaluate = sub.add_parser("evaluate", help="run the estimators on a saved dataset")
    evaluate.add_argument("--dataset", type=Path, required=True)
    evaluate.add_argument("--workers", type=int)
    evaluate.add_argument("--out-dir")
    evaluate.add_argument("--wall-time", action="store_true")

    plot = sub.add_parser("plot", help="plot a results CSV")
    plot.add_argument("--in", dest="input", type=Path, required=True)
    plot.add_argument("--out", type=Path, required=True, help=".html, .svg, .pdf or .png")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = dict(parse_override(item) for item in args.overrides)
    for flag in ("realizations", "seed", "workers"):
        value = getattr(args, flag)
        if value is not None:
            overrides[flag] = value
    if args.out_dir is not None:
        overrides["output_dir"] = args.out_dir
    if args.wall_time:
        overrides["record_wall_time"] = True
    return load_experiment_config(args.config, overrides, preset=args.preset)


def _write_outputs(records: list[NmseRecord], config: ExperimentConfig) -> int:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(config.to_dict(), indent=2))

    failed = [r for r in records if r.failed]
    if len(failed) < len(records):
        emit_csv(records, out_dir / "results.csv")
        emit_summary(records, out_dir / "summary.csv")
        emit_plot(records, out_dir / "nmse.html")
    if failed:
        logger.error("%d of %d records failed", len(failed), len(records))
        return EXIT_FAILED_RECORDS
    return EXIT_OK


def _cmd_experiment(args: argparse.Namespace) -> int:
    if args.command == "run" and args.config is None and args.preset is None:
        logger.error("run needs --config or --preset")
        return EXIT_ERROR
    config = _config_from_args(args)
    return _write_outputs(run_experiment(config), config)


def _cmd_gen_dataset(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    gen_dataset(config, args.out or Path(config.output_dir) / "dataset.json")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config, trials = load_dataset(args.dataset)
    changes = {}
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.out_dir is not None:
        changes["output_dir"] = args.out_dir
    if args.wall_time:
        changes["record_wall_time"] = True
    config = replace(config, **changes)
    return _write_outputs(evaluate_trials(trials, config), config)


def _cmd_plot(args: argparse.Namespace) -> int:
    emit_plot(parse_csv(args.input), args.out)
    return EXIT_OK


COMMANDS = {
    "run": _cmd_experiment,
    "sweep-pilots": _cmd_experiment,
    "sweep-snr": _cmd_experiment,
    "gen-dataset": _cmd_gen_dataset,
    "evaluate": _cmd_evaluate,
    "plot": _cmd_plot,
}


def main(argv: list[str] | None = None) -> None:
    """Parse arguments, dispatch the subcommand and exit with its status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format=LOG_FORMAT,
    )

    if args.command is None:
        print(f"thz_bench v{__version__}\n")
        parser.print_help()
        sys.exit(EXIT_OK)

    try:
        status = COMMANDS[args.command](args)
    except ThzBenchError as exc:
        logger.error("%s", exc)
        status = EXIT_ERROR
    sys.exit(status)


if __name__ == "__main__":
    main()
