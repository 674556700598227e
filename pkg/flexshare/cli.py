from __future__ import annotations

import argparse
import asyncio
import csv
import io
import itertools
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import orjson
from termcolor import colored
from tqdm import tqdm

from flexshare.analysis import competitive_report, oracle_enumerate
from flexshare.config import FlexShareSettings
from flexshare.engine import RunReport, Strategy, run_strategy
from flexshare.errors import AnalysisError, FlexShareError
from flexshare.scenario import ScenarioFile, resolve_scenario
from flexshare.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2

DEFAULT_MULTIPLIERS = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0)
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

SWEEP_COLUMNS = (
    "strategy",
    "multiplier",
    "seed",
    "feasible",
    "rejected",
    "total_cost",
    "services_per_instance",
    "used_capability",
    "max_active_capability",
    "active_vms",
    "instances_per_vnf",
    "wall_clock",
)


def _strategy(value: str) -> Strategy:
    try:
        return Strategy(value.strip().lower().replace("-", "_"))
    except ValueError as exc:
        choices = ", ".join(s.value for s in Strategy)
        raise argparse.ArgumentTypeError(f"unknown strategy '{value}' (choose from {choices})") from exc


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return number


def _settings(args: argparse.Namespace) -> FlexShareSettings:
    manager = ConfigManager(config_path=args.config) if args.config else None
    settings = FlexShareSettings.load(manager)
    if getattr(args, "workers", None):
        settings.engine.workers = args.workers
    return settings


def _emit(payload: bytes, output: Optional[str]) -> None:
    if output:
        Path(output).write_bytes(payload)
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(payload.decode("utf-8"))
        if not payload.endswith(b"\n"):
            sys.stdout.write("\n")


def _summary(report: RunReport) -> str:
    status = colored("feasible", "green") if report.feasible else colored(f"rejected {report.rejected}", "red")
    figures = report.metrics
    return (
        f"{report.strategy.value} n={report.multiplier:g}: {status}, cost {figures.total_cost:.6g}, "
        f"{figures.active_vms} VMs, {figures.services_per_instance:.3g} services/instance"
    )


def oracle_section(scenario: ScenarioFile, report: RunReport, settings: FlexShareSettings) -> Dict[str, Any]:
    """Oracle optimum and per-VNF bound checks for a finished run."""
    result = oracle_enumerate(
        scenario.vnfs,
        scenario.vm_specs(report.seed),
        scenario.requests(report.multiplier),
        settings,
    )
    section: Dict[str, Any] = {
        "cost": result.cost if result.feasible else None,
        "candidates": result.candidates,
        "instances_per_vnf": result.instances_per_vnf(),
    }
    try:
        section["bounds"] = [row.as_dict() for row in competitive_report(report.deployment, result.instances_per_vnf())]
    except AnalysisError as exc:
        logger.warning("Competitive bounds skipped: %s", exc.message)
        section["bounds"] = None
    return section


async def handle_run(args: argparse.Namespace) -> int:
    settings = _settings(args)
    scenario = resolve_scenario(args.scenario)
    report = await asyncio.to_thread(run_strategy, scenario, args.strategy, settings, args.multiplier, args.seed)
    document = report.to_dict()
    if args.oracle:
        try:
            document["oracle"] = await asyncio.to_thread(oracle_section, scenario, report, settings)
        except AnalysisError as exc:
            logger.warning("Oracle comparison skipped: %s", exc.message)
            document["oracle"] = None
    _emit(orjson.dumps(document, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS), args.output)
    print(_summary(report), file=sys.stderr)
    return EXIT_OK if report.feasible else EXIT_REJECTED


def sweep_row(report: RunReport, wall_clock: float) -> Dict[str, Any]:
    figures = report.metrics
    return {
        "strategy": report.strategy.value,
        "multiplier": report.multiplier,
        "seed": "" if report.seed is None else report.seed,
        "feasible": report.feasible,
        "rejected": len(report.rejected),
        "total_cost": figures.total_cost,
        "services_per_instance": figures.services_per_instance,
        "used_capability": figures.used_capability,
        "max_active_capability": figures.max_active_capability,
        "active_vms": figures.active_vms,
        "instances_per_vnf": ";".join(f"{v}:{n}" for v, n in figures.instances_per_vnf.items()),
        "wall_clock": round(wall_clock, 6),
    }


def format_csv(rows: Sequence[Dict[str, Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


async def run_sweep(
    scenario: ScenarioFile,
    strategies: Sequence[Strategy],
    multipliers: Sequence[float],
    seeds: Sequence[Optional[int]],
    settings: FlexShareSettings,
    progress: bool = True,
) -> List[Dict[str, Any]]:
    """Every (strategy, multiplier, seed) cell, rows in that order."""
    cells = list(itertools.product(strategies, multipliers, seeds))
    semaphore = asyncio.Semaphore(max(1, settings.engine.workers))
    bar = tqdm(total=len(cells), desc=scenario.name, unit="run", disable=not progress)

    def run_cell(strategy: Strategy, multiplier: float, seed: Optional[int]) -> Dict[str, Any]:
        started = time.perf_counter()
        report = run_strategy(scenario, strategy, settings, multiplier, seed)
        return sweep_row(report, time.perf_counter() - started)

    async def bounded(cell) -> Dict[str, Any]:
        async with semaphore:
            row = await asyncio.to_thread(run_cell, *cell)
        bar.update(1)
        logger.info("Finished %s n=%g seed=%s", row["strategy"], row["multiplier"], row["seed"])
        return row

    try:
        return list(await asyncio.gather(*(bounded(cell) for cell in cells)))
    finally:
        bar.close()


async def handle_sweep(args: argparse.Namespace) -> int:
    settings = _settings(args)
    scenario = resolve_scenario(args.scenario)
    seeds: List[Optional[int]] = list(args.seeds) if args.seeds else [None]
    rows = await run_sweep(
        scenario,
        args.strategies or list(Strategy),
        args.multipliers or list(DEFAULT_MULTIPLIERS),
        seeds,
        settings,
        progress=not args.quiet,
    )
    _emit(format_csv(rows), args.output)
    rejected = [row for row in rows if not row["feasible"]]
    color = "yellow" if rejected else "green"
    print(colored(f"{len(rows)} runs, {len(rejected)} with rejected services", color), file=sys.stderr)
    return EXIT_REJECTED if rejected and not args.allow_rejections else EXIT_OK


COMMAND_HANDLERS = {
    "run": handle_run,
    "sweep": handle_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="FlexShare VNF sharing, priority and scaling simulator")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common_arguments(sub):
        sub.add_argument("scenario", help="Scenario TOML file or bundled scenario name")
        sub.add_argument("--config", help="JSON configuration file with a 'flexshare' section")
        sub.add_argument("--output", "-o", help="Write results to this file instead of stdout")
        verbosity = sub.add_mutually_exclusive_group()
        verbosity.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
        verbosity.add_argument("--quiet", "-q", action="store_true", help="Warnings only, no progress bar")

    run_parser = subparsers.add_parser("run", help="Deploy a scenario under one strategy and print a JSON report")
    add_common_arguments(run_parser)
    run_parser.add_argument("--strategy", "-s", type=_strategy, default=Strategy.PER_VNF_FLEXSHARE)
    run_parser.add_argument("--multiplier", "-n", type=_positive_float, help="Traffic multiplier")
    run_parser.add_argument("--seed", type=int, help="Seed for generated VM capabilities")
    run_parser.add_argument("--oracle", action="store_true", help="Compare against the exhaustive oracle")

    sweep_parser = subparsers.add_parser("sweep", help="Run strategies over multipliers and seeds into a CSV table")
    add_common_arguments(sweep_parser)
    sweep_parser.add_argument("--strategies", nargs="+", type=_strategy, help="Strategies (default: all)")
    sweep_parser.add_argument("--multipliers", nargs="+", type=_positive_float, help="Traffic multipliers")
    sweep_parser.add_argument("--seeds", nargs="+", type=int, help="Seeds for generated VM capabilities")
    sweep_parser.add_argument("--workers", type=int, help="Concurrent runs")
    sweep_parser.add_argument(
        "--allow-rejections",
        action="store_true",
        help="Exit with status 0 even when some runs reject a service",
    )

    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


async def main_async(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    handler = COMMAND_HANDLERS[args.command]
    try:
        return await handler(args)
    except FlexShareError as exc:
        print(colored(f"error: {exc.message}", "red"), file=sys.stderr)
        return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    return asyncio.run(main_async(argv))


if __name__ == "__main__":
    sys.exit(main())
