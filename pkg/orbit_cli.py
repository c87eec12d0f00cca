"""
orbitlab - command-line front end

Reproduces the built-in examples by id, runs parameterized experiments from TOML
files, and lists the sequence-id grammar.
"""

import argparse
import asyncio
import logging
import sys
from functools import partial
from pathlib import Path
from typing import Awaitable, Callable, Dict, List, Optional

from orbitlab.config import config, ConfigError
from orbitlab.mapfab import SEQUENCE_GRAMMAR
from orbitlab.models import ReproductionReport, RunConfig
from orbitlab.services.reproductions import REPRODUCTIONS, reproduce, run_configured
from orbitlab.utils.error_handler import (
    EXIT_ASSERTION,
    EXIT_OK,
    EXIT_USAGE,
    ValidationError,
    error_handler,
)

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """argparse reports usage errors by raising instead of exiting."""

    def error(self, message: str):
        raise ValidationError(f"Usage error: {message}", f"{message}\n{self.format_usage().strip()}")


class OrbitLabCLI:
    """
    Command dispatcher for orbitlab.
    Each subcommand handler returns the process exit status.
    """

    def __init__(self) -> None:
        self.parser = _ArgumentParser(
            prog="orbitlab",
            description="Boundary orbits of forward compositions of holomorphic self-maps",
        )
        self.subparsers = self.parser.add_subparsers(dest="command", metavar="command")
        self.handlers: Dict[str, Callable[[argparse.Namespace], Awaitable[int]]] = {}
        self._add_commands()

    def _add_commands(self) -> None:
        """Register the subcommands."""

        reproduce_parser = self.subparsers.add_parser("reproduce", help="Run a built-in reproduction by id")
        reproduce_parser.add_argument("example_id", help="One of the ids printed by `list`")
        reproduce_parser.add_argument("--quick", action="store_true", help="Scaled-down sample counts")
        reproduce_parser.add_argument("--seed", type=int, default=None)
        reproduce_parser.add_argument("--workers", type=int, default=None)
        reproduce_parser.add_argument("--out-dir", default=None)

        async def reproduce_command(args: argparse.Namespace) -> int:
            loop = asyncio.get_running_loop()
            report: ReproductionReport = await loop.run_in_executor(
                None,
                partial(
                    reproduce,
                    args.example_id,
                    Path(args.out_dir) if args.out_dir else None,
                    args.seed,
                    args.workers,
                    args.quick,
                ),
            )
            for check in report.checks:
                detail = f"  ({check.detail})" if check.detail else ""
                print(f"[{check.status}] {check.name}{detail}")
            for plot in report.plots:
                print(f"plot: {plot}")
            inconclusive = len(report.inconclusive_checks)
            if report.passed:
                total = len(report.checks)
                suffix = f", {inconclusive} inconclusive" if inconclusive else ""
                print(f"{args.example_id}: {total - inconclusive} of {total} checks passed{suffix}")
                return EXIT_OK
            failed = len(report.failed_checks)
            print(f"{args.example_id}: {failed} of {len(report.checks)} checks failed", file=sys.stderr)
            return EXIT_ASSERTION

        self.handlers["reproduce"] = reproduce_command

        run_parser = self.subparsers.add_parser("run", help="Run a parameterized experiment from a TOML file")
        run_parser.add_argument("-c", "--config", required=True, help="TOML run configuration")
        run_parser.add_argument("--seed", type=int, default=None)
        run_parser.add_argument("--horizon", type=int, default=None)
        run_parser.add_argument("--samples", type=int, default=None, dest="n_samples")
        run_parser.add_argument("--tol", type=float, default=None)
        run_parser.add_argument("--workers", type=int, default=None)
        run_parser.add_argument("--out-dir", default=None, dest="out_dir")
        run_parser.add_argument("--precision", type=int, default=None)

        async def run_command(args: argparse.Namespace) -> int:
            path = Path(args.config)
            try:
                text = path.read_text()
            except OSError as e:
                raise ValidationError(f"Cannot read {path}: {e}", f"Cannot read config file {path}")
            overrides = {
                key: getattr(args, key)
                for key in ("seed", "horizon", "n_samples", "tol", "workers", "out_dir", "precision")
            }
            run_config = RunConfig.from_toml(text, overrides)
            report = await asyncio.get_running_loop().run_in_executor(None, run_configured, run_config)
            print(report.deterministic_dump())
            if isinstance(report, ReproductionReport) and not report.passed:
                return EXIT_ASSERTION
            return EXIT_OK

        self.handlers["run"] = run_command

        self.subparsers.add_parser("list", help="Print the sequence-id grammar and reproduction ids")

        async def list_command(args: argparse.Namespace) -> int:
            print(SEQUENCE_GRAMMAR)
            print("Reproduction ids:")
            for example_id, (_, description) in REPRODUCTIONS.items():
                print(f"  {example_id:<18} {description}")
            return EXIT_OK

        self.handlers["list"] = list_command

    async def dispatch(self, argv: Optional[List[str]] = None) -> int:
        """Parse ``argv`` and run the selected subcommand."""
        command = "orbitlab"
        try:
            args = self.parser.parse_args(argv)
            if args.command is None:
                self.parser.print_help()
                return EXIT_USAGE
            command = args.command
            return await self.handlers[command](args)
        except Exception as e:
            return error_handler.handle_command_error(command, e)


async def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    try:
        config.validate_config()
    except ConfigError as e:
        print(f"Error: configuration validation failed: {e}", file=sys.stderr)
        return EXIT_USAGE
    config.setup_logging()
    cli = OrbitLabCLI()
    return await cli.dispatch(argv)


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
