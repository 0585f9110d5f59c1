"""Command-line entry point for dyncoh."""

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from .commands import register_channel, register_measure, register_protocols, register_reproduce, register_verify
from .config import settings
from .errors import DyncohError, SolverError
from .models.specs import RunConfig

logger = logging.getLogger(__name__)

# Parsed-argument names that are not RunConfig fields
_PARSER_ONLY = {"handler", "specs", "builder"}


class _Parser(argparse.ArgumentParser):
    """Argument errors are input errors: exit code 1, not argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dyncoh", description="Dynamic coherence measures and constructions")
    parser.add_argument("--log-level", default=None, help="override DYNCOH_LOG_LEVEL")
    parser.add_argument("--solver-tol", dest="solver_tol", type=float, default=None)
    parser.add_argument("--solver-max-iter", dest="solver_max_iter", type=int, default=None)
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_measure(subparsers)
    register_protocols(subparsers)
    register_verify(subparsers)
    register_reproduce(subparsers)
    register_channel(subparsers)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k not in _PARSER_ONLY and k != "log_level" and v is not None}
    values["channel_paths"] = list(getattr(args, "specs", None) or [])
    values["builders"] = list(getattr(args, "builder", None) or [])
    values.setdefault("output_format", settings.output_format)
    return RunConfig(**values)


def _apply_overrides(config: RunConfig) -> None:
    if config.solver_tol is not None:
        settings.solver_tol = config.solver_tol
    if config.solver_max_iter is not None:
        settings.solver_max_iter = config.solver_max_iter


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        config = _run_config(args)
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(p) for p in error["loc"])
            logger.error(f"Invalid argument {location}: {error['msg']}")
        return 1

    _apply_overrides(config)
    logger.debug(f"Running {config.command} with {config.model_dump(exclude_none=True)}")
    try:
        return args.handler(config)
    except SolverError as e:
        logger.error(f"Solver failure: {e}")
        if e.report is not None:
            logger.error(f"Solver report: {e.report.model_dump()}")
        return e.exit_code
    except DyncohError as e:
        logger.error(str(e))
        return e.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
