"""``reproduce`` subcommand: run the seeded reproduction suites."""

import logging

from ..errors import SpecError
from ..models.specs import RunConfig
from ..services import suites
from .common import add_output_arguments, require_certificate, emit, run_seed

logger = logging.getLogger(__name__)


def _dims(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise SpecError(f"--d expects comma-separated integers, got '{text}'") from e


def register(subparsers) -> None:
    parser = subparsers.add_parser("reproduce", help="run a reproduction suite and print a pass/fail table")
    parser.add_argument("target", choices=suites.suite_names())
    parser.add_argument("--d", dest="dims", type=_dims, default=None, help="dimensions, e.g. 2,3")
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--trials", type=int, default=None)
    add_output_arguments(parser)
    parser.set_defaults(handler=run)


def run(config: RunConfig) -> int:
    reports = suites.reproduce(
        config.target,
        dims=config.dims or None,
        eps=config.eps,
        trials=config.trials,
        seed=run_seed(config),
    )
    emit({"suites": reports}, config, text=suites.format_table(reports))
    return require_certificate(all(r.passed for r in reports), f"reproduce {config.target}")
