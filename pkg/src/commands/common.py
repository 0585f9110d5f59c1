"""Shared plumbing for CLI subcommands: channel sources, output, exit codes."""

import argparse
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..config import settings
from ..errors import CertificateError, SpecError
from ..models.channel import QuantumChannel
from ..models.specs import RunConfig
from ..services import serialization

logger = logging.getLogger(__name__)

EXIT_OK = 0


def add_channel_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("specs", nargs="*", help="channel spec JSON files")
    parser.add_argument(
        "--builder",
        action="append",
        default=[],
        help="named channel, e.g. qft:3, dephasing:2, deterministic:0,0, random:2[:seed]",
    )


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", dest="output_format", choices=["json", "csv", "text"], default=None)
    parser.add_argument("--output", "-o", default=None, help="write the report to this file")
    parser.add_argument("--seed", type=int, default=None)


def run_seed(config: RunConfig) -> int:
    return settings.seed if config.seed is None else config.seed


def rng_for(config: RunConfig) -> np.random.Generator:
    return np.random.default_rng(run_seed(config))


def resolve_channel(source: str, seed: int = 0) -> QuantumChannel:
    """A spec file path, or a builder shorthand when no such file exists."""
    if Path(source).suffix == ".json" or Path(source).exists():
        return serialization.load_channel(source)
    channel = serialization.channel_from_spec(serialization.parse_builder(source, seed=seed))
    if not channel.label:
        channel = QuantumChannel(din=channel.din, dout=channel.dout, choi=channel.choi, label=source)
    return channel


def channels(config: RunConfig) -> list[QuantumChannel]:
    seed = run_seed(config)
    sources = list(config.channel_paths) + list(config.builders)
    return [resolve_channel(source, seed) for source in sources]


def single_channel(config: RunConfig) -> QuantumChannel:
    found = channels(config)
    if len(found) != 1:
        raise SpecError(f"'{config.command}' needs exactly one channel, got {len(found)}")
    return found[0]


def channel_pair(config: RunConfig) -> tuple[QuantumChannel, QuantumChannel]:
    seed = run_seed(config)
    found = channels(config)
    if config.channel_a:
        found.insert(0, resolve_channel(config.channel_a, seed))
    if config.channel_b:
        found.append(resolve_channel(config.channel_b, seed))
    if len(found) != 2:
        raise SpecError(f"'{config.command}' needs two channels (--a/--b or two specs), got {len(found)}")
    return found[0], found[1]


def emit(payload: Any, config: RunConfig, text: Optional[str] = None) -> None:
    """Render ``payload`` in the requested format; print it unless written to a file."""
    fmt = config.output_format
    rendered = text if (text is not None and fmt == "text") else None
    if rendered is not None and config.output:
        serialization.render_text(rendered, config.output)
    elif rendered is None:
        rendered = serialization.render(payload, fmt, config.output)
    if not config.output:
        print(rendered, end="")


def require_certificate(passed: bool, what: str) -> int:
    """Exit code for an emitted report; a failed certificate becomes exit code 3."""
    if not passed:
        raise CertificateError(f"{what}: certificate failed")
    return EXIT_OK
