"""``cost``, ``distill-bound`` and ``catalytic`` subcommands."""

import argparse
import json
import logging

from ..models.reports import ProtocolReport
from ..models.specs import RunConfig
from ..services import protocols, serialization
from .common import add_channel_arguments, add_output_arguments, require_certificate, emit, rng_for, single_channel

logger = logging.getLogger(__name__)


def _common(parser: argparse.ArgumentParser) -> None:
    add_channel_arguments(parser)
    parser.add_argument("--eps", type=float, default=None)
    add_output_arguments(parser)


def register(subparsers) -> None:
    cost = subparsers.add_parser("cost", help="one-shot cost construction under MISC or DISC")
    _common(cost)
    cost.add_argument("--class", dest="channel_class", default="MISC")
    cost.add_argument("--save-superchannel", dest="save_superchannel", default=None)
    cost.set_defaults(handler=run_cost)

    distill = subparsers.add_parser("distill-bound", help="upper bound on one-shot distillation")
    _common(distill)
    distill.add_argument("--class", dest="channel_class", default="MISC")
    distill.set_defaults(handler=run_distill_bound)

    catalytic = subparsers.add_parser("catalytic", help="catalytic cost construction")
    _common(catalytic)
    catalytic.add_argument("--delta", type=float, required=True)
    catalytic.add_argument("--save-superchannel", dest="save_superchannel", default=None)
    catalytic.set_defaults(handler=run_catalytic)


def _summary(report: ProtocolReport) -> str:
    lines = [f"protocol: {report.protocol}"]
    for key in ("rate", "lower", "upper"):
        value = getattr(report, key)
        if value is not None:
            lines.append(f"{key}: {value:.9g}")
    if report.degenerate:
        lines.append("degenerate: true")
    for verdict in report.certificate.verdicts:
        lines.append(f"{verdict.prop}: {'pass' if verdict.passed else 'FAIL'} (residual {verdict.residual:.3e})")
    for verdict in report.certificate.channel_verdicts:
        lines.append(f"{verdict.channel_class}: {'pass' if verdict.passed else 'FAIL'}")
    for claim in report.certificate.claims:
        lines.append(f"{claim.name}: {'pass' if claim.passed else 'FAIL'}")
    lines.append(f"certificate: {'pass' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _finish(report: ProtocolReport, config: RunConfig) -> int:
    if config.save_superchannel and report.superchannel is not None:
        spec = serialization.superchannel_to_spec(report.superchannel)
        serialization.render_text(json.dumps(serialization.to_jsonable(spec), indent=2, sort_keys=True) + "\n", config.save_superchannel)
    emit(report, config, text=_summary(report))
    return require_certificate(report.passed, report.protocol)


def run_cost(config: RunConfig) -> int:
    report = protocols.one_shot_cost(single_channel(config), config.eps or 0.0, config.channel_class)
    return _finish(report, config)


def run_distill_bound(config: RunConfig) -> int:
    report = protocols.one_shot_distill_bound(
        single_channel(config), config.eps or 0.0, config.channel_class, rng=rng_for(config)
    )
    return _finish(report, config)


def run_catalytic(config: RunConfig) -> int:
    report = protocols.catalytic_cost(single_channel(config), config.eps or 0.0, config.delta)
    return _finish(report, config)
