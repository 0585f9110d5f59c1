"""``channel info`` subcommand."""

import logging

from ..models.specs import RunConfig
from ..services import measures, qobj
from .common import EXIT_OK, add_channel_arguments, add_output_arguments, emit, single_channel

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("channel", help="inspect a channel")
    actions = parser.add_subparsers(dest="measure", required=True)
    info = actions.add_parser("info", help="dimensions, CPTP residual, class verdicts, LR and LR_Delta")
    add_channel_arguments(info)
    add_output_arguments(info)
    info.set_defaults(handler=run_info)


def run_info(config: RunConfig) -> int:
    n = single_channel(config)
    positivity, marginal = qobj.cptp_residual(n.choi, n.din, n.dout)
    verdicts = qobj.class_verdicts(n)
    lr = measures.lr_channel(n).value
    lr_dephasing = max(measures.lr_dephasing(n), 0.0)
    payload = {
        "label": n.label,
        "din": n.din,
        "dout": n.dout,
        "cptp_residual": {"positivity": positivity, "marginal": marginal},
        "classes": verdicts,
        "lr": lr,
        "lr_dephasing": lr_dephasing,
    }

    lines = [f"channel: {n.label or '-'} ({n.din} -> {n.dout})"]
    lines.append(f"cptp residual: positivity {positivity:.3e}, marginal {marginal:.3e}")
    for verdict in verdicts:
        lines.append(f"{verdict.channel_class}: {'yes' if verdict.passed else 'no'} (residual {verdict.residual:.3e})")
    lines.append(f"LR: {lr:.9g}")
    lines.append(f"LR_Delta: {lr_dephasing:.9g}")
    emit(payload, config, text="\n".join(lines) + "\n")
    return EXIT_OK
