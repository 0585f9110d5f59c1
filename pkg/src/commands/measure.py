"""``measure`` subcommands: log-robustness, robustness, D_max, diamond, hypothesis tests."""

import logging

from ..models.reports import MeasureResult
from ..models.specs import RunConfig
from ..services import matcore as mc
from ..services import measures
from .common import EXIT_OK, add_channel_arguments, add_output_arguments, channel_pair, emit, rng_for, single_channel

logger = logging.getLogger(__name__)

MEASURES = ["lr", "lrdelta", "cr", "dmax", "diamond", "htest", "ch"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("measure", help="evaluate a coherence measure or divergence")
    parser.add_argument("measure", choices=MEASURES)
    add_channel_arguments(parser)
    parser.add_argument("--a", dest="channel_a", default=None, help="first channel (spec file or builder)")
    parser.add_argument("--b", dest="channel_b", default=None, help="second channel (spec file or builder)")
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--class", dest="channel_class", default="MISC", help="MISC or DISC (for 'ch')")
    add_output_arguments(parser)
    parser.set_defaults(handler=run)


def _lr(config: RunConfig) -> MeasureResult:
    n = single_channel(config)
    if config.eps:
        return measures.lr_smoothed(n, config.eps)
    return measures.lr_channel(n)


def _lrdelta(config: RunConfig) -> MeasureResult:
    n = single_channel(config)
    if config.eps:
        return measures.lr_dephasing_smoothed(n, config.eps)
    return MeasureResult(name="lr_dephasing", value=max(measures.lr_dephasing(n), 0.0))


def _cr(config: RunConfig) -> MeasureResult:
    lr = measures.lr_channel(single_channel(config))
    return MeasureResult(
        name="cr_channel",
        value=2.0**lr.value - 1.0,
        witnesses=lr.witnesses,
        reports=lr.reports,
        extras={"lr": lr.value},
    )


def _dmax(config: RunConfig) -> MeasureResult:
    n, m = channel_pair(config)
    value = measures.dmax_channel(n, m)
    return MeasureResult(name="dmax_channel", value=value, infinite=value == float("inf"))


def _diamond(config: RunConfig) -> MeasureResult:
    n, m = channel_pair(config)
    return MeasureResult(
        name="diamond_distance",
        value=measures.diamond_distance(n, m),
        extras={"choi_bound": measures.choi_diamond_bound(n, m)},
    )


def _htest(config: RunConfig) -> MeasureResult:
    """Hypothesis test between the Choi states of two channels."""
    n, m = channel_pair(config)
    return measures.htest_state(mc.hermitian_part(n.choi), mc.hermitian_part(m.choi), config.eps or 0.0)


def _ch(config: RunConfig) -> MeasureResult:
    n = single_channel(config)
    eps = config.eps or 0.0
    if config.channel_class == "DISC":
        return measures.ch_dephasing_lb(n, eps, rng=rng_for(config))
    return measures.ch_coherence_lb(n, eps, rng=rng_for(config))


HANDLERS = {
    "lr": _lr,
    "lrdelta": _lrdelta,
    "cr": _cr,
    "dmax": _dmax,
    "diamond": _diamond,
    "htest": _htest,
    "ch": _ch,
}


def run(config: RunConfig) -> int:
    result = HANDLERS[config.measure](config)
    logger.info(f"measure {config.measure}: {result.value:.9g}")
    emit(result, config, text=f"{result.name}: {result.value:.9g}\n")
    return EXIT_OK
