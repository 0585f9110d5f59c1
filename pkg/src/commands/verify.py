"""``verify`` subcommand: certify a superchannel spec."""

import logging

from ..errors import SpecError
from ..models.specs import RunConfig
from ..services import serialization, supermap
from .common import add_output_arguments, require_certificate, emit

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="check admissibility or MISC / DISC / delta-MISC membership")
    parser.add_argument("superchannel_path", help="superchannel spec JSON file")
    parser.add_argument("--property", dest="prop", default="admissible")
    parser.add_argument("--delta", type=float, default=0.0)
    add_output_arguments(parser)
    parser.set_defaults(handler=run)


def run(config: RunConfig) -> int:
    if not config.superchannel_path:
        raise SpecError("verify needs a superchannel spec file")
    theta = serialization.load_superchannel(config.superchannel_path)
    prop = config.prop or "admissible"
    if prop == "admissible":
        verdict = supermap.admissibility_check(theta)
    elif prop == "MISC":
        verdict = supermap.misc_check(theta)
    elif prop == "DISC":
        verdict = supermap.disc_check(theta)
    else:
        verdict = supermap.delta_misc_check(theta, config.delta)

    text = f"{verdict.prop}: {'pass' if verdict.passed else 'FAIL'} (residual {verdict.residual:.3e})\n"
    if verdict.detail:
        text += f"{verdict.detail}\n"
    emit(verdict, config, text=text)
    return require_certificate(verdict.passed, f"verify {prop}")
