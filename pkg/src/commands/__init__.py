"""CLI subcommands for dyncoh."""

from .channel import register as register_channel
from .measure import register as register_measure
from .protocols import register as register_protocols
from .reproduce import register as register_reproduce
from .verify import register as register_verify

__all__ = ["register_channel", "register_measure", "register_protocols", "register_reproduce", "register_verify"]
