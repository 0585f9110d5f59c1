"""Data models for dyncoh."""

from .channel import QuantumChannel, QuantumState
from .reports import (
    Certificate,
    ChannelClassVerdict,
    Claim,
    MeasureResult,
    ProtocolReport,
    SolveReport,
    SuiteReport,
    SuiteRow,
    SuperchannelVerdict,
)
from .superchannel import LinearAction, MeasurePrepare, PrePost, Superchannel

__all__ = [
    "QuantumChannel",
    "QuantumState",
    "Certificate",
    "ChannelClassVerdict",
    "Claim",
    "MeasureResult",
    "ProtocolReport",
    "SolveReport",
    "SuiteReport",
    "SuiteRow",
    "SuperchannelVerdict",
    "LinearAction",
    "MeasurePrepare",
    "PrePost",
    "Superchannel",
]
