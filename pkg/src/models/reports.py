"""Verdicts, solver reports and protocol reports.

Everything here is serialized into run reports, so matrices are carried as
numpy arrays and emitted as nested ``[re, im]`` pairs.
"""

from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_serializer

from ..config import ADMISSIBILITY_CRITERION


def _encode(value: Any) -> Any:
    from ..services.serialization import to_jsonable

    return to_jsonable(value)


class SolveReport(BaseModel):
    """Outcome of a single conic solve."""

    status: Literal["optimal", "inaccurate", "infeasible", "maxIter"]
    objective: Optional[float] = None
    primal_residual: Optional[float] = None
    dual_residual: Optional[float] = None
    gap: Optional[float] = None
    certified: bool = False
    iterations: int = 0
    solver: str = ""
    solve_time: Optional[float] = Field(default=None, exclude=True)


class ChannelClassVerdict(BaseModel):
    """Membership of a channel in CPTP / classical / MIO / DIO / DI."""

    model_config = ConfigDict(arbitrary_types_allowed=True, populate_by_name=True)

    channel_class: Literal["CPTP", "classical", "MIO", "DIO", "DI"] = Field(alias="class")
    passed: bool = Field(alias="pass")
    residual: float
    tolerance: float
    witness: Optional[Any] = None

    @field_serializer("witness")
    def _serialize_witness(self, witness: Any) -> Any:
        return _encode(witness)


class SuperchannelVerdict(BaseModel):
    """Admissibility or MISC / DISC / delta-MISC membership of a superchannel."""

    model_config = ConfigDict(arbitrary_types_allowed=True, populate_by_name=True)

    prop: Literal["admissible", "MISC", "DISC", "deltaMISC"] = Field(alias="property")
    passed: bool = Field(alias="pass")
    residual: float
    tolerance: float
    delta: Optional[float] = None
    criterion: str = ADMISSIBILITY_CRITERION
    witness: Optional[Any] = None
    detail: str = ""

    @field_serializer("witness")
    def _serialize_witness(self, witness: Any) -> Any:
        return _encode(witness)


class MeasureResult(BaseModel):
    """Value of a divergence or monotone, in bits, with its optimizer."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    value: float
    infinite: bool = False
    lower_bound: bool = False
    witnesses: dict[str, Any] = Field(default_factory=dict)
    reports: list[SolveReport] = Field(default_factory=list)
    extras: dict[str, Any] = Field(default_factory=dict)

    @field_serializer("witnesses", "extras")
    def _serialize_payload(self, payload: dict[str, Any]) -> Any:
        return {key: _encode(value) for key, value in payload.items()}

    def witness(self, key: str) -> np.ndarray:
        return self.witnesses[key]


class Claim(BaseModel):
    """A single checked inequality or identity in a protocol run."""

    name: str
    passed: bool
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    detail: str = ""


class Certificate(BaseModel):
    """Bundle of verdicts and claims re-checkable from the embedded data."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    verdicts: list[SuperchannelVerdict] = Field(default_factory=list)
    channel_verdicts: list[ChannelClassVerdict] = Field(default_factory=list)
    claims: list[Claim] = Field(default_factory=list)
    tolerances: dict[str, float] = Field(default_factory=dict)
    criterion: str = ADMISSIBILITY_CRITERION

    @computed_field
    @property
    def passed(self) -> bool:
        return (
            all(v.passed for v in self.verdicts)
            and all(v.passed for v in self.channel_verdicts)
            and all(c.passed for c in self.claims)
        )


class ProtocolReport(BaseModel):
    """Result of a protocol construction and its certificate."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    protocol: str
    inputs: dict[str, Any] = Field(default_factory=dict)
    rate: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    degenerate: bool = False
    parameters: dict[str, Any] = Field(default_factory=dict)
    measures: list[MeasureResult] = Field(default_factory=list)
    certificate: Certificate = Field(default_factory=Certificate)
    notes: list[str] = Field(default_factory=list)
    superchannel: Optional[Any] = Field(default=None, exclude=True)
    artifacts: dict[str, Any] = Field(default_factory=dict, exclude=True)

    @field_serializer("inputs", "parameters")
    def _serialize_payload(self, payload: dict[str, Any]) -> Any:
        return {key: _encode(value) for key, value in payload.items()}

    @computed_field
    @property
    def passed(self) -> bool:
        return self.certificate.passed

    def claim(self, name: str) -> Claim:
        for claim in self.certificate.claims:
            if claim.name == name:
                return claim
        raise KeyError(name)


class SuiteRow(BaseModel):
    """One checked claim in a reproduction suite."""

    suite: str
    case: str
    claim: str
    passed: bool
    value: Optional[float] = None
    expected: Optional[float] = None
    detail: str = ""


class SuiteReport(BaseModel):
    suite: str
    seed: int
    parameters: dict[str, Any] = Field(default_factory=dict)
    rows: list[SuiteRow] = Field(default_factory=list)
    tolerances: dict[str, float] = Field(default_factory=dict)
    criterion: str = ADMISSIBILITY_CRITERION

    @computed_field
    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @computed_field
    @property
    def summary(self) -> str:
        return f"{sum(row.passed for row in self.rows)}/{len(self.rows)} passed"
