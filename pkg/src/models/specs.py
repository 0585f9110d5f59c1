"""Input schemas: channel and superchannel specs, and the CLI run configuration."""

from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

# Complex entries arrive either as plain numbers or as [re, im] pairs
MatrixPayload = list[list[Any]]


class ChoiSpec(BaseModel):
    kind: Literal["choi"]
    din: int = Field(ge=1)
    dout: int = Field(ge=1)
    matrix: MatrixPayload
    label: str = ""


class KrausSpec(BaseModel):
    kind: Literal["kraus"]
    din: int = Field(ge=1)
    dout: int = Field(ge=1)
    operators: list[MatrixPayload] = Field(min_length=1)
    label: str = ""


class BuilderSpec(BaseModel):
    """Named construction: qft, dephasing, identity, replacement, deterministic, unitary, random."""

    kind: Literal["builder"]
    name: Literal["qft", "dephasing", "identity", "replacement", "deterministic", "unitary", "random"]
    d: Optional[int] = Field(default=None, ge=1)
    f: Optional[list[int]] = None
    dout: Optional[int] = Field(default=None, ge=1)
    matrix: Optional[MatrixPayload] = None
    seed: int = 0
    unitary: bool = False
    label: str = ""

    @model_validator(mode="after")
    def _check_arguments(self) -> "BuilderSpec":
        if self.name in ("qft", "dephasing", "identity", "replacement", "random") and self.d is None:
            raise ValueError(f"builder '{self.name}' needs field 'd'")
        if self.name == "deterministic" and not self.f:
            raise ValueError("builder 'deterministic' needs field 'f'")
        if self.name == "unitary" and self.matrix is None:
            raise ValueError("builder 'unitary' needs field 'matrix'")
        return self


ChannelSpec = Annotated[Union[ChoiSpec, KrausSpec, BuilderSpec], Field(discriminator="kind")]


class PrePostSpec(BaseModel):
    kind: Literal["prepost"]
    pre: ChannelSpec
    post: ChannelSpec
    denv: int = Field(default=1, ge=1)
    label: str = ""


class BranchSpec(BaseModel):
    affine: float
    coeff: float
    effect: MatrixPayload
    target: ChannelSpec


class MeasurePrepareSpec(BaseModel):
    kind: Literal["measure_prepare"]
    dims: tuple[int, int, int, int]
    branches: list[BranchSpec] = Field(min_length=1)
    label: str = ""


class LinearSpec(BaseModel):
    kind: Literal["linear"]
    dims: tuple[int, int, int, int]
    matrix: MatrixPayload
    label: str = ""


SuperchannelSpec = Annotated[
    Union[PrePostSpec, MeasurePrepareSpec, LinearSpec], Field(discriminator="kind")
]


class RunConfig(BaseModel):
    """Validated arguments of one CLI invocation."""

    command: str
    measure: Optional[str] = None
    target: Optional[str] = None
    channel_paths: list[str] = Field(default_factory=list)
    builders: list[str] = Field(default_factory=list)
    channel_a: Optional[str] = None
    channel_b: Optional[str] = None
    superchannel_path: Optional[str] = None
    save_superchannel: Optional[str] = None
    eps: Optional[float] = None
    delta: float = 0.0
    channel_class: Literal["MISC", "DISC"] = "MISC"
    prop: Optional[Literal["admissible", "MISC", "DISC", "deltaMISC"]] = None
    seed: Optional[int] = None
    output_format: Literal["json", "csv", "text"] = "json"
    output: Optional[str] = None
    solver_tol: Optional[float] = None
    solver_max_iter: Optional[int] = None
    dims: list[int] = Field(default_factory=list)
    trials: Optional[int] = None

    @field_validator("eps")
    @classmethod
    def _check_eps(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0.0 <= v < 1.0:
            raise ValueError("eps must lie in [0, 1)")
        return v

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, v: float) -> float:
        if v < 0.0:
            raise ValueError("delta must be non-negative")
        return v

    @field_validator("channel_class", mode="before")
    @classmethod
    def _upper_class(cls, v: Any) -> Any:
        return v.upper() if isinstance(v, str) else v

    @field_validator("prop", mode="before")
    @classmethod
    def _canonical_prop(cls, v: Any) -> Any:
        if not isinstance(v, str):
            return v
        names = {"admissible": "admissible", "misc": "MISC", "disc": "DISC", "deltamisc": "deltaMISC"}
        return names.get(v.replace("-", "").replace("_", "").lower(), v)

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, v: list[int]) -> list[int]:
        if any(d < 1 for d in v):
            raise ValueError("dimensions must be positive")
        return v
