"""Superchannel models and their three realizations."""

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .channel import QuantumChannel


@dataclass(frozen=True, eq=False)
class PrePost:
    """Theta[N] = post o (id_E (x) N) o pre.

    ``pre`` maps B0 to A0 (x) E and ``post`` maps A1 (x) E to B1, with the
    environment E always the second tensor factor.
    """

    pre: QuantumChannel
    post: QuantumChannel
    denv: int = 1


@dataclass(frozen=True, eq=False)
class MeasurePrepareBranch:
    """One branch: (affine + coeff * Tr[effect J^N]) * target."""

    affine: float
    coeff: float
    effect: np.ndarray
    target: QuantumChannel


@dataclass(frozen=True, eq=False)
class MeasurePrepare:
    branches: tuple[MeasurePrepareBranch, ...] = field(default_factory=tuple)


@dataclass(frozen=True, eq=False)
class LinearAction:
    """Matrix acting on row-major vectorized normalized Choi matrices."""

    matrix: np.ndarray


Realization = Union[PrePost, MeasurePrepare, LinearAction]


@dataclass(frozen=True, eq=False)
class Superchannel:
    """Linear map from channels A0 -> A1 to channels B0 -> B1."""

    dA0: int
    dA1: int
    dB0: int
    dB1: int
    realization: Realization
    label: str = ""

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.dA0, self.dA1, self.dB0, self.dB1)

    @property
    def kind(self) -> str:
        if isinstance(self.realization, PrePost):
            return "prepost"
        if isinstance(self.realization, MeasurePrepare):
            return "measure_prepare"
        return "linear"

    def __repr__(self) -> str:
        return f"<Superchannel(dims={self.dims}, kind='{self.kind}', label='{self.label}')>"
