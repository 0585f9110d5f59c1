"""Quantum state and channel models."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix on a ``dim``-dimensional system."""

    dim: int
    density: np.ndarray
    label: str = ""

    def __repr__(self) -> str:
        return f"<QuantumState(dim={self.dim}, label='{self.label}')>"

    def to_dict(self) -> dict:
        from ..services.serialization import matrix_to_json

        return {"dim": self.dim, "label": self.label, "density": matrix_to_json(self.density)}


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map stored as its normalized Choi matrix.

    The Choi matrix lives on A0 (input) tensor A1 (output); basis index
    ``i * dout + j`` pairs input index ``i`` with output index ``j``.
    """

    din: int
    dout: int
    choi: np.ndarray
    label: str = ""

    @property
    def choi_dim(self) -> int:
        return self.din * self.dout

    def __repr__(self) -> str:
        return f"<QuantumChannel(din={self.din}, dout={self.dout}, label='{self.label}')>"

    def to_dict(self) -> dict:
        from ..services.serialization import matrix_to_json

        return {
            "kind": "choi",
            "din": self.din,
            "dout": self.dout,
            "label": self.label,
            "matrix": matrix_to_json(self.choi),
        }
