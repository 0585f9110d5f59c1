"""Shared fixtures: seeded generators and random channel factories."""

import numpy as np
import pytest

from src.services import qobj


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_channel(rng):
    def _make(din: int = 2, dout: int | None = None, rank: int | None = None):
        return qobj.random_channel(din, din if dout is None else dout, rng, rank=rank)

    return _make


@pytest.fixture
def random_state(rng):
    def _make(d: int = 2):
        from src.services import matcore as mc

        return mc.random_density(d, rng)

    return _make
