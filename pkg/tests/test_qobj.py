import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.errors import SpecError
from src.services import matcore as mc
from src.services import qobj

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_make_channel_rejects_non_tp():
    with pytest.raises(SpecError, match="trace preserving"):
        qobj.make_channel(np.eye(4) / 2, 2, 2)


def test_make_channel_rejects_non_psd():
    choi = np.diag([0.75, -0.25, 0.25, 0.25]).astype(complex)
    with pytest.raises(SpecError, match="PSD"):
        qobj.make_channel(choi, 2, 2)


def test_make_channel_rejects_shape_mismatch():
    with pytest.raises(SpecError):
        qobj.make_channel(np.eye(4) / 4, 2, 3)


def test_qft_maps_zero_to_plus():
    out = qobj.apply(qobj.qft_channel(2), mc.projector(mc.ket(2, 0))).density
    assert np.allclose(out, qobj.maximally_coherent_state(2))


def test_qft_needs_dimension_two():
    with pytest.raises(SpecError):
        qobj.qft_channel(1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_fixed_channels_are_cptp(d):
    for n in (
        qobj.qft_channel(d),
        qobj.identity_channel(d),
        qobj.dephasing_channel(d),
        qobj.replacement_channel(d),
        qobj.uniform_classical_channel(d, d),
    ):
        assert qobj.cptp_check(n).passed, n


def test_compose_applies_inner_first():
    d = 2
    replacement = qobj.replacement_channel(d)
    dephasing = qobj.dephasing_channel(d)
    # Dephasing after replacement erases the coherent output
    assert np.allclose(qobj.compose(dephasing, replacement).choi, np.eye(d * d) / (d * d))
    # Replacement after dephasing is still the replacement channel
    assert np.allclose(qobj.compose(replacement, dephasing).choi, replacement.choi)


def test_compose_rejects_dimension_mismatch():
    with pytest.raises(SpecError):
        qobj.compose(qobj.identity_channel(2), qobj.identity_channel(3))


def test_tensor_acts_factorwise(random_channel, random_state):
    n, m = random_channel(2), random_channel(2, 3)
    rho, sigma = random_state(2), random_state(2)
    joint = qobj.apply(qobj.tensor(n, m), np.kron(rho, sigma)).density
    expected = np.kron(qobj.apply(n, rho).density, qobj.apply(m, sigma).density)
    assert np.allclose(joint, expected)


def test_kraus_view_reproduces_channel(random_channel):
    n = random_channel(2, 3)
    rebuilt = qobj.choi_of_kraus(qobj.kraus_of_channel(n), 2, 3)
    assert np.allclose(rebuilt.choi, n.choi)


def test_kraus_rejects_non_tp_set():
    with pytest.raises(SpecError, match="trace preserving"):
        qobj.choi_of_kraus([np.eye(2) * 0.5], 2, 2)


def test_superop_agrees_with_apply(random_channel, random_state):
    n = random_channel(2, 3)
    rho = random_state(2)
    via_superop = (qobj.superop(n) @ rho.reshape(-1)).reshape(3, 3)
    assert np.allclose(via_superop, qobj.apply(n, rho).density)


def test_channel_from_map_of_transpose_is_rejected():
    with pytest.raises(SpecError):
        qobj.channel_from_map(lambda op: op.T, 2, 2)


@settings(max_examples=15, deadline=None)
@given(seed=seeds, din=st.integers(1, 3), dout=st.integers(1, 3))
def test_random_channels_are_cptp(seed, din, dout):
    n = qobj.random_channel(din, dout, np.random.default_rng(seed))
    assert qobj.cptp_check(n).passed
    assert np.trace(n.choi).real == pytest.approx(1.0)


@pytest.mark.parametrize("d", [2, 3])
def test_classical_overlap_with_golden_unit(d):
    golden = qobj.qft_channel(d)
    for q in qobj.deterministic_channels(d, d):
        overlap = float(np.real(np.trace(golden.choi @ q.choi)))
        assert abs(overlap - 1 / (d * d)) <= 1e-12


def test_deterministic_channel_validates_map():
    with pytest.raises(SpecError):
        qobj.deterministic_channel([0, 2], 2, 2)
    with pytest.raises(SpecError):
        qobj.deterministic_channel([0], 2, 2)


def test_deterministic_maps_count():
    assert len(list(qobj.deterministic_maps(3, 2))) == 8


def _passed(n):
    return {v.channel_class: v.passed for v in qobj.class_verdicts(n)}


def test_class_verdicts_for_fixed_channels():
    assert _passed(qobj.dephasing_channel(2)) == {
        "CPTP": True, "classical": True, "MIO": True, "DIO": True, "DI": True
    }
    identity = _passed(qobj.identity_channel(2))
    assert identity["classical"] is False
    assert identity["MIO"] and identity["DIO"] and identity["DI"]

    golden = _passed(qobj.qft_channel(2))
    assert not golden["MIO"] and not golden["DIO"] and not golden["classical"]

    replacement = _passed(qobj.replacement_channel(2))
    assert replacement["DI"] and not replacement["DIO"] and not replacement["MIO"]


def test_failed_verdict_carries_witness():
    verdict = qobj.mio_check(qobj.qft_channel(2))
    assert not verdict.passed
    assert verdict.witness in ([0, 0], [1, 1])
    assert verdict.residual == pytest.approx(1.0)


def test_random_classical_channel_is_classical(rng):
    assert qobj.classical_check(qobj.random_classical_channel(2, 3, rng)).passed


def test_make_state_validation():
    with pytest.raises(SpecError):
        qobj.make_state(np.eye(2))
    state = qobj.make_state(np.eye(2) / 2, label="mixed")
    assert state.dim == 2 and state.label == "mixed"


def test_max_entangled_state_is_identity_choi():
    assert np.allclose(qobj.identity_channel(3).choi, qobj.max_entangled_state(3))
    assert math.isclose(np.trace(qobj.max_entangled_state(3)).real, 1.0)
