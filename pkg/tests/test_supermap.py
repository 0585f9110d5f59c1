import numpy as np
import pytest

from src.config import ADMISSIBILITY_CRITERION, settings
from src.errors import EnumerationCapError, SpecError
from src.models.superchannel import LinearAction, PrePost, Superchannel
from src.services import matcore as mc
from src.services import protocols, qobj, supermap


def transpose_super(d: int) -> Superchannel:
    """J -> J^T: trace preserving on Choi space but not completely positive."""
    n = d * d
    matrix = np.zeros((n * n, n * n), dtype=np.complex128)
    for a in range(n):
        for b in range(n):
            matrix[a * n + b, b * n + a] = 1.0
    return Superchannel(d, d, d, d, realization=LinearAction(matrix=matrix), label="transpose")


def qft_after(d: int) -> Superchannel:
    real = PrePost(pre=qobj.identity_channel(d), post=qobj.qft_channel(d), denv=1)
    return Superchannel(d, d, d, d, realization=real, label="F-after")


def test_identity_super_fixes_channels(random_channel):
    n = random_channel(2, 3)
    out = supermap.apply_super(supermap.identity_super(2, 3), n)
    assert np.allclose(out.choi, n.choi)


def test_dephasing_super_dephases_golden_unit():
    out = supermap.apply_super(supermap.dephasing_super(2, 2), qobj.qft_channel(2))
    assert np.allclose(out.choi, np.eye(4) / 4)


def test_apply_super_rejects_wrong_dims(random_channel):
    with pytest.raises(SpecError):
        supermap.apply_super(supermap.identity_super(2, 2), random_channel(3))


def test_linear_action_agrees_with_prepost(rng, random_channel):
    theta = supermap.random_superchannel((2, 2, 2, 2), rng)
    n = random_channel(2)
    direct = supermap.apply_super_choi(theta, n.choi)
    linear = supermap.apply_super_choi(supermap.linear_action(theta), n.choi)
    assert np.allclose(direct, linear)


def test_linear_action_agrees_with_prepost_at_qutrits(rng):
    theta = supermap.random_superchannel((3, 3, 3, 3), rng, denv=2)
    real = theta.realization
    linear = supermap.linear_action(theta)
    env = qobj.identity_channel(2)
    for _ in range(12):
        n = qobj.random_channel(3, 3, rng)
        rho = mc.random_density(3, rng)
        stepwise = qobj.apply_choi(real.pre.choi, 3, 6, rho)
        stepwise = qobj.apply_choi(qobj.tensor(n, env).choi, 6, 6, stepwise)
        stepwise = qobj.apply_choi(real.post.choi, 6, 3, stepwise)
        out = supermap.apply_super(linear, n)
        assert np.allclose(qobj.apply_choi(out.choi, 3, 3, rho), stepwise, atol=1e-9)

    # Hermitian operators with random coefficients span the whole input space
    for _ in range(81):
        g = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        h = g + g.conj().T
        assert np.allclose(supermap.apply_super_choi(theta, h), supermap.apply_super_choi(linear, h))


def test_compose_super_applies_inner_first(rng, random_channel):
    inner = supermap.random_superchannel((2, 2, 2, 2), rng)
    outer = supermap.dephasing_super(2, 2)
    n = random_channel(2)
    composed = supermap.apply_super_choi(supermap.compose_super(outer, inner), n.choi)
    expected = supermap.apply_super_choi(outer, supermap.apply_super_choi(inner, n.choi))
    assert np.allclose(composed, expected)


def test_tensor_super_acts_factorwise(rng, random_channel):
    first = supermap.random_superchannel((2, 2, 2, 2), rng)
    second = supermap.dephasing_super(2, 2)
    n, m = random_channel(2), random_channel(2)
    joint = supermap.apply_super_choi(supermap.tensor_super(first, second), qobj.tensor(n, m).choi)
    expected = qobj.tensor_choi(
        supermap.apply_super_choi(first, n.choi), (2, 2), supermap.apply_super_choi(second, m.choi), (2, 2)
    )
    assert np.allclose(joint, expected)


def test_admissibility_of_random_prepost(rng):
    verdict = supermap.admissibility_check(supermap.random_superchannel((2, 2, 2, 2), rng))
    assert verdict.passed
    assert verdict.criterion == ADMISSIBILITY_CRITERION


def test_transpose_is_inadmissible():
    verdict = supermap.admissibility_check(transpose_super(2))
    assert not verdict.passed
    assert "eigenvalue" in verdict.detail
    assert verdict.witness is not None


def test_apply_super_flags_inadmissible_output():
    doubling = Superchannel(2, 2, 2, 2, realization=LinearAction(matrix=2 * np.eye(16)), label="double")
    with pytest.raises(SpecError, match="inadmissible"):
        supermap.apply_super(doubling, qobj.qft_channel(2))


def test_transpose_maps_channels_to_channels(random_channel):
    n = random_channel(2)
    out = supermap.apply_super(transpose_super(2), n)
    assert np.allclose(out.choi, n.choi.T)


def test_supermap_choi_is_psd_for_identity():
    choi = supermap.supermap_choi(supermap.identity_super(2, 2))
    assert mc.psd_check(choi)


def test_classical_superchannel_is_misc_and_disc(rng):
    theta = supermap.random_classical_superchannel((2, 2, 2, 2), rng)
    assert supermap.misc_check(theta).passed
    assert supermap.disc_check(theta).passed


def test_unitary_post_processing_breaks_membership():
    theta = qft_after(2)
    misc = supermap.misc_check(theta)
    assert not misc.passed
    assert misc.witness is not None
    assert not supermap.disc_check(theta).passed


def test_dephasing_super_is_disc():
    assert supermap.disc_check(supermap.dephasing_super(2, 2)).passed
    assert supermap.misc_check(supermap.dephasing_super(2, 2)).passed


def test_enumeration_cap(monkeypatch, rng):
    monkeypatch.setattr(settings, "enumeration_cap", 1)
    with pytest.raises(EnumerationCapError):
        supermap.misc_check(supermap.random_superchannel((2, 2, 2, 2), rng))


def test_delta_misc_check_on_mixing_superchannels():
    assert supermap.delta_misc_check(protocols.mixing_superchannel(2, 0.3), 0.5).passed
    # Full mixing replaces every channel by F_2, whose robustness is 3
    verdict = supermap.delta_misc_check(protocols.mixing_superchannel(2, 3.0), 0.5)
    assert not verdict.passed
    assert verdict.residual == pytest.approx(3.0, abs=1e-4)


def test_delta_misc_check_rejects_negative_delta():
    with pytest.raises(SpecError):
        supermap.delta_misc_check(supermap.identity_super(2, 2), -0.1)


def test_measure_prepare_validates_branches():
    with pytest.raises(SpecError):
        supermap.measure_prepare((2, 2, 2, 2), [(1.0, 0.0, np.zeros((4, 4)), qobj.qft_channel(3))])
    with pytest.raises(SpecError):
        supermap.measure_prepare((2, 2, 2, 2), [(1.0, 0.0, np.zeros((3, 3)), qobj.qft_channel(2))])
