import math

import numpy as np
import pytest

from src.errors import SpecError
from src.models.reports import MeasureResult
from src.services import matcore as mc
from src.services import measures, protocols, qobj, supermap


def test_min_qft_dimension():
    assert protocols.min_qft_dimension(0.0) == 1
    assert protocols.min_qft_dimension(2.0) == 2
    assert protocols.min_qft_dimension(3.16) == 3


def test_catalyst_size():
    assert protocols.catalyst_size(1 / 3) == 2
    assert protocols.catalyst_size(0.5) == 2
    assert protocols.catalyst_size(0.1) == 4
    with pytest.raises(SpecError):
        protocols.catalyst_size(0.0)


def test_eps_prime():
    assert protocols.eps_prime(0.1, 2) == pytest.approx(0.00125)


def test_omega_fixes_golden_unit_and_flattens_classical_channels():
    omega = protocols.build_omega(2)
    fixed = supermap.apply_super_choi(omega, qobj.qft_channel(2).choi)
    assert np.allclose(fixed, qobj.qft_channel(2).choi, atol=1e-9)
    for n in qobj.deterministic_channels(2, 2):
        assert np.allclose(supermap.apply_super_choi(omega, n.choi), np.eye(4) / 4, atol=1e-9)
    assert supermap.admissibility_check(omega).passed
    assert supermap.misc_check(omega).passed


def test_build_omega_rejects_trivial_dimension():
    with pytest.raises(SpecError):
        protocols.build_omega(1)


def test_cost_superchannel_needs_nontrivial_unit():
    f = qobj.qft_channel(2)
    with pytest.raises(SpecError):
        protocols.cost_superchannel(1, f, qobj.dephased(f))


@pytest.mark.parametrize("channel_class", ["MISC", "DISC"])
def test_cost_of_golden_unit(channel_class):
    report = protocols.one_shot_cost(qobj.qft_channel(2), 0.0, channel_class)
    assert report.parameters["d0"] == 2
    assert report.rate == pytest.approx(2.0)
    assert report.passed
    assert report.superchannel is not None


def test_cost_of_classical_channel_is_degenerate():
    report = protocols.one_shot_cost(qobj.deterministic_channel([1, 0], 2, 2), 0.0)
    assert report.degenerate
    assert report.rate == 0.0
    assert report.passed


def test_cost_rejects_unknown_class():
    with pytest.raises(SpecError):
        protocols.one_shot_cost(qobj.qft_channel(2), 0.0, "PIO")


@pytest.mark.slow
def test_cost_of_random_channel_with_smoothing(rng):
    n = qobj.random_channel(2, 2, rng)
    report = protocols.one_shot_cost(n, 0.05)
    assert report.passed
    assert report.lower <= report.rate + 1e-6


def test_distill_bound_of_golden_unit(rng):
    report = protocols.one_shot_distill_bound(qobj.qft_channel(2), 0.0, inputs=[measures.phi_plus_input(2)], rng=rng)
    assert report.rate == pytest.approx(2.0)
    assert report.upper >= 2.0 - 1e-4
    assert report.passed


def test_distill_bound_rejects_large_eps():
    with pytest.raises(SpecError):
        protocols.one_shot_distill_bound(qobj.qft_channel(2), 0.5)


def test_golden_unit_report():
    assert protocols.golden_unit_report(qobj.qft_channel(2)).passed


def test_replacement_report():
    assert protocols.replacement_report(2).passed


def test_decomposition_of_golden_unit_is_fully_heralded():
    result = protocols.smoothing_decomposition(qobj.qft_channel(2), 0.0, 2)
    assert result.p == pytest.approx(1.0, abs=1e-5)
    assert result.remainder is None or result.p > 1 - 1e-5
    assert all(claim.passed for claim in result.claims)


def test_decomposition_needs_catalyst():
    with pytest.raises(SpecError):
        protocols.smoothing_decomposition(qobj.qft_channel(2), 0.0, 1)


@pytest.mark.slow
def test_catalytic_cost_certificate():
    report = protocols.catalytic_cost(qobj.qft_channel(2), 0.1, 0.5)
    assert report.parameters["l"] == 2
    assert report.parameters["s_used"] <= report.parameters["s"] + 1e-6
    assert report.passed


def test_catalytic_cost_rejects_bad_eps():
    with pytest.raises(SpecError):
        protocols.catalytic_cost(qobj.qft_channel(2), 1.0, 0.5)


def test_regularization_per_copy():
    report = protocols.regularization_sanity(qobj.qft_channel(2), 0.0, 2)
    rows = report.parameters["rows"]
    assert [row["k"] for row in rows] == [1, 2]
    for row in rows:
        assert row["per_copy"] == pytest.approx(math.log2(4), abs=1e-4)
    assert report.passed


def test_regularization_rejects_large_nmax():
    with pytest.raises(SpecError):
        protocols.regularization_sanity(qobj.qft_channel(2), 0.0, 3)


def test_mixing_superchannel_bounds():
    with pytest.raises(SpecError):
        protocols.mixing_superchannel(2, -0.1)
    with pytest.raises(SpecError):
        protocols.mixing_superchannel(2, 3.5)
    theta = protocols.mixing_superchannel(2, 0.0)
    n = qobj.dephasing_channel(2)
    assert np.allclose(supermap.apply_super_choi(theta, n.choi), n.choi)


@pytest.mark.slow
def test_disc_cost_with_smoothing_passes_certificate():
    n = qobj.random_channel(2, 2, np.random.default_rng(7))
    report = protocols.one_shot_cost(n, 0.05, "DISC")
    claims = {claim.name: claim for claim in report.certificate.claims}
    assert claims["smoothing_within_eps"].passed
    assert claims["smoothing_within_eps"].lhs <= 0.05
    assert supermap.admissibility_check(report.superchannel).passed
    assert supermap.disc_check(report.superchannel).passed
    assert report.passed


def test_dephasing_smoothing_stays_inside_the_ball():
    n = qobj.qft_channel(2)
    result = measures.lr_dephasing_smoothed(n, 0.1)
    assert result.extras["radius"] < 0.1
    assert all(r.status == "optimal" for r in result.reports)
    smoothed = protocols.project_to_channel(result.witnesses["smoothing"], 2, 2)
    assert qobj.cptp_check(qobj.make_channel(smoothed, 2, 2, validate=False)).passed
    assert protocols.half_diamond(smoothed, n.choi, 2, 2) <= 0.1


def test_cost_superchannel_needs_enough_golden_units():
    target = qobj.qft_channel(3)
    partner = qobj.dephased(target)
    # 4 * partner - target has a negative eigenvalue, 9 * partner - target does not
    assert not supermap.admissibility_check(protocols.cost_superchannel(2, target, partner)).passed
    assert supermap.admissibility_check(protocols.cost_superchannel(3, target, partner)).passed


def test_misc_cost_construction_is_not_disc():
    target = qobj.qft_channel(2)
    partner = qobj.deterministic_channel([0, 0], 2, 2)
    theta = protocols.cost_superchannel(2, target, partner)
    assert supermap.misc_check(theta).passed
    verdict = supermap.disc_check(theta)
    assert not verdict.passed
    assert verdict.witness is not None

    dephasing_partner = protocols.cost_superchannel(2, target, qobj.dephased(target))
    assert supermap.disc_check(dephasing_partner).passed


def test_regularization_widths_are_measured():
    report = protocols.regularization_sanity(qobj.qft_channel(2), 0.0, 2)
    rows = report.parameters["rows"]
    for row in rows:
        assert row["d0"] == 2 ** row["k"]
        assert row["rate_per_copy"] == pytest.approx(2.0)
        assert row["width"] == pytest.approx(0.0, abs=1e-4)
        assert row["width_bound"] == pytest.approx(2.0 / row["k"])
    names = {claim.name for claim in report.certificate.claims}
    assert {"width_bounded_k1", "width_bounded_k2", "per_copy_subadditive_k2"} <= names
    assert "per_copy_matches_golden_unit_k2" in names
    assert report.passed


def test_regularization_flags_wrong_golden_unit_rate(monkeypatch):
    monkeypatch.setattr(protocols, "self_distillable_rate", lambda n: 3.0)
    report = protocols.regularization_sanity(qobj.qft_channel(2), 0.0, 1)
    assert not report.passed
    failed = [claim.name for claim in report.certificate.claims if not claim.passed]
    assert failed == ["per_copy_matches_golden_unit_k1"]


def test_decomposition_rejects_unheralded_smoothing(monkeypatch):
    n = qobj.qft_channel(2)
    complement = (np.eye(4) - qobj.qft_channel(2).choi) / 3
    witness = mc.permute_systems(np.kron(n.choi, complement), [2, 2, 2, 2], [0, 2, 1, 3])
    monkeypatch.setattr(
        measures,
        "lr_smoothed",
        lambda joint, eps: MeasureResult(name="lr_smoothed", value=0.0, witnesses={"smoothing": witness}),
    )
    with pytest.raises(SpecError, match="not heralded"):
        protocols.smoothing_decomposition(n, 0.0, 2)


def test_cost_claims_are_distinct():
    report = protocols.one_shot_cost(qobj.qft_channel(2), 0.0, "MISC")
    names = [claim.name for claim in report.certificate.claims]
    assert len(names) == len(set(names))
    assert names == ["target_reproduced", "smoothing_within_eps", "sandwich_lower", "sandwich_upper"]
