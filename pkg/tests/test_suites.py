import pytest

from src.errors import SpecError
from src.services import suites, supermap


def test_suite_names_end_with_all():
    names = suites.suite_names()
    assert names[-1] == "all"
    assert "appendix-b" in names


def test_unit_measures_suite_passes():
    (report,) = suites.reproduce("appendix-b", dims=[2])
    assert report.suite == "appendix-b"
    assert report.passed
    claims = {row.claim for row in report.rows}
    assert {"lr_channel", "lr_dephasing", "cr_channel", "classical_overlap"} <= claims


def test_replacement_suite_passes():
    (report,) = suites.reproduce("appendix-c", dims=[2])
    assert report.passed


def test_catalyst_row_present_without_trials():
    (report,) = suites.reproduce("thm5", dims=[2], trials=0)
    assert report.rows[0].claim == "catalyst_size"
    assert report.passed


def test_suites_are_seeded():
    first = suites.reproduce("appendix-a", dims=[2], trials=1, seed=3)
    second = suites.reproduce("appendix-a", dims=[2], trials=1, seed=3)
    assert first[0].model_dump() == second[0].model_dump()


@pytest.mark.parametrize("dims", [[1], [5], []])
def test_dimension_guard(dims):
    with pytest.raises(SpecError):
        suites.reproduce("appendix-b", dims=dims)


def test_unknown_suite():
    with pytest.raises(SpecError):
        suites.reproduce("thm9")


def test_format_table_counts_claims():
    reports = suites.reproduce("appendix-c", dims=[2])
    table = suites.format_table(reports)
    total = len(reports[0].rows)
    assert table.strip().endswith(f"{total}/{total} claims passed")


@pytest.mark.slow
def test_misc_cost_suite():
    (report,) = suites.reproduce("thm1", dims=[2], eps=0.05, trials=2, seed=0)
    assert report.passed


def test_cost_suites_default_to_the_eps_grid():
    for name in ("thm1", "thm2"):
        _, defaults = suites.SUITES[name]
        assert defaults["eps"] == [0.0, 0.05, 0.1]
        assert defaults["trials"] == 20


def test_eps_grid_labels_each_case(monkeypatch):
    seen = []

    def runner(dims, eps, trials, rng):
        seen.append(eps)
        return [suites._row("grid", f"d={dims[0]}", "ran", True, eps)]

    monkeypatch.setitem(suites.SUITES, "thm1", (runner, {"dims": [2], "eps": [0.0, 0.05, 0.1], "trials": 1}))
    (report,) = suites.reproduce("thm1")
    assert seen == [0.0, 0.05, 0.1]
    assert [row.case for row in report.rows] == ["eps=0 d=2", "eps=0.05 d=2", "eps=0.1 d=2"]
    assert report.parameters["eps"] == [0.0, 0.05, 0.1]

    (single,) = suites.reproduce("thm1", eps=0.05)
    assert single.rows[0].case == "d=2"
    assert single.parameters["eps"] == 0.05


def test_monotonicity_suite_passes():
    (report,) = suites.reproduce("monotonicity", dims=[2], trials=3)
    assert report.passed
    claims = {row.claim for row in report.rows}
    assert claims == {"dmax_under_superchannel", "lr_under_misc", "lr_dephasing_under_disc", "htest_under_channel"}
    assert len(report.rows) == 12


def test_monotonicity_defaults_to_hundred_instances():
    _, defaults = suites.SUITES["monotonicity"]
    assert defaults["trials"] == 100


def test_cross_validation_suite_passes():
    (report,) = suites.reproduce("cross-validation", dims=[2], trials=1)
    assert report.passed
    claims = {row.claim for row in report.rows}
    assert {
        "diamond_dominates_inputs",
        "diamond_attained_by_input",
        "lr_state_closed_form",
        "htest_below_extreme_points",
        "htest_attained_by_extreme_point",
    } == claims


def test_disc_instances_are_disc(rng):
    for trial in range(3):
        assert supermap.disc_check(suites._disc_instance(2, trial, rng)).passed


@pytest.mark.slow
def test_disc_cost_suite():
    (report,) = suites.reproduce("thm2", dims=[2], trials=1, seed=0)
    assert report.passed
    assert {row.case.split()[0] for row in report.rows} == {"eps=0", "eps=0.05", "eps=0.1"}
