"""Reproduction suites: seeded end-to-end checks of every construction.

Each suite returns a ``SuiteReport`` whose rows are individual claims.
Every suite seeds its own generator from the run seed so a suite's rows do
not depend on which other suites ran before it.
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from ..config import settings
from ..errors import SpecError
from ..models.reports import ProtocolReport, SuiteReport, SuiteRow
from ..models.superchannel import PrePost, Superchannel
from . import matcore as mc
from . import measures, protocols, qobj, supermap

logger = logging.getLogger(__name__)

VALUE_TOL = 1e-5
ROBUSTNESS_TOL = 1e-4
OVERLAP_TOL = 1e-12
MONOTONE_TOL = 1e-6
# Independent searches only approach the optimum from one side
SEARCH_TOL = 1e-3
HTEST_SEARCH_TOL = 1e-6
SEARCH_SAMPLES = 200
SEARCH_STEPS = 2000
EPS_GRID = [0.0, 0.05, 0.1]
MIXING_TRIALS_PER_TRIAL = 4


def _row(suite: str, case: str, claim: str, passed: bool, value=None, expected=None, detail: str = "") -> SuiteRow:
    return SuiteRow(
        suite=suite,
        case=case,
        claim=claim,
        passed=bool(passed),
        value=None if value is None else float(value),
        expected=None if expected is None else float(expected),
        detail=detail,
    )


def _close(suite: str, case: str, claim: str, value: float, expected: float, tol: float) -> SuiteRow:
    return _row(suite, case, claim, abs(value - expected) <= tol, value, expected, f"tol {tol:g}")


def _report_rows(suite: str, case: str, report: ProtocolReport) -> list[SuiteRow]:
    failed = [c.name for c in report.certificate.claims if not c.passed]
    failed += [v.prop for v in report.certificate.verdicts if not v.passed]
    failed += [v.channel_class for v in report.certificate.channel_verdicts if not v.passed]
    return [
        _row(
            suite,
            case,
            f"{report.protocol}_certificate",
            report.passed,
            report.rate,
            report.upper,
            "failed: " + ", ".join(failed) if failed else "",
        )
    ]


def _tolerances() -> dict[str, float]:
    return {
        "value_tol": VALUE_TOL,
        "robustness_tol": ROBUSTNESS_TOL,
        "overlap_tol": OVERLAP_TOL,
        "monotone_tol": MONOTONE_TOL,
        "search_tol": SEARCH_TOL,
        "htest_search_tol": HTEST_SEARCH_TOL,
        "solver_tol": settings.solver_tol,
        "admissibility_tol": settings.admissibility_tol,
        "membership_tol": settings.membership_tol,
    }


# ---------------------------------------------------------------------------
# Cost (MISC and DISC)
# ---------------------------------------------------------------------------


def _cost_suite(
    suite: str,
    channel_class: str,
    monotone: Callable[[np.ndarray, int, int], float],
    dims: Sequence[int],
    eps: float,
    trials: int,
    rng: np.random.Generator,
) -> list[SuiteRow]:
    rows = []
    for d in dims:
        for trial in range(trials):
            case = f"d={d} trial={trial}"
            n = qobj.random_channel(d, d, rng)
            report = protocols.one_shot_cost(n, eps, channel_class)
            rows.extend(_report_rows(suite, case, report))
            rows.append(
                _row(
                    suite,
                    case,
                    "sandwich",
                    report.claim("sandwich_lower").passed
                    and (report.degenerate or report.claim("sandwich_upper").passed),
                    report.rate,
                    report.lower,
                )
            )

            # The constructed superchannel is free, so it cannot raise the monotone
            theta = report.superchannel
            d0 = report.parameters["d0"]
            if d0 > 1:
                sample = qobj.random_channel(d0, d0, rng)
                before = monotone(sample.choi, d0, d0)
                out = mc.hermitian_part(supermap.apply_super_choi(theta, sample.choi))
                after = monotone(out, n.din, n.dout)
                rows.append(_row(suite, case, "monotone_under_construction", after <= before + MONOTONE_TOL, after, before))
    return rows


def reproduce_misc_cost(dims, eps, trials, rng) -> list[SuiteRow]:
    return _cost_suite("thm1", "MISC", lambda c, di, do: measures.lr_channel_choi(c, di, do).value, dims, eps, trials, rng)


def reproduce_disc_cost(dims, eps, trials, rng) -> list[SuiteRow]:
    return _cost_suite("thm2", "DISC", lambda c, di, do: measures.dmax(c, mc.diag_part(c)), dims, eps, trials, rng)


# ---------------------------------------------------------------------------
# Distillation bounds
# ---------------------------------------------------------------------------


def _distill_suite(
    suite: str,
    bound: Callable,
    dims: Sequence[int],
    eps: float,
    trials: int,
    rng: np.random.Generator,
) -> list[SuiteRow]:
    rows = []
    for d in dims:
        golden = qobj.qft_channel(d)
        value = bound(golden, 0.0, inputs=[measures.phi_plus_input(d)]).value
        rows.append(_close(suite, f"F_{d}", "golden_unit_bound", value, 2 * math.log2(d), VALUE_TOL))

    for trial in range(trials):
        d = dims[0]
        case = f"d={d} trial={trial}"
        n = qobj.random_channel(d, d, rng)
        inputs = [measures.phi_plus_input(d)] + [qobj.random_pure_state(d * d, rng) for _ in range(2)]
        tight = bound(n, 0.0, inputs=inputs).value
        loose = bound(n, eps, inputs=inputs).value
        rows.append(_row(suite, case, "bound_nonnegative", tight >= -MONOTONE_TOL, tight, 0.0))
        rows.append(_row(suite, case, "monotone_in_eps", loose >= tight - MONOTONE_TOL, loose, tight))
    return rows


def reproduce_coherence_distillation(dims, eps, trials, rng) -> list[SuiteRow]:
    return _distill_suite("thm3", measures.ch_coherence_lb, dims, eps, trials, rng)


def reproduce_dephasing_distillation(dims, eps, trials, rng) -> list[SuiteRow]:
    return _distill_suite("thm4", measures.ch_dephasing_lb, dims, eps, trials, rng)


# ---------------------------------------------------------------------------
# Catalytic cost and delta-MISC growth
# ---------------------------------------------------------------------------


def reproduce_catalytic(dims, eps, trials, rng, delta: float = 0.5) -> list[SuiteRow]:
    suite = "thm5"
    rows = [_row(suite, "delta=1/3", "catalyst_size", protocols.catalyst_size(1 / 3) == 2, protocols.catalyst_size(1 / 3), 2)]
    d = dims[0]

    for trial in range(trials):
        case = f"d={d} trial={trial}"
        n = qobj.random_channel(d, d, rng)
        report = protocols.catalytic_cost(n, eps, delta)
        rows.extend(_report_rows(suite, case, report))

    # Mixing with the golden unit is a delta-MISC; LR grows by at most log(1 + delta)
    for mix in (0.1, 0.5):
        theta = protocols.mixing_superchannel(d, mix)
        for trial in range(MIXING_TRIALS_PER_TRIAL * trials):
            n = qobj.random_channel(d, d, rng)
            before = measures.lr_channel(n).value
            after = measures.lr_channel(supermap.apply_super(theta, n)).value
            bound = before + math.log2(1 + mix)
            rows.append(
                _row(suite, f"delta={mix} trial={trial}", "delta_misc_growth", after <= bound + VALUE_TOL, after, bound)
            )
    return rows


# ---------------------------------------------------------------------------
# Appendices
# ---------------------------------------------------------------------------


def reproduce_golden_units(dims, eps, trials, rng) -> list[SuiteRow]:
    suite = "appendix-a"
    rows = []
    for d in dims:
        for trial in range(trials):
            n = qobj.random_channel(d, d, rng)
            report = protocols.golden_unit_report(n)
            rows.extend(_report_rows(suite, f"d={d} trial={trial}", report))
    return rows


def reproduce_unit_measures(dims, eps, trials, rng) -> list[SuiteRow]:
    suite = "appendix-b"
    rows = []
    for d in dims:
        golden = qobj.qft_channel(d)
        replacement = qobj.replacement_channel(d)
        rows.append(_close(suite, f"F_{d}", "lr_channel", measures.lr_channel(golden).value, 2 * math.log2(d), VALUE_TOL))
        rows.append(_close(suite, f"F_{d}", "lr_dephasing", measures.lr_dephasing(golden), 2 * math.log2(d), VALUE_TOL))
        rows.append(_close(suite, f"R_{d}", "lr_channel", measures.lr_channel(replacement).value, math.log2(d), VALUE_TOL))
        rows.append(_close(suite, f"R_{d}", "lr_dephasing", measures.lr_dephasing(replacement), math.log2(d), VALUE_TOL))
        rows.append(_close(suite, f"F_{d}", "cr_channel", measures.cr_channel(golden), d * d - 1, ROBUSTNESS_TOL))

        if d <= 3:
            worst = 0.0
            for q in qobj.deterministic_channels(d, d):
                overlap = float(np.real(np.trace(golden.choi @ q.choi)))
                worst = max(worst, abs(overlap - 1 / (d * d)))
            rows.append(_row(suite, f"F_{d}", "classical_overlap", worst <= OVERLAP_TOL, worst, 0.0, f"{d**d} maps"))
    return rows


def reproduce_replacement(dims, eps, trials, rng) -> list[SuiteRow]:
    suite = "appendix-c"
    rows = []
    for d in dims:
        rows.extend(_report_rows(suite, f"d={d}", protocols.replacement_report(d)))
    return rows


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------


def _cyclic_shift(d: int):
    return qobj.unitary_channel(np.roll(np.eye(d), 1, axis=0), label=f"shift_{d}")


def _disc_instance(d: int, trial: int, rng: np.random.Generator):
    """Cycle through dephasing, classical PrePost and shift-conjugated classical superchannels."""
    shape = (d, d, d, d)
    kind = trial % 3
    if kind == 0:
        return supermap.dephasing_super(d, d)
    classical = supermap.random_classical_superchannel(shape, rng)
    if kind == 1:
        return classical
    shift = _cyclic_shift(d)
    conjugate = Superchannel(*shape, realization=PrePost(pre=shift, post=shift, denv=1), label="shift")
    return supermap.compose_super(conjugate, classical)


def reproduce_monotonicity(dims, eps, trials, rng) -> list[SuiteRow]:
    suite = "monotonicity"
    rows = []
    for d in dims:
        shape = (d, d, d, d)
        for trial in range(trials):
            case = f"d={d} trial={trial}"

            theta = supermap.random_superchannel(shape, rng)
            n, m = qobj.random_channel(d, d, rng), qobj.random_channel(d, d, rng)
            before = measures.dmax(n.choi, m.choi)
            after = measures.dmax(
                mc.hermitian_part(supermap.apply_super_choi(theta, n.choi)),
                mc.hermitian_part(supermap.apply_super_choi(theta, m.choi)),
            )
            rows.append(_row(suite, case, "dmax_under_superchannel", after <= before + MONOTONE_TOL, after, before))

            misc = supermap.random_classical_superchannel(shape, rng)
            n = qobj.random_channel(d, d, rng)
            before = measures.lr_channel(n).value
            after = measures.lr_channel(supermap.apply_super(misc, n)).value
            rows.append(_row(suite, case, "lr_under_misc", after <= before + MONOTONE_TOL, after, before))

            disc = _disc_instance(d, trial, rng)
            n = qobj.random_channel(d, d, rng)
            before = measures.lr_dephasing(n)
            after = measures.lr_dephasing(supermap.apply_super(disc, n))
            rows.append(
                _row(suite, case, "lr_dephasing_under_disc", after <= before + MONOTONE_TOL, after, before, disc.label)
            )

            rho, sigma = mc.random_density(d, rng), mc.random_density(d, rng)
            channel = qobj.random_channel(d, d, rng)
            before = measures.htest_state(rho, sigma, eps, with_dual=False).value
            after = measures.htest_state(
                qobj.apply(channel, rho).density, qobj.apply(channel, sigma).density, eps, with_dual=False
            ).value
            rows.append(_row(suite, case, "htest_under_channel", after <= before + MONOTONE_TOL, after, before))
    return rows


# ---------------------------------------------------------------------------
# Cross-validation against independent computations
# ---------------------------------------------------------------------------


def _pure_input_distance(n, m, rng: np.random.Generator) -> float:
    """Best (1/2)||(N - M) (x) id (psi)||_1 found by sampling and a random walk over pure inputs."""
    d = n.din

    def distance(psi):
        a = measures.entangled_output(n.choi, d, n.dout, psi)
        b = measures.entangled_output(m.choi, d, m.dout, psi)
        return mc.trace_norm(a - b) / 2

    candidates = [qobj.random_pure_state(d * d, rng) for _ in range(SEARCH_SAMPLES)]
    best = max(candidates, key=distance)
    score, step = distance(best), 0.2
    for _ in range(SEARCH_STEPS):
        trial = best + step * (rng.normal(size=d * d) + 1j * rng.normal(size=d * d))
        trial /= np.linalg.norm(trial)
        trial_score = distance(trial)
        if trial_score > score:
            best, score = trial, trial_score
            step = min(step * 1.5, 1.0)
        else:
            step = max(step * 0.9, 1e-7)
    return score


def _qubit_basis(theta: float, phi: float) -> np.ndarray:
    v = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    w = np.array([-np.exp(-1j * phi) * math.sin(theta / 2), math.cos(theta / 2)])
    return np.stack([v, w], axis=1)


def _best_test_in_basis(rho: np.ndarray, sigma: np.ndarray, basis: np.ndarray, eps: float) -> float:
    """Minimum of Tr P sigma over tests diagonal in ``basis``, enumerating the vertices of the LP."""
    r = np.real(np.einsum("ik,ij,jk->k", basis.conj(), rho, basis))
    s = np.real(np.einsum("ik,ij,jk->k", basis.conj(), sigma, basis))
    vertices = [np.array(p, dtype=float) for p in [(0, 0), (0, 1), (1, 0), (1, 1)]]
    for j in range(2):
        for other in (0.0, 1.0):
            if r[j] > 1e-12:
                p = np.zeros(2)
                p[1 - j] = other
                p[j] = (1 - eps - other * r[1 - j]) / r[j]
                if -1e-12 <= p[j] <= 1 + 1e-12:
                    vertices.append(p)
    return min(float(p @ s) for p in vertices if p @ r >= 1 - eps - 1e-12)


def _qubit_test_search(rho: np.ndarray, sigma: np.ndarray, eps: float) -> float:
    """Smallest type-II error over qubit tests, by a coarse-to-fine grid over eigenbases."""

    def search(thetas, phis):
        return min((_best_test_in_basis(rho, sigma, _qubit_basis(t, p), eps), t, p) for t in thetas for p in phis)

    beta, theta, phi = search(np.linspace(0, math.pi, 61), np.linspace(0, 2 * math.pi, 121))
    for level in range(6):
        width = 0.06 * 0.1**level
        beta, theta, phi = search(np.linspace(theta - width, theta + width, 41), np.linspace(phi - width, phi + width, 41))
    return beta


def reproduce_cross_validation(dims, eps, trials, rng) -> list[SuiteRow]:
    suite = "cross-validation"
    rows = []
    for d in dims:
        for trial in range(trials):
            case = f"d={d} trial={trial}"
            n, m = qobj.random_channel(d, d, rng), qobj.random_channel(d, d, rng)
            value = measures.diamond_distance(n, m)
            found = _pure_input_distance(n, m, rng)
            rows.append(_row(suite, case, "diamond_dominates_inputs", found <= value + MONOTONE_TOL, found, value))
            rows.append(_close(suite, case, "diamond_attained_by_input", found, value, SEARCH_TOL))

    for trial in range(trials):
        case = f"qubit trial={trial}"
        rho = mc.random_density(2, rng)
        expected = math.log2(1 + 2 * abs(rho[0, 1]))
        rows.append(_close(suite, case, "lr_state_closed_form", measures.lr_state(rho).value, expected, VALUE_TOL))

        rho, sigma = mc.random_density(2, rng), mc.random_density(2, rng)
        beta = measures.htest_state(rho, sigma, eps, with_dual=False).extras["type_two_error"]
        found = _qubit_test_search(rho, sigma, eps)
        rows.append(_row(suite, case, "htest_below_extreme_points", beta <= found + MONOTONE_TOL, beta, found))
        rows.append(_close(suite, case, "htest_attained_by_extreme_point", found, beta, HTEST_SEARCH_TOL))
    return rows


SUITES = {
    "thm1": (reproduce_misc_cost, {"dims": [2], "eps": EPS_GRID, "trials": 20}),
    "thm2": (reproduce_disc_cost, {"dims": [2], "eps": EPS_GRID, "trials": 20}),
    "thm3": (reproduce_coherence_distillation, {"dims": [2, 3], "eps": EPS_GRID[1:], "trials": 10}),
    "thm4": (reproduce_dephasing_distillation, {"dims": [2, 3], "eps": EPS_GRID[1:], "trials": 10}),
    "thm5": (reproduce_catalytic, {"dims": [2], "eps": 0.1, "trials": 5}),
    "appendix-a": (reproduce_golden_units, {"dims": [2, 3], "eps": 0.0, "trials": 10}),
    "appendix-b": (reproduce_unit_measures, {"dims": [2, 3, 4], "eps": 0.0, "trials": 0}),
    "appendix-c": (reproduce_replacement, {"dims": [2, 3], "eps": 0.0, "trials": 0}),
    "monotonicity": (reproduce_monotonicity, {"dims": [2], "eps": 0.1, "trials": 100}),
    "cross-validation": (reproduce_cross_validation, {"dims": [2], "eps": 0.1, "trials": 10}),
}


def suite_names() -> list[str]:
    return list(SUITES) + ["all"]


def reproduce(
    suite: str,
    dims: Optional[Sequence[int]] = None,
    eps: Optional[float] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> list[SuiteReport]:
    """Run one suite, or every suite in a fixed order for ``all``."""
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        raise SpecError(f"Unknown suite '{suite}'; choose from {', '.join(suite_names())}")

    seed = settings.seed if seed is None else seed
    if dims is not None:
        if not dims or any(d < 2 for d in dims):
            raise SpecError(f"Suite dimensions must be at least 2, got {list(dims)}")
        if max(dims) > 4:
            raise SpecError(f"Suite dimensions are capped at 4, got {max(dims)}")

    reports = []
    for index, name in enumerate(names):
        runner, defaults = SUITES[name]
        run_dims = list(dims) if dims is not None else defaults["dims"]
        run_eps = defaults["eps"] if eps is None else eps
        grid = list(run_eps) if isinstance(run_eps, (list, tuple)) else [run_eps]
        run_trials = defaults["trials"] if trials is None else trials
        rng = np.random.default_rng([seed, index])
        logger.info(f"Running suite {name} (dims={run_dims}, eps={run_eps}, trials={run_trials}, seed={seed})")
        rows = []
        for value in grid:
            grid_rows = runner(run_dims, value, run_trials, rng)
            if len(grid) > 1:
                for row in grid_rows:
                    row.case = f"eps={value:g} {row.case}"
            rows.extend(grid_rows)
        report = SuiteReport(
            suite=name,
            seed=seed,
            parameters={"dims": run_dims, "eps": grid if len(grid) > 1 else grid[0], "trials": run_trials},
            rows=rows,
            tolerances=_tolerances(),
        )
        if not report.passed:
            logger.warning(f"Suite {name}: {report.summary}")
        else:
            logger.info(f"Suite {name}: {report.summary}")
        reports.append(report)
    return reports


def format_table(reports: Sequence[SuiteReport]) -> str:
    """Plain-text pass/fail table."""
    header = f"{'suite':<16} {'case':<26} {'claim':<34} {'result':<6} {'value':>12} {'expected':>12}"
    lines = [header, "-" * len(header)]
    for report in reports:
        for row in report.rows:
            value = "" if row.value is None else f"{row.value:.6g}"
            expected = "" if row.expected is None else f"{row.expected:.6g}"
            result = "pass" if row.passed else "FAIL"
            lines.append(f"{row.suite:<16} {row.case:<26} {row.claim:<34} {result:<6} {value:>12} {expected:>12}")
    total = sum(len(r.rows) for r in reports)
    passed = sum(row.passed for r in reports for row in r.rows)
    lines.append(f"{passed}/{total} claims passed")
    return "\n".join(lines) + "\n"
