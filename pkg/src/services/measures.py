"""Divergences and coherence monotones of states and channels.

All values are in bits. Optimization-defined quantities go through
``conic``; closed forms are evaluated spectrally.
"""

import logging
import math
from typing import Optional, Sequence

import cvxpy as cp
import numpy as np

from ..config import settings
from ..errors import SpecError
from ..models.channel import QuantumChannel
from ..models.reports import MeasureResult
from . import matcore as mc
from . import qobj
from .conic import ConicProgram, bisect_feasibility, solve

logger = logging.getLogger(__name__)


def _log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps < 1.0:
        raise SpecError(f"eps must lie in [0, 1), got {eps}")


# ---------------------------------------------------------------------------
# Max-relative entropy
# ---------------------------------------------------------------------------


def dmax(rho: np.ndarray, sigma: np.ndarray) -> float:
    """log min{lambda : rho <= lambda sigma} for PSD operators; +inf off support."""
    rho = mc.as_matrix(rho)
    sigma = mc.as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise SpecError(f"D_max needs equal shapes, got {rho.shape} and {sigma.shape}")
    values, vectors = mc.eig_hermitian(sigma)
    cutoff = settings.whitening_cutoff * max(1.0, float(values[-1]))
    support = values > cutoff
    if not np.any(support):
        return math.inf

    outside = vectors[:, ~support]
    if outside.size:
        leak = mc.trace_norm(mc.dagger(outside) @ rho @ outside)
        if leak > settings.psd_tol:
            return math.inf

    v = vectors[:, support]
    inv_root = 1.0 / np.sqrt(values[support])
    whitened = (inv_root[:, None] * (mc.dagger(v) @ rho @ v)) * inv_root[None, :]
    top = float(np.linalg.eigvalsh(mc.hermitian_part(whitened))[-1])
    return _log2(top)


def dmax_state(rho, sigma) -> float:
    rho = mc.as_matrix(rho)
    sigma = mc.as_matrix(sigma)
    if not (mc.is_density(rho) and mc.is_density(sigma)):
        raise SpecError("dmax_state expects density matrices")
    return dmax(rho, sigma)


def dmax_channel(n: QuantumChannel, m: QuantumChannel) -> float:
    """Channel max-relative entropy on normalized Choi matrices."""
    if (n.din, n.dout) != (m.din, m.dout):
        raise SpecError("dmax_channel needs channels with equal dimensions")
    return dmax(n.choi, m.choi)


# ---------------------------------------------------------------------------
# Robustness of coherence
# ---------------------------------------------------------------------------


def lr_state(rho) -> MeasureResult:
    """Log-robustness of a state: min log sum t s.t. diag(t) >= rho."""
    rho = mc.as_matrix(rho)
    n = rho.shape[0]
    program = ConicProgram("lr_state")
    t = program.nonneg("t", n)
    program.psd(cp.diag(t) - rho)
    program.minimize(cp.sum(t))
    result = solve(program)

    total = max(result.objective, 1.0)
    sigma = np.diag(result["t"]).astype(np.complex128) / float(np.sum(result["t"]))
    return MeasureResult(
        name="lr_state",
        value=max(_log2(total), 0.0),
        witnesses={"sigma": sigma},
        reports=[result.report],
    )


def cr_state(rho) -> float:
    return 2.0 ** lr_state(rho).value - 1.0


def _classical_marginal(program: ConicProgram, x, t, din: int, dout: int) -> None:
    for i in range(din):
        program.equal(cp.sum(x[i * dout:(i + 1) * dout]), t / din)


def lr_channel_choi(choi: np.ndarray, din: int, dout: int) -> MeasureResult:
    """Log-robustness of the map with normalized Choi ``choi``."""
    choi = mc.as_matrix(choi)
    program = ConicProgram("lr_channel")
    x = program.nonneg("x", din * dout)
    t = program.scalar("t")
    program.psd(cp.diag(x) - choi)
    _classical_marginal(program, x, t, din, dout)
    program.minimize(t)
    result = solve(program)

    t_value = max(result.objective, 1.0)
    witness = _classical_witness(result["x"], din, dout)
    polished = dmax(choi, witness)
    return MeasureResult(
        name="lr_channel",
        value=max(_log2(t_value), 0.0),
        witnesses={"classical": witness},
        reports=[result.report],
        extras={"polished": polished},
    )


def _classical_witness(x: np.ndarray, din: int, dout: int) -> np.ndarray:
    """Normalized Choi of the classical channel read off a diagonal, rows renormalized."""
    rows = np.clip(np.real(x), 0.0, None).reshape(din, dout)
    sums = rows.sum(axis=1, keepdims=True)
    rows = np.where(sums > 0, rows / np.where(sums > 0, sums, 1.0), 1.0 / dout)
    return np.diag(rows.reshape(-1) / din).astype(np.complex128)


def lr_channel(n: QuantumChannel) -> MeasureResult:
    return lr_channel_choi(n.choi, n.din, n.dout)


def cr_channel(n: QuantumChannel) -> float:
    """Channel robustness of coherence 2^LR - 1."""
    return 2.0 ** lr_channel(n).value - 1.0


def lr_dephasing(n: QuantumChannel) -> float:
    """D_max(N || Delta[N])."""
    return dmax(n.choi, qobj.dephase_choi(n.choi))


# ---------------------------------------------------------------------------
# Diamond distance and smoothing
# ---------------------------------------------------------------------------


def _diamond_ball(program: ConicProgram, difference, din: int, dout: int, prefix: str = ""):
    """Add Z, mu with Z >= din * difference, Z >= 0, mu I >= Tr_out Z; return mu."""
    z = program.hermitian(f"{prefix}Z", din * dout)
    mu = program.scalar(f"{prefix}mu")
    program.psd(z - din * difference)
    program.psd(z)
    program.psd(mu * np.eye(din) - cp.partial_trace(z, [din, dout], axis=1))
    return mu


def diamond_distance(n: QuantumChannel, m: QuantumChannel) -> float:
    """Half diamond norm (1/2)||N - M||_diamond."""
    if (n.din, n.dout) != (m.din, m.dout):
        raise SpecError("diamond_distance needs channels with equal dimensions")
    return diamond_distance_choi(n.choi, m.choi, n.din, n.dout)


def diamond_distance_choi(a: np.ndarray, b: np.ndarray, din: int, dout: int) -> float:
    difference = mc.hermitian_part(np.asarray(a) - np.asarray(b))
    if mc.trace_norm(difference) < 1e-14:
        return 0.0
    program = ConicProgram("diamond")
    mu = _diamond_ball(program, difference, din, dout)
    program.minimize(mu)
    result = solve(program)
    return max(result.objective, 0.0)


def choi_diamond_bound(n: QuantumChannel, m: QuantumChannel) -> float:
    """Upper bound (din / 2) ||J^N - J^M||_1 on the half diamond distance."""
    return n.din * mc.trace_norm(n.choi - m.choi) / 2


def _channel_variable(program: ConicProgram, din: int, dout: int, name: str = "J"):
    choi = program.hermitian(name, din * dout)
    program.psd(choi)
    program.equal(cp.partial_trace(choi, [din, dout], axis=1), np.eye(din) / din)
    return choi


def lr_smoothed(n: QuantumChannel, eps: float) -> MeasureResult:
    """Smoothed log-robustness: minimum LR over channels within half-diamond distance eps."""
    _check_eps(eps)
    if eps == 0:
        base = lr_channel(n)
        base.name = "lr_smoothed"
        base.witnesses["smoothing"] = n.choi
        base.extras["eps"] = 0.0
        return base

    program = ConicProgram("lr_smoothed")
    choi = _channel_variable(program, n.din, n.dout)
    x = program.nonneg("x", n.din * n.dout)
    t = program.scalar("t")
    program.psd(cp.diag(x) - choi)
    _classical_marginal(program, x, t, n.din, n.dout)
    mu = _diamond_ball(program, choi - n.choi, n.din, n.dout)
    program.leq(mu, eps)
    program.minimize(t)
    result = solve(program)

    smoothing = result["J"]
    witness = _classical_witness(result["x"], n.din, n.dout)
    return MeasureResult(
        name="lr_smoothed",
        value=max(_log2(max(result.objective, 1.0)), 0.0),
        witnesses={"smoothing": smoothing, "classical": witness},
        reports=[result.report],
        extras={"eps": eps, "polished": dmax(smoothing, witness)},
    )


def lr_dephasing_smoothed(n: QuantumChannel, eps: float) -> MeasureResult:
    """Smoothed dephasing log-robustness by bisection on lambda."""
    _check_eps(eps)
    if eps == 0:
        return MeasureResult(
            name="lr_dephasing_smoothed",
            value=max(lr_dephasing(n), 0.0),
            witnesses={"smoothing": n.choi},
            extras={"eps": 0.0},
        )

    reports = []
    # Ball radius sits delta_slack inside eps
    radius = eps - settings.delta_slack if eps > settings.delta_slack else eps
    upper = 4.0 * n.din * n.dout

    def _program(lam: float) -> ConicProgram:
        program = ConicProgram(f"lr_dephasing_smoothed[{lam:.9f}]")
        choi = _channel_variable(program, n.din, n.dout)
        program.psd(lam * cp.diag(cp.diag(choi)) - choi)
        mu = _diamond_ball(program, choi - n.choi, n.din, n.dout)
        program.leq(mu, radius)
        program.feasibility()
        return program

    def _feasible(lam: float) -> bool:
        result = solve(_program(lam), raise_on_failure=False)
        reports.append(result.report)
        return result.optimal

    lam = bisect_feasibility(_feasible, 1.0, upper)
    if lam > 1.0:
        lam = min(lam + settings.bisection_tol, upper)
    final = solve(_program(lam))
    smoothing = final["J"]
    return MeasureResult(
        name="lr_dephasing_smoothed",
        value=max(_log2(lam), 0.0),
        witnesses={"smoothing": smoothing},
        reports=[final.report],
        extras={
            "eps": eps,
            "radius": radius,
            "bisection_steps": len(reports),
            "polished": dmax(smoothing, mc.diag_part(smoothing)),
        },
    )


# ---------------------------------------------------------------------------
# Hypothesis testing
# ---------------------------------------------------------------------------


def htest_primal(rho: np.ndarray, sigma: np.ndarray, eps: float):
    """min Tr P sigma s.t. Tr P rho >= 1 - eps, 0 <= P <= I."""
    n = rho.shape[0]
    program = ConicProgram("htest_primal")
    test = program.hermitian("P", n)
    program.psd(test)
    program.psd(np.eye(n) - test)
    program.leq(1 - eps, cp.real(cp.trace(test @ rho)))
    program.minimize(cp.real(cp.trace(test @ sigma)))
    return solve(program)


def htest_dual(rho: np.ndarray, sigma: np.ndarray, eps: float):
    """max (1 - eps) mu - Tr Z s.t. mu rho - Z <= sigma, mu >= 0, Z >= 0."""
    n = rho.shape[0]
    program = ConicProgram("htest_dual")
    mu = program.nonneg("mu")
    z = program.hermitian("Z", n)
    program.psd(z)
    program.psd(sigma - mu * rho + z)
    program.maximize((1 - eps) * mu - cp.real(cp.trace(z)))
    return solve(program)


def htest_state(rho, sigma, eps: float, with_dual: bool = True) -> MeasureResult:
    """Hypothesis-testing relative entropy H_eps(rho || sigma)."""
    _check_eps(eps)
    rho = mc.hermitian_part(mc.as_matrix(rho))
    sigma = mc.hermitian_part(mc.as_matrix(sigma))
    if rho.shape != sigma.shape:
        raise SpecError(f"htest_state needs equal shapes, got {rho.shape} and {sigma.shape}")

    primal = htest_primal(rho, sigma, eps)
    beta = primal.objective
    value = -_log2(beta) if beta > 0 else math.inf
    extras = {"eps": eps, "type_two_error": beta}
    reports = [primal.report]
    if with_dual:
        dual = htest_dual(rho, sigma, eps)
        extras["dual_type_two_error"] = dual.objective
        reports.append(dual.report)
    return MeasureResult(
        name="htest_state",
        value=value,
        infinite=math.isinf(value),
        witnesses={"test": primal["P"]},
        reports=reports,
        extras=extras,
    )


# ---------------------------------------------------------------------------
# Channel hypothesis-testing coherence (lower bounds)
# ---------------------------------------------------------------------------


def phi_plus_input(d: int) -> np.ndarray:
    """Maximally entangled input vector on A0 (x) R."""
    return np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)


def entangled_output(choi: np.ndarray, din: int, dout: int, psi: np.ndarray) -> np.ndarray:
    """(id_R (x) N)(psi) on R (x) A1 for psi on A0 (x) R."""
    a = np.asarray(psi, dtype=np.complex128).reshape(din, din).T
    lift = np.kron(a, np.eye(dout))
    return lift @ (din * np.asarray(choi)) @ mc.dagger(lift)


def _classical_htest(n: QuantumChannel, psi: np.ndarray, eps: float):
    """max over classical M of the dual test value on input psi."""
    rho = mc.hermitian_part(entangled_output(n.choi, n.din, n.dout, psi))
    dim = n.din * n.dout
    a = np.asarray(psi, dtype=np.complex128).reshape(n.din, n.din).T
    lift = np.kron(a, np.eye(n.dout))

    program = ConicProgram("ch_coherence")
    x = program.nonneg("x", dim)
    for i in range(n.din):
        program.equal(cp.sum(x[i * n.dout:(i + 1) * n.dout]), 1.0)
    mu = program.nonneg("mu")
    z = program.hermitian("Z", dim)
    # sigma_psi = lift diag(x) lift^dagger
    sigma = lift @ cp.diag(x) @ mc.dagger(lift)
    program.psd(z)
    program.psd(sigma - mu * rho + z)
    program.maximize((1 - eps) * mu - cp.real(cp.trace(z)))
    result = solve(program)
    return result


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _sampled_input_search(
    evaluate,
    din: int,
    inputs: Optional[Sequence[np.ndarray]],
    rng: Optional[np.random.Generator],
):
    """Best score over sampled inputs; a lower bound on the maximum over all inputs.

    With explicit ``inputs`` only those are scored. Otherwise phi+ and
    ``settings.sampled_inputs`` Haar-random pure states are scored, followed by
    ``settings.refinement_rounds`` random-walk steps around the best input with
    a step size halved on every rejection. No alternating optimisation is done.

    Raises:
        SpecError: if a supplied input is not a vector of length din^2.
    """
    size = din * din
    if inputs is not None:
        candidates = []
        for v in inputs:
            v = np.asarray(v, dtype=np.complex128).reshape(-1)
            if v.size != size:
                raise SpecError(f"Input state must have length {size}, got {v.size}")
            if np.linalg.norm(v) == 0:
                raise SpecError("Input state must be non-zero")
            candidates.append(_normalize(v))
        if not candidates:
            raise SpecError("At least one input state is required")
        scored = [(evaluate(v), v) for v in candidates]
        return max(scored, key=lambda s: s[0][0]), len(scored)

    rng = np.random.default_rng(settings.seed) if rng is None else rng
    candidates = [phi_plus_input(din)]
    candidates += [qobj.random_pure_state(size, rng) for _ in range(settings.sampled_inputs)]
    scored = [(evaluate(v), v) for v in candidates]
    best = max(scored, key=lambda s: s[0][0])
    count = len(scored)

    step = 0.3
    for _ in range(settings.refinement_rounds):
        trial = _normalize(best[1] + step * (rng.normal(size=size) + 1j * rng.normal(size=size)))
        score = evaluate(trial)
        count += 1
        if score[0] > best[0][0]:
            best = (score, trial)
        else:
            step /= 2
    return best, count


def ch_coherence_lb(
    n: QuantumChannel,
    eps: float,
    inputs: Optional[Sequence[np.ndarray]] = None,
    rng: Optional[np.random.Generator] = None,
) -> MeasureResult:
    """Lower bound on the channel hypothesis-testing coherence over sampled inputs."""
    _check_eps(eps)
    reports = []

    def evaluate(psi):
        result = _classical_htest(n, psi, eps)
        reports.append(result.report)
        beta = result.objective
        value = -_log2(beta) if beta > 0 else math.inf
        return value, result["x"]

    (best, psi), count = _sampled_input_search(evaluate, n.din, inputs, rng)
    value, x = best
    classical = np.diag(np.clip(np.real(x), 0.0, None) / n.din).astype(np.complex128)
    return MeasureResult(
        name="ch_coherence_lb",
        value=value,
        infinite=math.isinf(value),
        lower_bound=True,
        witnesses={"input": psi, "classical": classical},
        reports=reports[-1:],
        extras={"eps": eps, "inputs_evaluated": count},
    )


def ch_dephasing_lb(
    n: QuantumChannel,
    eps: float,
    inputs: Optional[Sequence[np.ndarray]] = None,
    rng: Optional[np.random.Generator] = None,
) -> MeasureResult:
    """Lower bound on the dephasing hypothesis-testing coherence over sampled inputs."""
    _check_eps(eps)
    dephased = qobj.dephase_choi(n.choi)
    reports = []

    def evaluate(psi):
        rho = mc.hermitian_part(entangled_output(n.choi, n.din, n.dout, psi))
        sigma = mc.hermitian_part(entangled_output(dephased, n.din, n.dout, psi))
        result = htest_state(rho, sigma, eps, with_dual=False)
        reports.extend(result.reports)
        return result.value, result.witnesses["test"]

    (best, psi), count = _sampled_input_search(evaluate, n.din, inputs, rng)
    value, test = best
    return MeasureResult(
        name="ch_dephasing_lb",
        value=value,
        infinite=math.isinf(value),
        lower_bound=True,
        witnesses={"input": psi, "test": test},
        reports=reports[-1:],
        extras={"eps": eps, "inputs_evaluated": count},
    )
