"""Superchannels: application, linear algebra on Choi space, and certification."""

import itertools
import logging

import numpy as np
from scipy.linalg import null_space

from ..config import ADMISSIBILITY_CRITERION, settings
from ..errors import EnumerationCapError, SpecError
from ..models.channel import QuantumChannel
from ..models.reports import SuperchannelVerdict
from ..models.superchannel import (
    LinearAction,
    MeasurePrepare,
    MeasurePrepareBranch,
    PrePost,
    Superchannel,
)
from . import matcore as mc
from . import qobj

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Linear action
# ---------------------------------------------------------------------------


def _unit_basis(n: int):
    for a in range(n):
        for b in range(n):
            yield mc.matrix_unit(n, a, b)


def _prepost_apply_choi(real: PrePost, choi: np.ndarray, dA0: int, dA1: int, dB0: int, dB1: int) -> np.ndarray:
    """post o (N (x) id_E) o pre on an arbitrary (not necessarily CPTP) Choi operator."""
    denv = real.denv
    if (real.pre.din, real.pre.dout) != (dB0, dA0 * denv):
        raise SpecError(f"Pre-processing must map {dB0} -> {dA0 * denv}, got {real.pre.din} -> {real.pre.dout}")
    if (real.post.din, real.post.dout) != (dA1 * denv, dB1):
        raise SpecError(f"Post-processing must map {dA1 * denv} -> {dB1}, got {real.post.din} -> {real.post.dout}")
    middle = qobj.tensor_choi(choi, (dA0, dA1), qobj.max_entangled_state(denv), (denv, denv))
    s_pre = qobj.superop_from_choi(real.pre.choi, dB0, dA0 * denv)
    s_mid = qobj.superop_from_choi(middle, dA0 * denv, dA1 * denv)
    s_post = qobj.superop_from_choi(real.post.choi, dA1 * denv, dB1)
    return qobj.choi_from_superop(s_post @ s_mid @ s_pre, dB0, dB1)


def to_linear(t: Superchannel) -> np.ndarray:
    """Matrix L with vec(J^{Theta[N]}) = L vec(J^N), row-major vectorization."""
    real = t.realization
    nA = t.dA0 * t.dA1
    nB = t.dB0 * t.dB1
    if isinstance(real, LinearAction):
        return np.asarray(real.matrix, dtype=np.complex128)
    if isinstance(real, MeasurePrepare):
        identity = np.eye(nA, dtype=np.complex128).reshape(-1)
        matrix = np.zeros((nB * nB, nA * nA), dtype=np.complex128)
        for branch in real.branches:
            functional = branch.affine * identity + branch.coeff * np.asarray(branch.effect).T.reshape(-1)
            matrix += np.outer(branch.target.choi.reshape(-1), functional)
        return matrix
    columns = [
        _prepost_apply_choi(real, unit, t.dA0, t.dA1, t.dB0, t.dB1).reshape(-1)
        for unit in _unit_basis(nA)
    ]
    return np.stack(columns, axis=1)


def linear_action(t: Superchannel) -> Superchannel:
    """Same superchannel, re-expressed in the LinearAction realization."""
    return Superchannel(*t.dims, realization=LinearAction(matrix=to_linear(t)), label=t.label)


def apply_super_choi(t: Superchannel, choi: np.ndarray) -> np.ndarray:
    """Theta applied to any operator on A0 (x) A1, without validation."""
    nA = t.dA0 * t.dA1
    choi = np.asarray(choi, dtype=np.complex128)
    if choi.shape != (nA, nA):
        raise SpecError(f"Input of shape {choi.shape} does not fit superchannel input space {nA}")
    real = t.realization
    if isinstance(real, PrePost):
        return _prepost_apply_choi(real, choi, t.dA0, t.dA1, t.dB0, t.dB1)
    nB = t.dB0 * t.dB1
    return (to_linear(t) @ choi.reshape(-1)).reshape(nB, nB)


def apply_super(t: Superchannel, n: QuantumChannel) -> QuantumChannel:
    """Theta[N]; raises SpecError if the output is not a channel."""
    if (n.din, n.dout) != (t.dA0, t.dA1):
        raise SpecError(
            f"Channel dims ({n.din}, {n.dout}) do not match superchannel input ({t.dA0}, {t.dA1})"
        )
    out = apply_super_choi(t, n.choi)
    try:
        return qobj.make_channel(out, t.dB0, t.dB1, label=f"{t.label}[{n.label}]")
    except SpecError as e:
        raise SpecError(f"Superchannel output is not a channel, supermap is inadmissible: {e}") from e


def supermap_choi(t: Superchannel) -> np.ndarray:
    """Choi operator of Theta viewed as a map from A-operators to B-operators."""
    nA = t.dA0 * t.dA1
    nB = t.dB0 * t.dB1
    l4 = to_linear(t).reshape(nB, nB, nA, nA)
    return l4.transpose(2, 0, 3, 1).reshape(nA * nB, nA * nB)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def identity_super(din: int, dout: int) -> Superchannel:
    real = PrePost(pre=qobj.identity_channel(din), post=qobj.identity_channel(dout), denv=1)
    return Superchannel(din, dout, din, dout, realization=real, label="id")


def dephasing_super(dB0: int, dB1: int) -> Superchannel:
    """Delta[N] = D o N o D."""
    real = PrePost(pre=qobj.dephasing_channel(dB0), post=qobj.dephasing_channel(dB1), denv=1)
    return Superchannel(dB0, dB1, dB0, dB1, realization=real, label="Delta")


def measure_prepare(dims: tuple[int, int, int, int], branches, label: str = "") -> Superchannel:
    """MeasurePrepare superchannel from (affine, coeff, effect, target) tuples."""
    built = []
    for affine, coeff, effect, target in branches:
        if (target.din, target.dout) != (dims[2], dims[3]):
            raise SpecError("Branch target dims do not match superchannel output dims")
        effect = mc.as_matrix(effect)
        if effect.shape != (dims[0] * dims[1],) * 2:
            raise SpecError(f"Branch effect of shape {effect.shape} does not fit input space")
        built.append(MeasurePrepareBranch(float(affine), float(coeff), effect, target))
    return Superchannel(*dims, realization=MeasurePrepare(branches=tuple(built)), label=label)


def compose_super(outer: Superchannel, inner: Superchannel) -> Superchannel:
    """outer o inner: apply ``inner`` first."""
    if (inner.dB0, inner.dB1) != (outer.dA0, outer.dA1):
        raise SpecError("Cannot compose superchannels: inner output and outer input dims differ")
    matrix = to_linear(outer) @ to_linear(inner)
    return Superchannel(
        inner.dA0, inner.dA1, outer.dB0, outer.dB1,
        realization=LinearAction(matrix=matrix),
        label=f"{outer.label}o{inner.label}",
    )


def tensor_super(first: Superchannel, second: Superchannel) -> Superchannel:
    """Theta1 (x) Theta2 acting on channels (A0 A0') -> (A1 A1')."""
    l1 = to_linear(first).reshape(
        first.dB0, first.dB1, first.dB0, first.dB1, first.dA0, first.dA1, first.dA0, first.dA1
    )
    l2 = to_linear(second).reshape(
        second.dB0, second.dB1, second.dB0, second.dB1, second.dA0, second.dA1, second.dA0, second.dA1
    )
    joint = np.einsum("ABCDefgh,IJKLmnop->AIBJCKDLemfngohp", l1, l2)
    nA = first.dA0 * first.dA1 * second.dA0 * second.dA1
    nB = first.dB0 * first.dB1 * second.dB0 * second.dB1
    return Superchannel(
        first.dA0 * second.dA0,
        first.dA1 * second.dA1,
        first.dB0 * second.dB0,
        first.dB1 * second.dB1,
        realization=LinearAction(matrix=joint.reshape(nB * nB, nA * nA)),
        label=f"{first.label}(x){second.label}",
    )


def random_superchannel(
    dims: tuple[int, int, int, int], rng: np.random.Generator, denv: int = 2
) -> Superchannel:
    """PrePost superchannel with random pre and post channels."""
    dA0, dA1, dB0, dB1 = dims
    pre = qobj.random_channel(dB0, dA0 * denv, rng, rank=2)
    post = qobj.random_channel(dA1 * denv, dB1, rng, rank=2)
    return Superchannel(*dims, realization=PrePost(pre=pre, post=post, denv=denv), label="random")


def random_classical_superchannel(
    dims: tuple[int, int, int, int], rng: np.random.Generator, denv: int = 2
) -> Superchannel:
    """PrePost superchannel with classical pre and post; both MISC and DISC."""
    dA0, dA1, dB0, dB1 = dims
    pre = qobj.random_classical_channel(dB0, dA0 * denv, rng)
    post = qobj.random_classical_channel(dA1 * denv, dB1, rng)
    return Superchannel(*dims, realization=PrePost(pre=pre, post=post, denv=denv), label="classical")


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


def _channel_affine_span(din: int, dout: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Base channel I/(din dout) plus a basis of directions with zero output marginal."""
    n = din * dout
    marginal_map = np.stack(
        [qobj.output_marginal(unit, din, dout).reshape(-1) for unit in _unit_basis(n)], axis=1
    )
    kernel = null_space(marginal_map)
    directions = [kernel[:, k].reshape(n, n) for k in range(kernel.shape[1])]
    return np.eye(n, dtype=np.complex128) / n, directions


def admissibility_check(t: Superchannel) -> SuperchannelVerdict:
    """Supermap Choi PSD plus trace preservation on the affine span of channels."""
    tol = settings.admissibility_tol
    choi = supermap_choi(t)
    values, vectors = mc.eig_hermitian(mc.hermitian_part(choi))
    hermitian_gap = mc.hermitian_residual(choi)
    min_eig = float(values[0])

    linear = to_linear(t)
    nB = t.dB0 * t.dB1
    base, directions = _channel_affine_span(t.dA0, t.dA1)

    def _marginal(op: np.ndarray) -> np.ndarray:
        out = (linear @ op.reshape(-1)).reshape(nB, nB)
        return qobj.output_marginal(out, t.dB0, t.dB1)

    tp_residual = float(np.max(np.abs(_marginal(base) - np.eye(t.dB0) / t.dB0)))
    worst_direction = None
    for k, direction in enumerate(directions):
        residual = float(np.max(np.abs(_marginal(direction))))
        if residual > tp_residual:
            tp_residual, worst_direction = residual, k

    residual = max(-min_eig, tp_residual, hermitian_gap)
    passed = residual <= tol
    witness, detail = None, ""
    if not passed:
        if -min_eig >= max(tp_residual, hermitian_gap):
            witness = vectors[:, 0]
            detail = f"supermap Choi has eigenvalue {min_eig:.3e}"
        elif hermitian_gap >= tp_residual:
            detail = f"supermap is not Hermiticity preserving (residual {hermitian_gap:.3e})"
        else:
            witness = "base" if worst_direction is None else directions[worst_direction]
            detail = f"trace preservation fails (residual {tp_residual:.3e})"
    return SuperchannelVerdict(
        prop="admissible",
        passed=passed,
        residual=max(residual, 0.0),
        tolerance=tol,
        criterion=ADMISSIBILITY_CRITERION,
        witness=witness,
        detail=detail,
    )


def _classical_outputs(t: Superchannel):
    """Yield (f, Choi of Theta[Q_f]) for deterministic Q_f, skipping repeated outputs.

    Theta[Q_f] = sum_i Theta[|i f(i)><i f(i)|] / dA0, so for each input index
    only the distinct columns need enumerating.
    """
    linear = to_linear(t)
    nA = t.dA0 * t.dA1
    nB = t.dB0 * t.dB1
    columns = {}
    choices = []
    for i in range(t.dA0):
        distinct = {}
        for j in range(t.dA1):
            idx = (i * t.dA1 + j) * nA + (i * t.dA1 + j)
            column = linear[:, idx] / t.dA0
            columns[(i, j)] = column
            distinct.setdefault(np.round(column, 10).tobytes(), j)
        choices.append(list(distinct.values()))

    cap = settings.enumeration_cap
    size = int(np.prod([len(c) for c in choices]))
    if t.dA0 > cap and size > cap**cap:
        raise EnumerationCapError(
            f"Deterministic enumeration over input dim {t.dA0} ({size} distinct outputs) exceeds cap {cap}"
        )

    seen = set()
    for picks in itertools.product(*choices):
        out = sum(columns[(i, j)] for i, j in enumerate(picks)).reshape(nB, nB)
        key = np.round(out, 10).tobytes()
        if key in seen:
            continue
        seen.add(key)
        yield list(picks), out


def misc_check(t: Superchannel) -> SuperchannelVerdict:
    """Theta[Q] classical for every deterministic classical Q."""
    tol = settings.membership_tol
    worst, witness = 0.0, None
    for f, out in _classical_outputs(t):
        residual = mc.trace_norm(out - mc.diag_part(out))
        if residual > worst:
            worst, witness = residual, list(f)
    passed = worst <= tol
    return SuperchannelVerdict(
        prop="MISC",
        passed=passed,
        residual=worst,
        tolerance=tol,
        witness=None if passed else witness,
        detail="" if passed else f"output on deterministic channel {witness} is coherent",
    )


def disc_check(t: Superchannel) -> SuperchannelVerdict:
    """Delta_B o Theta = Theta o Delta_A on the matrix-unit basis."""
    tol = settings.membership_tol
    nA = t.dA0 * t.dA1
    nB = t.dB0 * t.dB1
    linear = to_linear(t)
    mask_a = np.eye(nA, dtype=bool).reshape(-1)
    mask_b = np.eye(nB, dtype=bool).reshape(-1)
    dephase_after = linear * mask_b[:, None]
    dephase_before = linear * mask_a[None, :]
    diff = dephase_after - dephase_before

    worst, witness = 0.0, None
    for col in range(nA * nA):
        residual = mc.trace_norm(diff[:, col].reshape(nB, nB))
        if residual > worst:
            worst, witness = residual, [int(col // nA), int(col % nA)]
    passed = worst <= tol
    return SuperchannelVerdict(
        prop="DISC",
        passed=passed,
        residual=worst,
        tolerance=tol,
        witness=None if passed else witness,
        detail="" if passed else f"covariance with dephasing fails on matrix unit {witness}",
    )


def delta_misc_check(t: Superchannel, delta: float) -> SuperchannelVerdict:
    """max over deterministic Q of the channel robustness of Theta[Q] is at most delta."""
    from .measures import lr_channel_choi

    if delta < 0:
        raise SpecError(f"delta must be non-negative, got {delta}")
    worst, witness = 0.0, None
    for f, out in _classical_outputs(t):
        if mc.trace_norm(out - mc.diag_part(out)) <= settings.membership_tol:
            continue
        lr = lr_channel_choi(mc.hermitian_part(out), t.dB0, t.dB1).value
        robustness = 2.0**lr - 1.0
        if robustness > worst:
            worst, witness = robustness, list(f)
    passed = worst <= delta + settings.delta_slack
    return SuperchannelVerdict(
        prop="deltaMISC",
        passed=passed,
        residual=worst,
        tolerance=settings.delta_slack,
        delta=delta,
        witness=None if passed else witness,
        detail="" if passed else f"robustness {worst:.6g} exceeds delta {delta}",
    )
