"""Quantum states and channels as normalized Choi matrices.

Conventions used throughout:

* ``J`` is the normalized Choi matrix (trace 1) on A0 (x) A1, basis index
  ``i * dout + j`` for input ``i`` and output ``j``; ``C = din * J``.
* ``N(rho)[j, l] = sum_{i,k} C[(i, j), (k, l)] * rho[i, k]``.
* Superoperators act on row-major vectorizations.
"""

import itertools
import logging
from typing import Iterator, Sequence

import numpy as np
from scipy.stats import unitary_group

from ..config import settings
from ..errors import SpecError
from ..models.channel import QuantumChannel, QuantumState
from ..models.reports import ChannelClassVerdict
from . import matcore as mc

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def make_state(density, label: str = "") -> QuantumState:
    """Validate a density matrix and wrap it."""
    rho = mc.as_matrix(density)
    if rho.shape[0] != rho.shape[1]:
        raise SpecError(f"Density matrix must be square, got {rho.shape}")
    if not mc.is_density(rho, tol=settings.cptp_tol):
        raise SpecError("Density matrix must be Hermitian, PSD and of unit trace")
    return QuantumState(dim=rho.shape[0], density=mc.hermitian_part(rho), label=label)


def maximally_coherent_state(d: int) -> np.ndarray:
    """psi+_d = (1/d) sum_{j,k} |j><k|."""
    return np.full((d, d), 1.0 / d, dtype=np.complex128)


def max_entangled_state(d: int) -> np.ndarray:
    """phi+ on C^d (x) C^d, normalized."""
    v = np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)
    return mc.projector(v)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# Choi calculus
# ---------------------------------------------------------------------------


def output_marginal(choi: np.ndarray, din: int, dout: int) -> np.ndarray:
    """Tr over the output leg; equals I/din for a CPTP normalized Choi."""
    return mc.partial_trace(choi, [din, dout], keep=[0])


def cptp_residual(choi: np.ndarray, din: int, dout: int) -> tuple[float, float]:
    """(negative-eigenvalue magnitude, marginal deviation) of a normalized Choi."""
    neg = max(0.0, -mc.min_eigenvalue(choi))
    marginal = output_marginal(choi, din, dout) - np.eye(din) / din
    return neg, float(np.max(np.abs(marginal))) if marginal.size else 0.0


def make_channel(choi, din: int, dout: int, label: str = "", validate: bool = True) -> QuantumChannel:
    """Wrap a normalized Choi matrix as a channel, validating CPTP by default."""
    choi = mc.as_matrix(choi)
    if choi.shape != (din * dout, din * dout):
        raise SpecError(
            f"Choi matrix shape {choi.shape} does not match din={din}, dout={dout}"
        )
    if mc.hermitian_residual(choi) > settings.cptp_tol:
        raise SpecError("Choi matrix is not Hermitian")
    choi = mc.hermitian_part(choi)
    if validate:
        neg, marginal = cptp_residual(choi, din, dout)
        if neg > settings.cptp_tol:
            raise SpecError(f"Choi matrix is not PSD (min eigenvalue {-neg:.3e})")
        if marginal > settings.cptp_tol:
            raise SpecError(f"Channel is not trace preserving (marginal residual {marginal:.3e})")
    return QuantumChannel(din=din, dout=dout, choi=choi, label=label)


def superop_from_choi(choi: np.ndarray, din: int, dout: int) -> np.ndarray:
    """Row-major superoperator S with vec(N(rho)) = S vec(rho)."""
    c4 = (din * np.asarray(choi)).reshape(din, dout, din, dout)
    return c4.transpose(1, 3, 0, 2).reshape(dout * dout, din * din)


def choi_from_superop(superop: np.ndarray, din: int, dout: int) -> np.ndarray:
    s4 = np.asarray(superop).reshape(dout, dout, din, din)
    return s4.transpose(2, 0, 3, 1).reshape(din * dout, din * dout) / din


def superop(n: QuantumChannel) -> np.ndarray:
    return superop_from_choi(n.choi, n.din, n.dout)


def apply_choi(choi: np.ndarray, din: int, dout: int, rho: np.ndarray) -> np.ndarray:
    """Apply the linear map with normalized Choi ``choi`` to any operator."""
    c4 = (din * np.asarray(choi)).reshape(din, dout, din, dout)
    return np.einsum("ijkl,ik->jl", c4, np.asarray(rho))


def apply(n: QuantumChannel, rho) -> QuantumState:
    """N(rho) for a QuantumState or raw density matrix."""
    density = rho.density if isinstance(rho, QuantumState) else mc.as_matrix(rho)
    if density.shape != (n.din, n.din):
        raise SpecError(f"Input of shape {density.shape} does not fit channel input dim {n.din}")
    out = apply_choi(n.choi, n.din, n.dout, density)
    return QuantumState(dim=n.dout, density=mc.hermitian_part(out))


def tensor_choi(a: np.ndarray, dims_a: tuple[int, int], b: np.ndarray, dims_b: tuple[int, int]) -> np.ndarray:
    """Choi of a (x) b, reordered to (in_a, in_b, out_a, out_b)."""
    din_a, dout_a = dims_a
    din_b, dout_b = dims_b
    return mc.permute_systems(np.kron(a, b), [din_a, dout_a, din_b, dout_b], [0, 2, 1, 3])


def tensor(n: QuantumChannel, m: QuantumChannel) -> QuantumChannel:
    choi = tensor_choi(n.choi, (n.din, n.dout), m.choi, (m.din, m.dout))
    label = f"{n.label}(x){m.label}" if n.label and m.label else ""
    return QuantumChannel(din=n.din * m.din, dout=n.dout * m.dout, choi=choi, label=label)


def compose(n: QuantumChannel, m: QuantumChannel) -> QuantumChannel:
    """n o m: apply ``m`` first."""
    if m.dout != n.din:
        raise SpecError(f"Cannot compose: inner dims {m.dout} and {n.din} differ")
    s = superop(n) @ superop(m)
    choi = choi_from_superop(s, m.din, n.dout)
    return QuantumChannel(din=m.din, dout=n.dout, choi=mc.hermitian_part(choi))


def channel_from_map(fn, din: int, dout: int, label: str = "") -> QuantumChannel:
    """Channel whose action on operators is the linear function ``fn``."""
    choi = np.zeros((din * dout, din * dout), dtype=np.complex128)
    for i in range(din):
        for k in range(din):
            choi[i * dout:(i + 1) * dout, k * dout:(k + 1) * dout] = fn(mc.matrix_unit(din, i, k))
    return make_channel(choi / din, din, dout, label=label)


def dephase_choi(choi: np.ndarray) -> np.ndarray:
    """Choi of D o N o D: the diagonal part."""
    return mc.diag_part(choi)


def dephased(n: QuantumChannel) -> QuantumChannel:
    """Delta[N] = D o N o D."""
    return QuantumChannel(din=n.din, dout=n.dout, choi=dephase_choi(n.choi), label=f"D[{n.label}]")


# ---------------------------------------------------------------------------
# Kraus view
# ---------------------------------------------------------------------------


def choi_of_kraus(kraus: Sequence[np.ndarray], din: int, dout: int, label: str = "") -> QuantumChannel:
    """Normalized Choi (1/din) sum_k |K_k>><<K_k| from a TP Kraus set."""
    ops = [mc.as_matrix(k) for k in kraus]
    if not ops:
        raise SpecError("Kraus set is empty")
    for k in ops:
        if k.shape != (dout, din):
            raise SpecError(f"Kraus operator shape {k.shape} is not ({dout}, {din})")
    completeness = sum(mc.dagger(k) @ k for k in ops)
    residual = float(np.max(np.abs(completeness - np.eye(din))))
    if residual > settings.cptp_tol:
        raise SpecError(f"Kraus set is not trace preserving (residual {residual:.3e})")

    choi = np.zeros((din * dout, din * dout), dtype=np.complex128)
    for k in ops:
        v = k.T.reshape(-1)
        choi += np.outer(v, np.conj(v))
    return make_channel(choi / din, din, dout, label=label)


def kraus_of_channel(n: QuantumChannel, cutoff: float = 1e-12) -> list[np.ndarray]:
    values, vectors = mc.eig_hermitian(n.din * n.choi)
    ops = []
    for value, v in zip(values, vectors.T):
        if value > cutoff:
            ops.append(np.sqrt(value) * v.reshape(n.din, n.dout).T)
    return ops


# ---------------------------------------------------------------------------
# Fixed constructions
# ---------------------------------------------------------------------------


def qft_matrix(d: int) -> np.ndarray:
    """F_d = (1/sqrt d) sum_{j,k} exp(2 pi i jk/d) |j><k|."""
    if d < 1:
        raise SpecError(f"QFT dimension must be positive, got {d}")
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def unitary_channel(u, label: str = "") -> QuantumChannel:
    u = mc.as_matrix(u)
    d = u.shape[0]
    if u.shape != (d, d):
        raise SpecError(f"Unitary must be square, got {u.shape}")
    residual = float(np.max(np.abs(u @ mc.dagger(u) - np.eye(d))))
    if residual > settings.cptp_tol:
        raise SpecError(f"Matrix is not unitary (residual {residual:.3e})")
    v = u.T.reshape(-1)
    return QuantumChannel(din=d, dout=d, choi=np.outer(v, np.conj(v)) / d, label=label)


def qft_channel(d: int) -> QuantumChannel:
    if d < 2:
        raise SpecError(f"QFT channel needs d >= 2, got {d}")
    return unitary_channel(qft_matrix(d), label=f"F_{d}")


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel(din=d, dout=d, choi=max_entangled_state(d), label=f"id_{d}")


def dephasing_channel(d: int) -> QuantumChannel:
    choi = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        choi[i * d + i, i * d + i] = 1.0 / d
    return QuantumChannel(din=d, dout=d, choi=choi, label=f"D_{d}")


def replacement_channel(d: int, dout: int | None = None) -> QuantumChannel:
    """R_d(.) = Tr(.) psi+_d, optionally from a ``d``-dim input to ``dout`` output."""
    dout = d if dout is None else dout
    choi = np.kron(np.eye(d) / d, maximally_coherent_state(dout))
    return QuantumChannel(din=d, dout=dout, choi=choi, label=f"R_{dout}")


def constant_channel(din: int, sigma: np.ndarray, label: str = "") -> QuantumChannel:
    """Replacement channel that always prepares ``sigma``."""
    sigma = mc.as_matrix(sigma)
    return QuantumChannel(din=din, dout=sigma.shape[0], choi=np.kron(np.eye(din) / din, sigma), label=label)


def uniform_classical_channel(din: int, dout: int) -> QuantumChannel:
    """Classical channel with Choi I/(din dout): outputs I/dout."""
    choi = np.eye(din * dout, dtype=np.complex128) / (din * dout)
    return QuantumChannel(din=din, dout=dout, choi=choi, label="uniform")


def deterministic_channel(f: Sequence[int], din: int, dout: int) -> QuantumChannel:
    """Classical channel |i><i| -> |f(i)><f(i)| (after dephasing the input)."""
    f = [int(x) for x in f]
    if len(f) != din:
        raise SpecError(f"Deterministic map needs {din} entries, got {len(f)}")
    if any(x < 0 or x >= dout for x in f):
        raise SpecError(f"Deterministic map {f} has values outside range(0, {dout})")
    choi = np.zeros((din * dout, din * dout), dtype=np.complex128)
    for i, fi in enumerate(f):
        choi[i * dout + fi, i * dout + fi] = 1.0 / din
    return QuantumChannel(din=din, dout=dout, choi=choi, label=f"det{tuple(f)}")


def classical_channel_from_stochastic(p: np.ndarray) -> QuantumChannel:
    """Classical channel with transition probabilities p[i, j] = P(j | i)."""
    p = np.asarray(p, dtype=float)
    din, dout = p.shape
    if np.any(p < -settings.cptp_tol) or np.max(np.abs(p.sum(axis=1) - 1)) > settings.cptp_tol:
        raise SpecError("Transition matrix must be row stochastic")
    return QuantumChannel(din=din, dout=dout, choi=np.diag(p.reshape(-1) / din).astype(np.complex128))


def deterministic_maps(din: int, dout: int) -> Iterator[tuple[int, ...]]:
    """All dout**din functions range(din) -> range(dout)."""
    return itertools.product(range(dout), repeat=din)


def deterministic_channels(din: int, dout: int) -> Iterator[QuantumChannel]:
    for f in deterministic_maps(din, dout):
        yield deterministic_channel(f, din, dout)


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary."""
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1), dtype=np.complex128)


def random_channel(din: int, dout: int, rng: np.random.Generator, rank: int | None = None) -> QuantumChannel:
    """Channel from a random Stinespring isometry with ``rank`` Kraus operators."""
    rank = din * dout if rank is None else rank
    g = rng.normal(size=(dout * rank, din)) + 1j * rng.normal(size=(dout * rank, din))
    isometry, _ = np.linalg.qr(g)
    kraus = [isometry[k * dout:(k + 1) * dout, :] for k in range(rank)]
    return choi_of_kraus(kraus, din, dout, label="random")


def random_unitary_channel(d: int, rng: np.random.Generator) -> QuantumChannel:
    return unitary_channel(random_unitary(d, rng), label="random-unitary")


def random_classical_channel(din: int, dout: int, rng: np.random.Generator) -> QuantumChannel:
    p = rng.dirichlet(np.ones(dout), size=din)
    return classical_channel_from_stochastic(p)


# ---------------------------------------------------------------------------
# Channel classes
# ---------------------------------------------------------------------------


def _verdict(name: str, residual: float, witness, tol: float) -> ChannelClassVerdict:
    passed = residual <= tol
    return ChannelClassVerdict(
        channel_class=name,
        passed=passed,
        residual=float(residual),
        tolerance=tol,
        witness=None if passed else witness,
    )


def cptp_check(n: QuantumChannel) -> ChannelClassVerdict:
    neg, marginal = cptp_residual(n.choi, n.din, n.dout)
    residual = max(neg, marginal)
    witness = "psd" if neg >= marginal else "marginal"
    return _verdict("CPTP", residual, witness, settings.cptp_tol)


def classical_check(n: QuantumChannel) -> ChannelClassVerdict:
    """Pass iff J^N equals its diagonal part (N = D o N o D)."""
    off = n.choi - mc.diag_part(n.choi)
    residual = mc.trace_norm(off)
    witness = None
    if off.size:
        r, c = np.unravel_index(int(np.argmax(np.abs(off))), off.shape)
        witness = [int(r), int(c)]
    return _verdict("classical", residual, witness, settings.membership_tol)


def _units(d: int) -> Iterator[tuple[int, int, np.ndarray]]:
    for i in range(d):
        for k in range(d):
            yield i, k, mc.matrix_unit(d, i, k)


def mio_check(n: QuantumChannel) -> ChannelClassVerdict:
    """N(|i><i|) incoherent for every basis state."""
    worst, witness = 0.0, None
    for i in range(n.din):
        out = apply_choi(n.choi, n.din, n.dout, mc.matrix_unit(n.din, i, i))
        residual = mc.trace_norm(out - mc.diag_part(out))
        if residual > worst:
            worst, witness = residual, [i, i]
    return _verdict("MIO", worst, witness, settings.membership_tol)


def dio_check(n: QuantumChannel) -> ChannelClassVerdict:
    """N o D = D o N on every matrix unit."""
    worst, witness = 0.0, None
    for i, k, unit in _units(n.din):
        lhs = apply_choi(n.choi, n.din, n.dout, mc.diag_part(unit))
        rhs = mc.diag_part(apply_choi(n.choi, n.din, n.dout, unit))
        residual = mc.trace_norm(lhs - rhs)
        if residual > worst:
            worst, witness = residual, [i, k]
    return _verdict("DIO", worst, witness, settings.membership_tol)


def di_check(n: QuantumChannel) -> ChannelClassVerdict:
    """D o N = D o N o D on every matrix unit."""
    worst, witness = 0.0, None
    for i, k, unit in _units(n.din):
        lhs = mc.diag_part(apply_choi(n.choi, n.din, n.dout, unit))
        rhs = mc.diag_part(apply_choi(n.choi, n.din, n.dout, mc.diag_part(unit)))
        residual = mc.trace_norm(lhs - rhs)
        if residual > worst:
            worst, witness = residual, [i, k]
    return _verdict("DI", worst, witness, settings.membership_tol)


CLASS_CHECKS = {
    "CPTP": cptp_check,
    "classical": classical_check,
    "MIO": mio_check,
    "DIO": dio_check,
    "DI": di_check,
}


def class_verdicts(n: QuantumChannel) -> list[ChannelClassVerdict]:
    return [check(n) for check in CLASS_CHECKS.values()]
