"""Dense complex linear algebra shared by every other service.

All functions take and return ``numpy.ndarray`` values and never mutate their
inputs. Hermitian inputs are symmetrized as (M + M^dagger)/2 before any
spectral call.
"""

import logging
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from ..config import settings
from ..errors import SpecError

logger = logging.getLogger(__name__)


def as_matrix(m) -> np.ndarray:
    """Coerce input to a 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise SpecError(f"Expected a matrix, got array with shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Return (M + M^dagger)/2."""
    return (m + dagger(m)) / 2


def hermitian_residual(m: np.ndarray) -> float:
    """Largest entrywise deviation |M - M^dagger|."""
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - dagger(m))))


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not factors:
        raise SpecError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=np.complex128) for f in factors))


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise SpecError(
            f"Subsystem dimensions {list(dims)} (product {total}) do not match matrix shape {m.shape}"
        )


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Args:
        m: Square matrix on the tensor product of ``dims``.
        dims: Subsystem sizes, in tensor order.
        keep: Indices of the subsystems that survive, in any order; the result
            keeps them in their original tensor order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise SpecError(f"Subsystem index out of range in keep={keep} for dims={dims}")

    n = len(dims)
    tensor = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # Trace from the highest index down so remaining axis positions stay valid
    current = n
    for axis in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
        current -= 1
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(kept_dim, kept_dim)


def permute_systems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor k is input factor ``perm[k]``."""
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise SpecError(f"Invalid permutation {list(perm)} for {n} subsystems")
    tensor = m.reshape(dims + dims)
    axes = list(perm) + [p + n for p in perm]
    total = m.shape[0]
    return tensor.transpose(axes).reshape(total, total)


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns:
        (eigenvalues ascending, eigenvectors as columns).

    Raises:
        SpecError: if ``m`` is not Hermitian within the configured tolerance.
    """
    m = as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    residual = hermitian_residual(m)
    if residual > settings.hermitian_tol * scale:
        raise SpecError(f"Matrix is not Hermitian (residual {residual:.3e})")
    values, vectors = np.linalg.eigh(hermitian_part(m))
    return values, vectors


def min_eigenvalue(m: np.ndarray) -> float:
    values, _ = eig_hermitian(m)
    return float(values[0]) if values.size else 0.0


def psd_check(m: np.ndarray, tol: float | None = None) -> bool:
    """True iff the minimum eigenvalue is at least ``-tol``."""
    tol = settings.psd_tol if tol is None else tol
    return min_eigenvalue(m) >= -tol


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix, clipping round-off negatives."""
    values, vectors = eig_hermitian(m)
    root = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * root) @ dagger(vectors)


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def is_density(m: np.ndarray, tol: float = 1e-9) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    if hermitian_residual(m) > max(tol, settings.hermitian_tol):
        return False
    return abs(np.trace(m).real - 1.0) <= tol and min_eigenvalue(m) >= -tol


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared fidelity F = ||sqrt(rho) sqrt(sigma)||_1^2 of two states."""
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise SpecError(f"Fidelity needs equal shapes, got {rho.shape} and {sigma.shape}")
    if not (is_density(rho) and is_density(sigma)):
        raise SpecError("Fidelity is defined on density matrices (PSD, unit trace)")
    value = trace_norm(psd_sqrt(rho) @ psd_sqrt(sigma)) ** 2
    return float(min(1.0, max(0.0, value)))


def diag_part(m: np.ndarray) -> np.ndarray:
    """Keep the diagonal, zero everything else (complete dephasing)."""
    return np.diag(np.diag(m))


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    unit = np.zeros((n, n), dtype=np.complex128)
    unit[i, j] = 1.0
    return unit


def ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[i] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, np.conj(v))


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major vectorization."""
    return np.asarray(m).reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return np.asarray(v).reshape(rows, cols)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return hermitian_part(g)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random state from the induced (Ginibre) measure."""
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real
