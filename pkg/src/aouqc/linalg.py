"""Dense hermitian matrix helpers and the structured tensor operators.

Everything here is a pure function on numpy arrays.  Matrices over a
vector space are handled elsewhere (see :mod:`aouqc.ordered`); this module
only deals with scalar complex matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class Tolerance:
    """Numerical slack used by every positivity and residual test.

    ``psd_eps`` bounds how negative a minimum eigenvalue may be and
    ``affine_eps`` bounds residual norms.  Both are relative: the effective
    slack is ``eps * (1 + scale)`` where ``scale`` is the norm of the data
    being tested.
    """

    psd_eps: float = 1e-9
    affine_eps: float = 1e-7

    def __post_init__(self):
        if self.psd_eps < 0 or self.affine_eps < 0:
            raise ValueError("tolerances must be nonnegative")

    def psd_slack(self, scale: float = 0.0) -> float:
        return self.psd_eps * (1.0 + scale)

    def affine_slack(self, scale: float = 0.0) -> float:
        return self.affine_eps * (1.0 + scale)


DEFAULT_TOL = Tolerance()


def identity(n: int) -> np.ndarray:
    return np.eye(n)


def ones(n: int) -> np.ndarray:
    """The all-ones matrix J_n."""
    return np.ones((n, n))


def kron(*mats) -> np.ndarray:
    """Kronecker product of any number of matrices, left to right."""
    if not mats:
        return np.ones((1, 1))
    return reduce(np.kron, (np.atleast_2d(np.asarray(m)) for m in mats))


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def direct_sum(a, b) -> np.ndarray:
    """Block-diagonal matrix ``[[a, 0], [0, b]]``."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    _require_square(a, "A")
    _require_square(b, "B")
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n + m, n + m), dtype=np.result_type(a, b))
    out[:n, :n] = a
    out[n:, n:] = b
    return out


def permute_factors(x: np.ndarray, dims, perm) -> np.ndarray:
    """Reorder the tensor factors of a square matrix on ``C^dims[0] ⊗ ...``.

    Factor ``perm[i]`` of the input becomes factor ``i`` of the output, so
    ``permute_factors(kron(A, B), (n, m), (1, 0)) == kron(B, A)``.
    """
    dims = tuple(int(d) for d in dims)
    perm = tuple(perm)
    size = int(np.prod(dims))
    x = np.asarray(x)
    if x.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got {x.shape}")
    if sorted(perm) != list(range(len(dims))):
        raise ValueError(f"{perm} is not a permutation of {len(dims)} factors")
    k = len(dims)
    t = x.reshape(dims + dims)
    t = t.transpose(tuple(perm) + tuple(k + p for p in perm))
    return t.reshape(size, size)


def canonical_shuffle(x: np.ndarray, n: int, m: int) -> np.ndarray:
    """The shuffle M_n ⊗ M_m -> M_m ⊗ M_n sending A ⊗ B to B ⊗ A."""
    return permute_factors(x, (n, m), (1, 0))


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(
        a, a.conj().T, rtol=0.0, atol=atol)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.asarray(a).conj().T)


def min_eig(a: np.ndarray) -> float:
    """Smallest eigenvalue of a hermitian matrix (empty matrix -> +inf)."""
    a = np.asarray(a)
    if a.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(hermitian_part(a))[0])


def spectral_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_psd(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the minimum eigenvalue is at least ``-psd_slack``."""
    a = np.atleast_2d(np.asarray(a))
    if not is_hermitian(a, atol=max(HERMITIAN_ATOL, 1e-12 * spectral_norm(a))):
        raise ValueError("is_psd needs a hermitian matrix")
    return min_eig(a) >= -tol.psd_slack(spectral_norm(a))


def psd_projection(a: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped)."""
    w, v = np.linalg.eigh(hermitian_part(a))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def column_swap_permutation(n: int) -> np.ndarray:
    """The 4n x 4n permutation exchanging columns j and j+2n, j = 2, 4, ..., 2n.

    Column indices are 1-based as in the usual matrix notation.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    w = np.eye(4 * n)
    for j in range(2, 2 * n + 1, 2):
        a, b = j - 1, j - 1 + 2 * n
        w[:, [a, b]] = w[:, [b, a]]
    return w


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    a = rng.standard_normal((n, n))
    if not real:
        a = a + 1j * rng.standard_normal((n, n))
    return hermitian_part(a)


def exact_rank(matrix) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination.

    Entries must be integers or :class:`fractions.Fraction` (floats are
    converted exactly, so only pass floats that are exactly representable
    values you mean).
    """
    rows = [[Fraction(v) for v in row] for row in np.asarray(matrix, dtype=object)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        prow = rows[rank]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col]
            if f:
                f = f / pv
                rows[r] = [a - f * b for a, b in zip(rows[r], prow)]
        rank += 1
        if rank == len(rows):
            break
    return rank
