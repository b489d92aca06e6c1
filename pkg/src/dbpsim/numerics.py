"""Complex dense linear algebra kernels for detection and precoding.

All routines work on square/rectangular ``numpy`` arrays of ``complex128``.
Hermitian results are built by computing the lower triangle and mirroring it,
so symmetry holds exactly (bit level), not just to round-off.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

# Pivot at or below PIVOT_RTOL * max(diag(A)) means "not positive definite".
PIVOT_RTOL = 1e-14
# Allowed relative asymmetry of a matrix claimed Hermitian.
HERMITIAN_RTOL = 1e-10


def _as_complex_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a 2-D array, got shape {a.shape}")
    return a


def mirror_hermitian(a):
    """Rebuild ``a`` from its lower triangle so that ``a == a.conj().T`` exactly."""
    lower = np.tril(a, -1)
    return lower + lower.conj().T + np.diag(a.diagonal().real)


def gram(h):
    """Gram matrix ``H^H H`` of a (tall or square) channel block.

    The result is Hermitian positive semidefinite by construction: the
    product's lower triangle is mirrored onto the upper one, and the
    diagonal is forced real.
    """
    h = _as_complex_matrix(h, "H")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel block contains non-finite entries")
    return mirror_hermitian(h.conj().T @ h)


def _cholesky_reference(a, threshold):
    """Column-by-column factorization; pinpoints the offending pivot."""
    n = a.shape[0]
    l = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j].real - np.real(l[j, :j] @ l[j, :j].conj())
        if pivot <= threshold:
            raise NotPositiveDefinite(j, pivot, threshold)
        l[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            l[j + 1 :, j] = (a[j + 1 :, j] - l[j + 1 :, :j] @ l[j, :j].conj()) / l[
                j, j
            ].real
    return l


def cholesky(a):
    """Lower-triangular ``L`` with ``L L^H = A`` for Hermitian positive definite ``A``.

    No pivoting. Raises :class:`NotPositiveDefinite` when a pivot falls at or
    below ``PIVOT_RTOL * max(diag(A))``, which flags singular or indefinite
    inputs (for example a zero-forcing Gram with too few antennas).
    """
    a = _as_complex_matrix(a, "A")
    n, m = a.shape
    if n != m:
        raise DimensionMismatch(f"A must be square, got {a.shape}")
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(np.abs(a - a.conj().T)) > HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian to within 1e-10 relative")

    threshold = PIVOT_RTOL * np.max(a.diagonal().real)
    try:
        l = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError:
        # redo column by column to report the pivot that went non-positive
        return _cholesky_reference(a, threshold)
    pivots = l.diagonal().real ** 2
    bad = np.flatnonzero(pivots <= threshold)
    if bad.size:
        j = int(bad[0])
        raise NotPositiveDefinite(j, float(pivots[j]), threshold)
    return l


def solve_cholesky(l, b):
    """Solve ``(L L^H) x = b`` by forward then backward substitution.

    ``b`` may be a vector or a matrix of stacked right-hand-side columns.
    """
    l = _as_complex_matrix(l, "L")
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != l.shape[0]:
        raise DimensionMismatch(
            f"right-hand side has {b.shape[0]} rows, factor is {l.shape[0]}x{l.shape[1]}"
        )
    z = solve_triangular(l, b, lower=True, check_finite=False)
    return solve_triangular(l, z, lower=True, trans="C", check_finite=False)


def hermitian_inverse(a):
    """Explicit inverse of a Hermitian positive definite matrix via Cholesky.

    Equivalent to solving against identity columns; the result is mirrored to
    be exactly Hermitian.
    """
    l = cholesky(a)
    inv = solve_cholesky(l, np.eye(a.shape[0], dtype=np.complex128))
    return mirror_hermitian(inv)


def inverse_diagonal_from_factor(l):
    """Real diagonal of ``(L L^H)^{-1}`` without forming the full inverse.

    Uses ``diag(A^{-1})_u = || column u of L^{-1} ||^2``.
    """
    linv = solve_triangular(
        l, np.eye(l.shape[0], dtype=np.complex128), lower=True, check_finite=False
    )
    return np.sum(linv.real**2 + linv.imag**2, axis=0)
