"""Rank-revealing helpers: kernels, ranges, guarded ranks, subspace angles.

All routines work on dense complex arrays and accept degenerate shapes
(zero rows or zero columns) without special casing by the caller.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import RankUnstable


def _svd(M):
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return (np.zeros((M.shape[0], 0), complex), np.zeros(0),
                np.zeros((0, M.shape[1]), complex))
    return np.linalg.svd(M, full_matrices=True)


def _cut(s, rtol, scale):
    # singular values below rtol * max(sigma_max, scale) count as zero
    ref = max(s[0] if s.size else 0.0, scale)
    if ref == 0.0:
        return 0
    return int(np.sum(s >= rtol * ref))


def numerical_rank(M, rtol: float, scale: float = 0.0) -> int:
    """Number of singular values ``>= rtol * max(sigma_max, scale)``.

    ``scale`` supplies the magnitude of the data the matrix was built from,
    so that a product that cancels to rounding noise has rank zero.
    """
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return _cut(np.linalg.svd(M, compute_uv=False), rtol, scale)


def stable_rank(M, rtol: float, what: str = "rank", scale: float = 0.0) -> int:
    """Numerical rank, required to agree at ``rtol*10`` and ``rtol/10``.

    Raises
    ------
    RankUnstable
        If the three ranks differ.
    """
    ranks = [numerical_rank(M, rtol * f, scale) for f in (10.0, 1.0, 0.1)]
    if len(set(ranks)) != 1:
        raise RankUnstable(f"{what} depends on the tolerance: {ranks}", ranks)
    return ranks[1]


def _fix_phase(V):
    # first entry of largest modulus made real positive
    V = np.array(V, dtype=complex)
    for j in range(V.shape[1]):
        col = V[:, j]
        if col.size == 0:
            continue
        i = int(np.argmax(np.abs(col)))
        if abs(col[i]) > 0:
            V[:, j] = col * (abs(col[i]) / col[i])
    return V


def kernel_basis(M, rtol: float = 1e-10, ncols: int | None = None, scale: float = 0.0):
    """Orthonormal basis of ``ker M`` as columns.

    Singular values below ``rtol * sigma_max`` count as zero.  A matrix with
    no rows has the whole domain as kernel; pass ``ncols`` when ``M`` is
    given as an empty list.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        M = M.reshape(0, ncols or 0)
    m, k = M.shape
    if k == 0:
        return np.zeros((0, 0), complex)
    if m == 0:
        return np.eye(k, dtype=complex)
    _, s, Vh = _svd(M)
    r = _cut(s, rtol, scale)
    return _fix_phase(Vh[r:].conj().T)


def range_basis(M, rtol: float = 1e-10, scale: float = 0.0):
    """Orthonormal basis ``Q`` of ``ran M`` and a right factor ``R``.

    ``R`` satisfies ``M @ R == Q`` so that coefficient data attached to the
    columns of ``M`` can be carried over to ``Q``.
    """
    M = np.asarray(M, dtype=complex)
    m, k = M.shape
    if m == 0 or k == 0:
        return np.zeros((m, 0), complex), np.zeros((k, 0), complex)
    U, s, Vh = _svd(M)
    r = _cut(s, rtol, scale)
    Q = U[:, :r]
    R = Vh[:r].conj().T / s[:r]
    # deterministic phases, applied to both factors
    Qf = _fix_phase(Q)
    ph = np.ones(r, complex)
    for j in range(r):
        i = int(np.argmax(np.abs(Q[:, j])))
        ph[j] = Qf[i, j] / Q[i, j]
    return Qf, R * ph


def complement_basis(Q, dim: int, rtol: float = 1e-10):
    """Orthonormal basis of the orthogonal complement of ``ran Q`` in C^dim."""
    Q = np.asarray(Q, dtype=complex)
    if dim == 0:
        return np.zeros((0, 0), complex)
    Q = Q.reshape(dim, -1)
    if Q.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    return kernel_basis(Q.conj().T, rtol)


def lstsq(M, b, rtol: float = 1e-10):
    """Minimum-norm least-squares solution via complete orthogonal decomposition."""
    M = np.asarray(M, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if M.shape[1] == 0:
        return np.zeros((0,) + b.shape[1:], complex)
    if M.shape[0] == 0:
        return np.zeros((M.shape[1],) + b.shape[1:], complex)
    x, *_ = scipy.linalg.lstsq(M, b, cond=rtol, lapack_driver="gelsy")
    return x


def orthonormalize(V, rtol: float = 1e-10):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Columns whose remaining norm falls below ``rtol`` times the largest
    input column norm are dropped.
    """
    V = np.array(V, dtype=complex)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[1] == 0:
        return V
    scale = max(np.linalg.norm(V, axis=0).max(), np.finfo(float).tiny)
    out = []
    for j in range(V.shape[1]):
        v = V[:, j].copy()
        for _ in range(2):
            for q in out:
                v -= q * (q.conj() @ v)
        nv = np.linalg.norm(v)
        if nv > rtol * scale:
            out.append(v / nv)
    if not out:
        return np.zeros((V.shape[0], 0), complex)
    return np.column_stack(out)


def max_principal_angle(A, B) -> float:
    """Largest principal angle between ``ran A`` and ``ran B`` (radians).

    Returns 0 for two trivial subspaces and ``pi/2`` when exactly one is
    trivial or the dimensions differ.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape[1] == 0 and B.shape[1] == 0:
        return 0.0
    if A.shape[1] == 0 or B.shape[1] == 0 or A.shape[1] != B.shape[1]:
        return float(np.pi / 2)
    return float(np.max(scipy.linalg.subspace_angles(A, B)))


def containment_defect(A, B) -> float:
    """``max || (I - P_B) a ||`` over orthonormal columns ``a`` of ``A``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape[1] == 0:
        return 0.0
    R = A - B @ (B.conj().T @ A) if B.shape[1] else A
    return float(np.max(np.linalg.norm(R, axis=0)))
