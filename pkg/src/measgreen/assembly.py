"""The finite block system for global solutions.

Writing ``c_j = u^+(x_j)`` and gluing the gap solutions with the jump
relation at every atom gives

    BB(lam) [c_0; ...; c_N] = F0(f, lam),

``BB(lam)`` of size ``nN x n(N+1)``.  Row block ``k`` (atom ``x_k``) holds
``-B_-(x_k, lam) U_{k-1}(x_k, lam)`` in column block ``k-1`` and
``B_+(x_k, lam)`` in column block ``k``.  ``DD(lam)`` maps the same vector to
the balanced atom values ``(u(x_1), ..., u(x_N))``.  ``BB_m``/``DD_m`` drop
the first and last column blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import EmptyPartition, InternalDisagreement, NotInKernel, Unsolvable
from .model import SystemSpec, jump_matrices
from .propagate import (BalancedPath, RightHandSide, gap_integral, propagate_path,
                        transfer_matrix)
from .tolerances import Tolerances, resolve


@dataclass(frozen=True, eq=False)
class BlockSystem:
    lam: complex
    n: int
    N: int
    Bplus: tuple
    Bminus: tuple
    U: tuple
    B: np.ndarray
    D: np.ndarray

    @property
    def Bm(self) -> np.ndarray:
        return self.B[:, self.n:self.n * self.N]

    @property
    def Dm(self) -> np.ndarray:
        return self.D[:, self.n:self.n * self.N]

    @property
    def calB(self) -> np.ndarray:
        return _blockdiag(self.Bplus)

    @property
    def calU(self) -> np.ndarray:
        return _blockdiag(self.U)


@dataclass(frozen=True, eq=False)
class RhsVector:
    F0: np.ndarray
    R: np.ndarray
    I: np.ndarray
    I_tilde: np.ndarray
    I_last: np.ndarray


def _blockdiag(blocks):
    n = blocks[0].shape[0]
    out = np.zeros((n * len(blocks), n * len(blocks)), complex)
    for k, blk in enumerate(blocks):
        out[k * n:(k + 1) * n, k * n:(k + 1) * n] = blk
    return out


def assemble(spec: SystemSpec, lam: complex, f: RightHandSide | None = None):
    """Build ``BlockSystem`` and, when ``f`` is given, ``RhsVector``."""
    if spec.N == 0:
        raise EmptyPartition("system has no atoms")
    n, N = spec.n, spec.N
    lam = complex(lam)
    Bp, Bm, Us = [], [], []
    B = np.zeros((n * N, n * (N + 1)), complex)
    D = np.zeros_like(B)
    for k, at in enumerate(spec.atoms):
        jp = jump_matrices(at, spec.J, lam)
        U = transfer_matrix(spec, k, lam)
        Bp.append(jp.Bplus)
        Bm.append(jp.Bminus)
        Us.append(U)
        rows = slice(k * n, (k + 1) * n)
        B[rows, k * n:(k + 1) * n] = -jp.Bminus @ U
        B[rows, (k + 1) * n:(k + 2) * n] = jp.Bplus
        D[rows, k * n:(k + 1) * n] = 0.5 * U
        D[rows, (k + 1) * n:(k + 2) * n] = 0.5 * np.eye(n)
    system = BlockSystem(lam, n, N, tuple(Bp), tuple(Bm), tuple(Us), B, D)
    if f is None:
        return system, None
    Is = [gap_integral(spec, j, lam, f) for j in range(N + 1)]
    R = np.concatenate([at.dw @ f.atoms[k] for k, at in enumerate(spec.atoms)])
    I = np.concatenate(Is[:N])
    F0 = R.copy()
    for k in range(N):
        F0[k * n:(k + 1) * n] += Bm[k] @ Us[k] @ (spec.Jinv @ Is[k])
    I_tilde = np.zeros(n * N, complex)
    I_tilde[-n:] = Is[N]
    return system, RhsVector(F0, R, I, I_tilde, Is[N])


def kernel_basis(M, tol_rank: float = 1e-10, ncols: int | None = None):
    """Orthonormal basis of ``ker M`` (SVD, deterministic phases)."""
    return linalg.kernel_basis(M, tol_rank, ncols)


@dataclass(frozen=True, eq=False)
class SolutionSet:
    spec: SystemSpec
    lam: complex
    f: RightHandSide
    particular: np.ndarray | None
    kernel: np.ndarray

    @property
    def dimension(self) -> int:
        return self.kernel.shape[1]

    def path(self, coeffs=None) -> BalancedPath:
        """Particular solution plus ``kernel @ coeffs`` as a path."""
        ut = np.zeros(self.spec.n * (self.spec.N + 1), complex)
        if self.particular is not None:
            ut = ut + self.particular
        if coeffs is not None:
            ut = ut + self.kernel @ np.asarray(coeffs, dtype=complex)
        return propagate_path(self.spec, self.lam, self.f, ut)

    def kernel_path(self, i: int) -> BalancedPath:
        return propagate_path(self.spec, self.lam, None, self.kernel[:, i])


def _consistent(M, rhs, tol):
    x = linalg.lstsq(M, rhs, tol.rank)
    res = np.linalg.norm(M @ x - rhs) if M.shape[0] else 0.0
    scale = np.linalg.norm(M, 2) * np.linalg.norm(x) + np.linalg.norm(rhs) if M.size else np.linalg.norm(rhs)
    return x, res <= tol.lin * scale, res


def _witness(M, rhs, tol):
    V = linalg.kernel_basis(M.conj().T, tol.rank) if M.shape[1] else np.eye(M.shape[0], dtype=complex)
    ip = V.conj().T @ rhs
    keep = np.abs(ip) > tol.lin * max(np.linalg.norm(rhs), 1e-300)
    return V[:, keep], ip[keep]


def solve_nonhomogeneous(spec: SystemSpec, lam: complex, f: RightHandSide | None = None,
                         tol: Tolerances | None = None) -> SolutionSet:
    """All solutions of ``J u' + (q - lam w) u = w f`` on ``(a, b)``.

    Raises
    ------
    Unsolvable
        With a basis of ``ker BB(lam)^*`` vectors not orthogonal to ``F0``.
    """
    tol = resolve(tol)
    f = RightHandSide.zeros(spec) if f is None else f
    system, rhs = assemble(spec, lam, f)
    x, ok, res = _consistent(system.B, rhs.F0, tol)
    if not ok:
        W, ip = _witness(system.B, rhs.F0, tol)
        raise Unsolvable(f"F0 not in ran BB(lam) (residual {res:.3g})", W, ip)
    K = linalg.kernel_basis(system.B, tol.rank)
    part = x if np.any(rhs.F0) else None
    return SolutionSet(spec, complex(lam), f, part, K)


def integral_vwf(spec: SystemSpec, v: BalancedPath, f: RightHandSide) -> complex:
    """``int v^* w f`` for a path ``v`` and right-hand side ``f``."""
    total = 0j
    for k, at in enumerate(spec.atoms):
        total += v.u_sharp[k].conj() @ at.dw @ f.atoms[k]
    for j in range(spec.N + 1):
        # v = U_j(., mu) c_j with mu = v.lam, so int v^* W f = c_j^* I_j(f, conj mu)
        if np.any(spec.gaps[j].Wd):
            total += v.c[j].conj() @ gap_integral(spec, j, np.conj(v.lam), f)
    return complex(total)


@dataclass(frozen=True)
class Solvability:
    rank_test: bool
    orthogonality_test: bool
    rank_residual: float
    max_obstruction: float

    def __bool__(self) -> bool:
        return self.rank_test


def vanishing_solutions(spec: SystemSpec, mu: complex, tol: Tolerances | None = None) -> list:
    """Solutions of ``J v' + (q - mu w) v = 0`` with ``v^+(a) = v^-(b) = 0``.

    Obtained from ``ker BB(conj mu)^*`` by reconstruction.
    """
    tol = resolve(tol)
    system, _ = assemble(spec, np.conj(mu))
    V = linalg.kernel_basis(system.B.conj().T, tol.rank)
    return [reconstruct_from_hat(spec, mu, V[:, i], tol) for i in range(V.shape[1])]


def solvable(spec: SystemSpec, lam: complex, f: RightHandSide | None = None,
             tol: Tolerances | None = None) -> Solvability:
    """Solvability decided twice: range test and orthogonality test.

    Raises
    ------
    InternalDisagreement
        If the two tests disagree.
    """
    tol = resolve(tol)
    f = RightHandSide.zeros(spec) if f is None else f
    system, rhs = assemble(spec, lam, f)
    _, rank_ok, res = _consistent(system.B, rhs.F0, tol)
    vs = vanishing_solutions(spec, np.conj(lam), tol)
    scale = np.linalg.norm(rhs.F0) + np.linalg.norm(rhs.R) + np.linalg.norm(rhs.I) \
        + np.linalg.norm(rhs.I_last)
    obs = [abs(integral_vwf(spec, v, f)) / max(_hat_norm(v), 1e-300) for v in vs]
    worst = max(obs, default=0.0)
    orth_ok = worst <= tol.lin * scale
    if rank_ok != orth_ok:
        raise InternalDisagreement(
            f"range test says {rank_ok}, orthogonality test says {orth_ok} "
            f"(residual {res:.3g}, obstruction {worst:.3g})")
    return Solvability(rank_ok, orth_ok, float(res), float(worst))


def _hat_norm(v: BalancedPath) -> float:
    return float(np.linalg.norm(v.u_sharp))


def solve_vanishing(spec: SystemSpec, lam: complex, f: RightHandSide | None = None,
                    tol: Tolerances | None = None) -> SolutionSet:
    """Solutions with ``u^+(a) = u^-(b) = 0``.

    ``c_0 = 0`` and ``c_N = -J^{-1} I_N``; the middle vectors solve
    ``BB_m(lam) [c_1..c_{N-1}] = F0 + calB(lam) calJ^{-1} I_tilde``.
    The returned ``particular``/``kernel`` are full ``n(N+1)`` vectors.
    """
    tol = resolve(tol)
    f = RightHandSide.zeros(spec) if f is None else f
    system, rhs = assemble(spec, lam, f)
    n, N = spec.n, spec.N
    target = rhs.F0.copy()
    target[-n:] += system.Bplus[-1] @ (spec.Jinv @ rhs.I_last)
    Bm = system.Bm
    if Bm.shape[1] == 0:
        ok = np.linalg.norm(target) <= tol.lin * max(np.linalg.norm(rhs.F0), np.linalg.norm(rhs.R), 1.0)
        mid = np.zeros(0, complex)
        res = np.linalg.norm(target)
    else:
        mid, ok, res = _consistent(Bm, target, tol)
    if not ok:
        W, ip = _witness(Bm, target, tol)
        raise Unsolvable(f"no vanishing solution (residual {res:.3g})", W, ip)
    cN = -spec.Jinv @ rhs.I_last
    part = np.concatenate([np.zeros(n, complex), mid, cN])
    Kmid = linalg.kernel_basis(Bm, tol.rank, ncols=Bm.shape[1]) if Bm.shape[1] else np.zeros((0, 0))
    K = np.zeros((n * (N + 1), Kmid.shape[1]), complex)
    K[n:n * N] = Kmid
    return SolutionSet(spec, complex(lam), f, part, K)


def reconstruct_from_hat(spec: SystemSpec, lam: complex, uhat,
                         tol: Tolerances | None = None) -> BalancedPath:
    """The unique homogeneous solution with atom values ``uhat``.

    ``uhat`` must lie in ``ker BB_m(conj lam)^*``; the solution is the
    ``u~ in ker BB(lam)`` with ``DD(lam) u~ = uhat``.
    """
    tol = resolve(tol)
    uhat = np.asarray(uhat, dtype=complex).ravel()
    other, _ = assemble(spec, np.conj(lam))
    Bm_adj = other.Bm.conj().T
    if Bm_adj.shape[0] and np.linalg.norm(Bm_adj @ uhat) > tol.lin * max(
            np.linalg.norm(other.B, 2), 1.0) * max(np.linalg.norm(uhat), 1.0):
        raise NotInKernel("uhat is not in ker BB_m(conj lam)^*")
    system, _ = assemble(spec, lam)
    M = np.vstack([system.B, system.D])
    rhs = np.concatenate([np.zeros(system.B.shape[0], complex), uhat])
    ut = linalg.lstsq(M, rhs, tol.rank)
    if np.linalg.norm(M @ ut - rhs) > tol.lin * (np.linalg.norm(M, 2) * np.linalg.norm(ut) + np.linalg.norm(rhs)):
        raise InternalDisagreement("reconstruction system inconsistent")
    return propagate_path(spec, lam, None, ut)


def structural_identities(spec: SystemSpec, lam: complex) -> dict:
    """Frobenius residuals of the two block identities and of J-unitarity.

    ``DD(conj l)^* BB(l) - BB(conj l)^* DD(l) = diag(-J, 0, ..., 0, J)`` and
    ``DD_m(conj l)^* BB(l) - BB_m(conj l)^* DD(l) = 0``.
    """
    s, _ = assemble(spec, lam)
    t, _ = assemble(spec, np.conj(lam))
    n, N = spec.n, spec.N
    target = np.zeros((n * (N + 1), n * (N + 1)), complex)
    target[:n, :n] = -spec.J
    target[-n:, -n:] = spec.J
    first = t.D.conj().T @ s.B - t.B.conj().T @ s.D - target
    second = t.Dm.conj().T @ s.B - t.Bm.conj().T @ s.D
    calJ = _blockdiag([spec.J] * N)
    unit = t.calU.conj().T @ calJ @ s.calU - calJ
    scale = np.linalg.norm(s.B) + np.linalg.norm(s.D)
    return {
        "full_identity": float(np.linalg.norm(first)),
        "middle_identity": float(np.linalg.norm(second)),
        "j_unitarity": float(np.linalg.norm(unit)),
        "scale": float(scale),
    }


def kernel_dims(spec: SystemSpec, lam: complex, tol: Tolerances | None = None) -> dict:
    """Guarded dims of ``ker BB``, ``ker BB^*``, ``ker BB_m^*`` at ``lam``."""
    tol = resolve(tol)
    s, _ = assemble(spec, lam)
    n, N = spec.n, spec.N
    rB = linalg.stable_rank(s.B, tol.rank, "rank BB")
    rBm = linalg.stable_rank(s.Bm, tol.rank, "rank BB_m") if N > 1 else 0
    return {
        "ker_B": n * (N + 1) - rB,
        "ker_B_adj": n * N - rB,
        "ker_Bm_adj": n * N - rBm,
        "rank_B": rB,
    }


def n_tilde(spec: SystemSpec, lam: complex, tol: Tolerances | None = None) -> int:
    """``dim ker BB_m(conj lam)^* - dim ker BB(conj lam)^*``."""
    d = kernel_dims(spec, np.conj(lam), tol)
    return d["ker_Bm_adj"] - d["ker_B_adj"]
