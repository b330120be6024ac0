"""Resolvents of self-adjoint restrictions and Green's kernel tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .canonical import NkSpaces, canonicalize, nk_spaces
from .errors import NotInResolventSet, RankUnstable
from .model import SystemSpec
from .propagate import BalancedPath, RightHandSide, balanced_value, propagate_path
from .relations import L2wClass, L2wSpace, PairSubspace
from .tolerances import Tolerances, resolve


@dataclass(frozen=True, eq=False)
class ResolventContext:
    """``(T - lam)^{-1}`` for a self-adjoint ``T`` in the finite model.

    In the basis of ``T`` the equation ``g - lam u = f`` reads
    ``(T_f - lam T_u) z = f``; ``lam`` is in the resolvent set iff this
    square matrix is invertible.
    """

    spec: SystemSpec
    T: PairSubspace
    lam: complex
    M: np.ndarray
    space: L2wSpace
    nk: NkSpaces
    tol: Tolerances

    @classmethod
    def build(cls, spec: SystemSpec, T: PairSubspace, lam: complex,
              tol: Tolerances | None = None) -> "ResolventContext":
        tol = resolve(tol)
        lam = complex(lam)
        M = T.f - lam * T.u
        if M.shape[0] != M.shape[1]:
            raise NotInResolventSet(f"T has dimension {M.shape[1]}, L2(w) has {M.shape[0]}")
        if M.shape[0]:
            try:
                rank = linalg.stable_rank(M, tol.rank, "rank(T - lam)", 1.0 + abs(lam))
            except RankUnstable as exc:
                raise NotInResolventSet(f"lam={lam}: {exc}") from exc
            if rank < M.shape[0]:
                raise NotInResolventSet(f"lam={lam} is an eigenvalue of T")
        space = L2wSpace(spec, tol)
        return cls(spec, T, lam, M, space, nk_spaces(spec, tol=tol), tol)

    def solve_coeffs(self, fc) -> np.ndarray:
        if self.M.shape[0] == 0:
            return np.zeros(0, complex)
        return np.linalg.solve(self.M, np.asarray(fc, dtype=complex))


def _as_class(ctx: ResolventContext, f):
    if isinstance(f, L2wClass):
        return f
    if isinstance(f, RightHandSide):
        return L2wClass.from_values(ctx.spec, f.atoms, ctx.space)
    return L2wClass.from_values(ctx.spec, f, ctx.space)


def resolvent_apply(ctx: ResolventContext, f) -> BalancedPath:
    """Canonical solution of ``J u' + q u = w (lam u + f)`` with ``[u]`` in ``dom T``.

    ``f`` may be an ``L2wClass``, a ``RightHandSide`` or an ``N x n`` array
    of atom values.  The returned path carries ``lam`` and right-hand side
    ``f``.
    """
    spec = ctx.spec
    fcls = _as_class(ctx, f)
    z = ctx.solve_coeffs(fcls.coords(ctx.space))
    rhs = fcls.as_rhs()
    if ctx.T.dim == 0:
        c = np.zeros(spec.n * (spec.N + 1), complex)
    else:
        c = ctx.T.reps_c @ z
    path = propagate_path(spec, ctx.lam, rhs, c)
    return canonicalize(spec, path, nk=ctx.nk, tol=ctx.tol)


def resolvent_class(ctx: ResolventContext, f) -> np.ndarray:
    """Coordinates of ``[u] = (T - lam)^{-1} [f]``."""
    fcls = _as_class(ctx, f)
    return ctx.T.u @ ctx.solve_coeffs(fcls.coords(ctx.space)) if ctx.T.dim else \
        np.zeros(ctx.space.dim, complex)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """``K[p, k] = G(x_p, y_k, lam) dw(y_k)`` for points ``x_p`` and atoms ``y_k``."""

    lam: complex
    points: tuple
    atoms: tuple
    K: np.ndarray
    G: np.ndarray

    def apply(self, f_atoms) -> np.ndarray:
        """``sum_k K(x, y_k) f(y_k)`` at every point (``P x n``)."""
        f_atoms = np.asarray(f_atoms, dtype=complex)
        if self.K.size == 0:
            return np.zeros((len(self.points), f_atoms.shape[-1] if f_atoms.ndim else 0), complex)
        return np.einsum("pkij,kj->pi", self.K, f_atoms)

    def to_json(self) -> dict:
        def cx(a):
            a = np.asarray(a)
            if a.ndim == 0:
                return [float(a.real), float(a.imag)]
            return [cx(x) for x in a]

        return {
            "lambda": [float(self.lam.real), float(self.lam.imag)],
            "points": [float(x) for x in self.points],
            "atoms": [float(y) for y in self.atoms],
            "K": cx(self.K),
            "G": cx(self.G),
        }


def greens_table(ctx: ResolventContext, xs) -> KernelTable:
    """Kernel columns from resolvents of unit atom values, evaluated balanced."""
    spec = ctx.spec
    xs = tuple(float(x) for x in xs)
    n, N = spec.n, spec.N
    K = np.zeros((len(xs), N, n, n), complex)
    if xs:
        for k in range(N):
            for j in range(n):
                vals = np.zeros((N, n), complex)
                vals[k, j] = 1.0
                path = resolvent_apply(ctx, vals)
                for p, x in enumerate(xs):
                    K[p, k, :, j] = balanced_value(path, x)
    G = np.zeros_like(K)
    for k, at in enumerate(spec.atoms):
        G[:, k] = K[:, k] @ np.linalg.pinv(at.dw, rcond=ctx.tol.rank, hermitian=True)
    return KernelTable(ctx.lam, xs, tuple(at.x for at in spec.atoms), K, G)
