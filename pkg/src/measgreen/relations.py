"""Finite model of ``L^2(w)`` and the relations ``T_max``, ``T_min``.

With ``w`` purely atomic, a class ``[f]`` is determined by the atom values
``dw(x_k) f(x_k)``.  We use isometric coordinates: if
``dw(x_k) = V diag(mu) V^*`` with ``mu > 0`` retained, the coordinates of
``p`` at atom ``k`` are ``diag(sqrt(mu)) V^* p``.  The inner product
``<f, g> = sum f(x_k)^* dw(x_k) g(x_k)`` becomes the Euclidean one on
``C^r``, ``r = sum rank dw(x_k)``, and pairs live in ``C^r x C^r``.

A pair ``(u, f)`` in ``T_max`` is parametrized by the initial vectors
``c~ = (c_0, ..., c_N)`` of a representative path and atom values ``F`` of a
representative of ``f``, subject to ``BB(0) c~ = dw F``.  Because gaps carry
no ``w`` density the gap propagators do not depend on ``lambda``, so every
element (including deficiency elements) is stored as a ``lambda = 0`` path
with right-hand side ``F``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .assembly import assemble
from .errors import (DependentConditions, InternalDisagreement, NotPurelyAtomic,
                     RankUnstable)
from .model import SystemSpec
from .propagate import BalancedPath, RightHandSide, propagate_path, transfer_matrix
from .tolerances import Tolerances, resolve


class L2wSpace:
    """Isometric coordinates on the atomic part of ``L^2(w)``."""

    def __init__(self, spec: SystemSpec, tol: Tolerances | None = None):
        tol = resolve(tol)
        self.spec = spec
        wmax = max((np.linalg.norm(at.dw, 2) for at in spec.atoms), default=0.0)
        self.blocks = []
        for at in spec.atoms:
            mu, V = np.linalg.eigh((at.dw + at.dw.conj().T) / 2)
            keep = mu > tol.rank * max(wmax, 1e-300)
            self.blocks.append(np.sqrt(mu[keep])[:, None] * V[:, keep].conj().T)
        self.ranks = [blk.shape[0] for blk in self.blocks]
        self.dim = int(sum(self.ranks))
        n, N = spec.n, spec.N
        self.C = np.zeros((self.dim, n * N), complex)
        self.Cpinv = np.zeros((n * N, self.dim), complex)
        row = 0
        for k, blk in enumerate(self.blocks):
            rk = blk.shape[0]
            self.C[row:row + rk, k * n:(k + 1) * n] = blk
            if rk:
                self.Cpinv[k * n:(k + 1) * n, row:row + rk] = np.linalg.pinv(blk)
            row += rk

    def coords(self, values) -> np.ndarray:
        """Coordinates of atom values (``N x n`` or flat)."""
        return self.C @ np.asarray(values, dtype=complex).reshape(-1)

    def values(self, coords) -> np.ndarray:
        """Representative atom values in ``ran dw`` (``N x n``)."""
        v = self.Cpinv @ np.asarray(coords, dtype=complex)
        return v.reshape(self.spec.N, self.spec.n)

    def unit(self, k: int, e) -> np.ndarray:
        """Coordinates of the class of ``f`` with ``f(x_k) = e``, zero elsewhere."""
        vals = np.zeros((self.spec.N, self.spec.n), complex)
        vals[k] = e
        return self.coords(vals)


@dataclass(frozen=True, eq=False)
class L2wClass:
    """A class ``[f]`` held by its projected atom values."""

    spec: SystemSpec
    values: np.ndarray

    @classmethod
    def from_values(cls, spec, values, space: L2wSpace | None = None):
        space = space or L2wSpace(spec)
        return cls(spec, space.values(space.coords(values)))

    @classmethod
    def from_coords(cls, spec, coords, space: L2wSpace | None = None):
        space = space or L2wSpace(spec)
        return cls(spec, space.values(coords))

    def coords(self, space: L2wSpace | None = None) -> np.ndarray:
        space = space or L2wSpace(self.spec)
        return space.coords(self.values)

    def as_rhs(self) -> RightHandSide:
        return RightHandSide.at_atoms(self.spec, self.values)


def inner_product(spec: SystemSpec, f, g) -> complex:
    """``int f^* w g`` for right-hand sides or classes.

    Gap terms (constant densities) are included for right-hand sides.
    """
    fa = f.values if isinstance(f, L2wClass) else f.atoms
    ga = g.values if isinstance(g, L2wClass) else g.atoms
    total = sum(fa[k].conj() @ at.dw @ ga[k] for k, at in enumerate(spec.atoms))
    if isinstance(f, RightHandSide) and isinstance(g, RightHandSide):
        for j, gd in enumerate(spec.gaps):
            left, right = spec.gap_bounds(j)
            total += (right - left) * (f.gaps[j].conj() @ gd.Wd @ g.gaps[j])
    return complex(total)


# --------------------------------------------------------------------------
# pairs and subspaces


@dataclass(frozen=True, eq=False)
class Pair:
    """A pair ``([u], [f])`` with a representative path for ``u``.

    ``f_path`` is set when ``f`` itself is (a combination of) solutions, as
    for deficiency elements; it is used by boundary conditions.
    """

    path: BalancedPath
    u: np.ndarray
    f: np.ndarray
    f_path: BalancedPath | None = None


@dataclass(frozen=True, eq=False)
class PairSubspace:
    """Subspace of ``L^2(w) x L^2(w)`` with representative paths.

    ``basis`` is ``2r x k`` with orthonormal columns (``u`` coordinates on
    top).  ``reps_c`` / ``reps_F`` give, per basis column, the initial
    vectors and atom right-hand side of a ``lambda = 0`` representative.
    """

    spec: SystemSpec
    label: str
    basis: np.ndarray
    reps_c: np.ndarray | None = None
    reps_F: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def r(self) -> int:
        return self.basis.shape[0] // 2

    @property
    def u(self) -> np.ndarray:
        return self.basis[:self.r]

    @property
    def f(self) -> np.ndarray:
        return self.basis[self.r:]

    def path(self, coeffs) -> BalancedPath:
        """Representative path of ``basis @ coeffs`` (int selects a column)."""
        if self.reps_c is None:
            raise ValueError(f"{self.label}: no representatives attached")
        z = _coeffs(coeffs, self.dim)
        F = (self.reps_F @ z).reshape(self.spec.N, self.spec.n)
        return propagate_path(self.spec, 0.0, RightHandSide.at_atoms(self.spec, F),
                              self.reps_c @ z)

    def pair(self, coeffs) -> Pair:
        z = _coeffs(coeffs, self.dim)
        v = self.basis @ z
        return Pair(self.path(z), v[:self.r], v[self.r:])


def _coeffs(coeffs, dim):
    if isinstance(coeffs, (int, np.integer)):
        z = np.zeros(dim, complex)
        z[int(coeffs)] = 1.0
        return z
    return np.asarray(coeffs, dtype=complex)


class _Model:
    """Cached matrices shared by the relation builders of one system."""

    def __init__(self, spec: SystemSpec, tol: Tolerances | None):
        if not spec.purely_atomic:
            raise NotPurelyAtomic("relation-level operations need purely atomic w")
        self.spec = spec
        self.tol = resolve(tol)
        self.space = L2wSpace(spec, self.tol)
        n, N = spec.n, spec.N
        self.nc = n * (N + 1)
        self.nF = n * N
        if N:
            s0, _ = assemble(spec, 0.0)
            self.B0, self.D0 = s0.B, s0.D
        else:
            self.B0 = np.zeros((0, n), complex)
            self.D0 = np.zeros((0, n), complex)
        self.W = np.zeros((self.nF, self.nF), complex)
        for k, at in enumerate(spec.atoms):
            self.W[k * n:(k + 1) * n, k * n:(k + 1) * n] = at.dw
        self.Mu = self.space.C @ self.D0

    def subspace(self, params_c, params_F, label):
        image = np.vstack([self.Mu @ params_c, self.space.C @ params_F])
        if image.size == 0:
            return PairSubspace(self.spec, label, np.zeros((2 * self.space.dim, 0), complex),
                                np.zeros((self.nc, 0), complex), np.zeros((self.nF, 0), complex))
        scale = (np.linalg.norm(self.Mu, 2) + np.linalg.norm(self.space.C, 2)) * max(
            np.linalg.norm(params_c, 2) if params_c.size else 0.0,
            np.linalg.norm(params_F, 2) if params_F.size else 0.0)
        k = linalg.stable_rank(image, self.tol.rank, f"dim {label}", scale)
        Q, R = linalg.range_basis(image, self.tol.rank, scale)
        if Q.shape[1] != k:
            raise RankUnstable(f"dim {label}: range basis disagrees with guarded rank")
        return PairSubspace(self.spec, label, Q, params_c @ R, params_F @ R)

    def tmax_params(self, extra_rows=None):
        A = np.hstack([self.B0, -self.W])
        if extra_rows is not None:
            A = np.vstack([A, extra_rows])
        K = linalg.kernel_basis(A, self.tol.rank, ncols=self.nc + self.nF)
        return K[:self.nc], K[self.nc:]

    @cached_property
    def endpoint_maps(self):
        """``c~ -> u^+(a)`` and ``c~ -> u^-(b)`` for zero gap right-hand side."""
        n, N = self.spec.n, self.spec.N
        Ea = np.zeros((n, self.nc), complex)
        Ea[:, :n] = np.eye(n)
        Eb = np.zeros((n, self.nc), complex)
        Eb[:, -n:] = transfer_matrix(self.spec, N, 0.0)
        return Ea, Eb


def _model(spec, tol):
    return _Model(spec, tol)


def tmax_subspace(spec: SystemSpec, tol: Tolerances | None = None) -> PairSubspace:
    """``T_max``: classes of all ``(u, f)`` with ``J u' + q u = w f``."""
    m = _model(spec, tol)
    pc, pF = m.tmax_params()
    return m.subspace(pc, pF, "Tmax")


def tmin_closure_subspace(spec: SystemSpec, tol: Tolerances | None = None) -> PairSubspace:
    """Pairs with a representative vanishing on the first and last gap."""
    m = _model(spec, tol)
    n = spec.n
    rows = np.zeros((2 * n, m.nc + m.nF), complex)
    rows[:n, :n] = np.eye(n)
    rows[n:, m.nc - n:m.nc] = np.eye(n)
    pc, pF = m.tmax_params(rows)
    return m.subspace(pc, pF, "Tmin")


def _attach_tmax_reps(spec, basis, label, tol, tmax=None):
    tol = resolve(tol)
    tmax = tmax_subspace(spec, tol) if tmax is None else tmax
    if basis.shape[1] == 0:
        return PairSubspace(spec, label, basis, tmax.reps_c[:, :0], tmax.reps_F[:, :0])
    z = tmax.basis.conj().T @ basis
    if linalg.containment_defect(basis, tmax.basis) > 1e-8:
        return PairSubspace(spec, label, basis)
    return PairSubspace(spec, label, basis, tmax.reps_c @ z, tmax.reps_F @ z)


def flip(S: PairSubspace) -> np.ndarray:
    """Image of the basis under ``(u, f) -> (f, -u)``."""
    return np.vstack([S.f, -S.u])


def adjoint_subspace(spec: SystemSpec, S: PairSubspace, tol: Tolerances | None = None,
                     tmax: PairSubspace | None = None) -> PairSubspace:
    """``S^*``: orthogonal complement of the flipped ``S``.

    Representatives are attached when ``S^*`` lies inside ``T_max``.
    """
    tol = resolve(tol)
    r2 = S.basis.shape[0]
    comp = linalg.complement_basis(flip(S), r2, tol.rank)
    if not spec.purely_atomic:
        return PairSubspace(spec, S.label + "*", comp)
    return _attach_tmax_reps(spec, comp, S.label + "*", tol, tmax)


def l0_coefficients(spec: SystemSpec, tol: Tolerances | None = None) -> np.ndarray:
    """Initial vectors ``c~`` (columns) spanning ``L0``.

    ``L0`` = solutions of ``J u' + q u = 0`` with ``w u = 0``: ``BB(0) c~ = 0``,
    ``dw(x_k) u^#(x_k) = 0`` and, on gaps with ``W != 0``, ``c_j`` in the
    largest ``A_j``-invariant subspace of ``ker W``.
    """
    tol = resolve(tol)
    n, N = spec.n, spec.N
    rows = []
    if N:
        s0, _ = assemble(spec, 0.0)
        rows.append(s0.B)
        space = L2wSpace(spec, tol)
        rows.append(space.C @ s0.D)
    for j, g in enumerate(spec.gaps):
        if not np.any(g.Wd):
            continue
        A = -spec.Jinv @ g.Qd
        blk = []
        P = np.eye(n, dtype=complex)
        for _ in range(n):
            blk.append(g.Wd @ P)
            P = A @ P
        sel = np.zeros((n * n, n * (N + 1)), complex)
        sel[:, j * n:(j + 1) * n] = np.vstack(blk)
        rows.append(sel)
    M = np.vstack(rows) if rows else np.zeros((0, n * (N + 1)), complex)
    return linalg.kernel_basis(M, tol.rank, ncols=n * (N + 1))


def l0_basis(spec: SystemSpec, tol: Tolerances | None = None) -> list[BalancedPath]:
    Z = l0_coefficients(spec, tol)
    return [propagate_path(spec, 0.0, None, Z[:, i]) for i in range(Z.shape[1])]


@dataclass(frozen=True, eq=False)
class Deficiency:
    subspace: PairSubspace
    n: int
    lam: complex
    solution_dim: int


def deficiency(spec: SystemSpec, lam: complex = 1j, tol: Tolerances | None = None) -> Deficiency:
    """``D_lam = {([u], lam [u]) in T_max}`` and its dimension.

    All solutions of ``J u' + q u = lam w u`` come from ``ker BB(lam)``; the
    dimension is the rank of their classes.
    """
    m = _model(spec, tol)
    lam = complex(lam)
    n = spec.n
    if spec.N == 0:
        S = m.subspace(np.zeros((m.nc, 0)), np.zeros((m.nF, 0)), f"D({lam})")
        return Deficiency(S, 0, lam, n)
    sysl, _ = assemble(spec, lam)
    K = linalg.kernel_basis(sysl.B, m.tol.rank)
    Y = m.space.C @ sysl.D @ K
    scale = np.linalg.norm(m.space.C, 2) * np.linalg.norm(sysl.D, 2) if m.space.C.size else 0.0
    n_lam = linalg.stable_rank(Y, m.tol.rank, f"n({lam})", scale) if Y.size else 0
    if n_lam > n:
        raise InternalDisagreement(f"deficiency index {n_lam} exceeds n={n}")
    S = m.subspace(K, lam * (sysl.D @ K), f"D({lam})")
    if S.dim != n_lam:
        raise RankUnstable(f"D({lam}) dimension {S.dim} vs Gram rank {n_lam}")
    return Deficiency(S, n_lam, lam, K.shape[1])


def endpoint_values(spec: SystemSpec, path: BalancedPath):
    """``(u^+(a), u^-(b))``."""
    return path.start_value, path.end_value


def boundary_form(spec: SystemSpec, pair1: Pair, pair2: Pair, check: bool = True,
                  atol: float = 1e-10) -> complex:
    """``(v^* J u)^-(b) - (v^* J u)^+(a)`` for ``pair1 = (v, g)``, ``pair2 = (u, f)``.

    With ``check`` the Lagrange identity against ``<v, f> - <g, u>`` is
    enforced to ``atol`` relative to the pair norms.
    """
    va, vb = endpoint_values(spec, pair1.path)
    ua, ub = endpoint_values(spec, pair2.path)
    value = complex(vb.conj() @ spec.J @ ub - va.conj() @ spec.J @ ua)
    if check:
        other = lagrange_rhs(pair1, pair2)
        scale = max(1.0, (np.linalg.norm(pair1.u) + np.linalg.norm(pair1.f))
                    * (np.linalg.norm(pair2.u) + np.linalg.norm(pair2.f)))
        if abs(value - other) > atol * scale:
            raise InternalDisagreement(
                f"Lagrange identity violated: {value} vs {other}")
    return value


def lagrange_rhs(pair1: Pair, pair2: Pair) -> complex:
    """``<v, f> - <g, u>``."""
    return complex(pair1.u.conj() @ pair2.f - pair1.f.conj() @ pair2.u)


# --------------------------------------------------------------------------
# boundary conditions


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Conditions ``(v_j, g_j)`` from ``D_i + D_{-i}`` and ``A J A^*``."""

    conditions: tuple
    coeffs: np.ndarray
    AJA: np.ndarray
    n_plus: int
    n_minus: int

    @property
    def d(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def m(self) -> int:
        return self.d - len(self.conditions)


@dataclass(frozen=True, eq=False)
class DeficiencyPair:
    plus: Deficiency
    minus: Deficiency

    @property
    def d(self) -> int:
        return self.plus.n + self.minus.n


def deficiency_pair(spec: SystemSpec, tol: Tolerances | None = None) -> DeficiencyPair:
    return DeficiencyPair(deficiency(spec, 1j, tol), deficiency(spec, -1j, tol))


def _form(p: Pair, q: Pair) -> complex:
    # (p_g^* J q_g)^-(b) - (p_g^* J q_g)^+(a)
    a1, b1 = p.f_path.start_value, p.f_path.end_value
    a2, b2 = q.f_path.start_value, q.f_path.end_value
    J = p.path.spec.J
    return complex(b1.conj() @ J @ b2 - a1.conj() @ J @ a2)


def boundary_data(spec: SystemSpec, coeffs, defs: DeficiencyPair | None = None,
                  tol: Tolerances | None = None) -> BoundaryData:
    """Conditions from coefficient rows over ``[D_i basis, D_{-i} basis]``."""
    defs = deficiency_pair(spec, tol) if defs is None else defs
    Dp, Dm = defs.plus.subspace, defs.minus.subspace
    coeffs = np.asarray(coeffs, dtype=complex)
    coeffs = np.zeros((0, defs.d), complex) if coeffs.size == 0 else coeffs.reshape(-1, defs.d)
    conds = []
    for row in coeffs:
        zp, zm = row[:Dp.dim], row[Dp.dim:]
        up = Dp.basis @ zp
        um = Dm.basis @ zm
        r = Dp.r
        v = up[:r] + um[:r]
        g = up[r:] + um[r:]
        c_v = Dp.reps_c @ zp + Dm.reps_c @ zm
        F_v = Dp.reps_F @ zp + Dm.reps_F @ zm
        c_g = 1j * (Dp.reps_c @ zp) - 1j * (Dm.reps_c @ zm)
        F_g = 1j * (Dp.reps_F @ zp) - 1j * (Dm.reps_F @ zm)
        pv = propagate_path(spec, 0.0, RightHandSide.at_atoms(spec, F_v), c_v)
        pg = propagate_path(spec, 0.0, RightHandSide.at_atoms(spec, F_g), c_g)
        conds.append(Pair(pv, v, g, pg))
    k = len(conds)
    AJA = np.array([[_form(conds[i], conds[j]) for j in range(k)] for i in range(k)],
                   dtype=complex).reshape(k, k)
    return BoundaryData(tuple(conds), coeffs, AJA, defs.plus.n, defs.minus.n)


def self_adjoint_conditions(spec: SystemSpec, U=None, defs: DeficiencyPair | None = None,
                            tol: Tolerances | None = None) -> BoundaryData:
    """Rows ``e_k (+) U e_k``: ``A J A^* = 0`` for unitary ``U``."""
    defs = deficiency_pair(spec, tol) if defs is None else defs
    npl, nmi = defs.plus.n, defs.minus.n
    if npl != nmi:
        raise InternalDisagreement(f"n+ = {npl} differs from n- = {nmi}")
    U = np.eye(npl, dtype=complex) if U is None else np.asarray(U, dtype=complex)
    rows = np.hstack([np.eye(npl, dtype=complex), U.T]) if npl else np.zeros((0, 0))
    return boundary_data(spec, rows, defs, tol)


def symmetric_conditions(spec: SystemSpec, m: int, U=None, defs: DeficiencyPair | None = None,
                         tol: Tolerances | None = None) -> BoundaryData:
    """``d - m`` conditions with ``rank A J A^* = d - 2m``.

    ``m`` rows pair ``D_i`` with ``D_{-i}`` through the unitary ``U``; the
    remaining basis vectors of both deficiency spaces are imposed singly.
    """
    defs = deficiency_pair(spec, tol) if defs is None else defs
    npl, nmi = defs.plus.n, defs.minus.n
    if not 0 <= m <= min(npl, nmi):
        raise ValueError(f"need 0 <= m <= min(n+, n-) = {min(npl, nmi)}")
    U = np.eye(m, dtype=complex) if U is None else np.asarray(U, dtype=complex)
    d = npl + nmi
    rows = []
    for k in range(m):
        row = np.zeros(d, complex)
        row[k] = 1.0
        row[npl:npl + m] = U[:, k]
        rows.append(row)
    for k in range(m, npl):
        row = np.zeros(d, complex)
        row[k] = 1.0
        rows.append(row)
    for k in range(m, nmi):
        row = np.zeros(d, complex)
        row[npl + k] = 1.0
        rows.append(row)
    return boundary_data(spec, np.array(rows, dtype=complex).reshape(len(rows), d), defs, tol)


@dataclass(frozen=True, eq=False)
class Restriction:
    T: PairSubspace
    classification: str
    d: int
    m: int
    rank_AJA: int
    adjoint_defect: float
    adjoint_angle: float
    functional_mismatch: float = field(default=0.0)

    @property
    def symmetric(self) -> bool:
        return self.classification in ("symmetric", "self-adjoint")

    @property
    def self_adjoint(self) -> bool:
        return self.classification == "self-adjoint"


def restriction_from_conditions(spec: SystemSpec, boundary: BoundaryData,
                                tol: Tolerances | None = None,
                                tmax: PairSubspace | None = None,
                                subspace_tol: float = 1e-8) -> Restriction:
    """``T = {(u, f) in T_max : (g_j^* J u)^-(b) - (g_j^* J u)^+(a) = 0}``.

    Classified via ``A J A^*`` and cross-checked against the adjoint of
    ``T``.

    Raises
    ------
    DependentConditions
        If the functionals are dependent on ``T_max``.
    InternalDisagreement
        If the classification and the adjoint computation disagree.
    """
    tol = resolve(tol)
    m_ = _model(spec, tol)
    tmax = tmax_subspace(spec, tol) if tmax is None else tmax
    k = len(boundary.conditions)
    m = boundary.d - k
    if not 0 <= m <= min(boundary.n_plus, boundary.n_minus):
        raise DependentConditions(f"{k} conditions do not fit d={boundary.d}")
    Ea, Eb = m_.endpoint_maps
    ua, ub = Ea @ tmax.reps_c, Eb @ tmax.reps_c
    Phi = np.zeros((k, tmax.dim), complex)
    Psi = np.zeros_like(Phi)
    for j, cond in enumerate(boundary.conditions):
        ga, gb = cond.f_path.start_value, cond.f_path.end_value
        Phi[j] = gb.conj() @ spec.J @ ub - ga.conj() @ spec.J @ ua
        Psi[j] = cond.u.conj() @ tmax.u + cond.f.conj() @ tmax.f
    mismatch = float(np.linalg.norm(Phi - Psi)) if k else 0.0
    if mismatch > 1e-8 * max(1.0, np.linalg.norm(Psi)):
        raise InternalDisagreement(f"boundary functionals differ from inner products by {mismatch:.3g}")
    if k and linalg.numerical_rank(Phi, tol.rank) < k:
        raise DependentConditions("boundary functionals are dependent on T_max")
    Z = linalg.kernel_basis(Phi, tol.rank, ncols=tmax.dim) if k else np.eye(tmax.dim, dtype=complex)
    T = PairSubspace(spec, "T", tmax.basis @ Z, tmax.reps_c @ Z, tmax.reps_F @ Z)

    scale = max(1.0, float(np.max(np.abs(boundary.coeffs))) ** 2) if k else 1.0
    rank_aja = linalg.numerical_rank(boundary.AJA / scale, 1e-9) if k and np.linalg.norm(boundary.AJA) > 1e-9 * scale else 0
    if k and np.linalg.norm(boundary.AJA) <= 1e-9 * scale or k == 0:
        rank_aja = 0
    if rank_aja == 0 and 2 * m == boundary.d:
        cls = "self-adjoint"
    elif rank_aja == boundary.d - 2 * m:
        cls = "symmetric"
    else:
        cls = "not-symmetric"

    Tadj = adjoint_subspace(spec, T, tol, tmax)
    defect = linalg.containment_defect(T.basis, Tadj.basis)
    angle = linalg.max_principal_angle(T.basis, Tadj.basis)
    sym_check = defect <= subspace_tol
    sa_check = sym_check and T.dim == Tadj.dim and angle <= subspace_tol
    if (cls != "not-symmetric") != sym_check or (cls == "self-adjoint") != sa_check:
        raise InternalDisagreement(
            f"classification {cls!r} but adjoint check gives symmetric={sym_check}, "
            f"self-adjoint={sa_check}")
    return Restriction(T, cls, boundary.d, m, rank_aja, defect, angle, mismatch)
