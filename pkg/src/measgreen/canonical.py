"""Canonical representatives of ``L^2(w)`` classes.

Two solutions of the same equation in the same class differ by an element of
``L0`` (solutions of the homogeneous equation with zero norm).  A unique
representative is singled out by orthogonality conditions at a grid of
points: at a base point ``tau_0`` inside a gap the value must be orthogonal
to ``N_0 = {h(tau_0) : h in L0}``, and at every atom ``x`` to the right
(left) of ``tau_0`` the right (left) limit must be orthogonal to the right
(left) limits at ``x`` of those ``h in L0`` that vanish left (right) of
``x``.

An ``L0`` element is determined by its initial vectors ``c_0..c_N`` and it
vanishes on gap ``j`` iff ``c_j = 0``, so the support filters reduce to
linear constraints on the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ProjectionFailed
from .model import SystemSpec
from .propagate import BalancedPath, propagate_path, transfer_matrix
from .relations import l0_coefficients
from .tolerances import Tolerances, resolve


@dataclass(frozen=True)
class TauGrid:
    """Base point ``tau0`` (in gap ``gap``) and the atoms on either side.

    ``right`` lists atom indices ``gap, gap+1, ..`` (grid points
    ``tau_1, tau_2, ..``); ``left`` lists ``gap-1, gap-2, ..`` (grid points
    ``tau_-1, tau_-2, ..``).
    """

    tau0: float
    gap: int
    right: tuple
    left: tuple

    def atom_of(self, k: int) -> int | None:
        if k == 0:
            return None
        if k > 0:
            return self.right[k - 1]
        return self.left[-k - 1]

    @property
    def ks(self) -> list[int]:
        return [-i for i in range(len(self.left), 0, -1)] + [0] + list(range(1, len(self.right) + 1))


def tau_grid(spec: SystemSpec) -> TauGrid:
    """Grid with ``tau0`` the midpoint of the first widest gap."""
    widths = [spec.gap_bounds(j)[1] - spec.gap_bounds(j)[0] for j in range(spec.N + 1)]
    g = int(np.argmax(widths))
    left, right = spec.gap_bounds(g)
    return TauGrid(0.5 * (left + right), g, tuple(range(g, spec.N)), tuple(range(g - 1, -1, -1)))


@dataclass(frozen=True, eq=False)
class NkSpace:
    """``N_k`` with the data needed to realize projections onto it.

    ``Z`` holds the admissible ``L0`` coefficient columns, ``H`` their
    values at the grid point and ``basis`` an orthonormal basis of
    ``ran H``.
    """

    k: int
    atom: int | None
    Z: np.ndarray
    H: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class NkSpaces:
    grid: TauGrid
    l0: np.ndarray
    spaces: dict

    def __getitem__(self, k: int) -> NkSpace:
        return self.spaces[k]


def _evaluation(spec: SystemSpec, grid: TauGrid, k: int) -> np.ndarray:
    """Linear map ``c~ -> value`` used by condition ``k`` (zero right-hand side)."""
    n, N = spec.n, spec.N
    E = np.zeros((n, n * (N + 1)), complex)
    if k == 0:
        g = grid.gap
        E[:, g * n:(g + 1) * n] = transfer_matrix(spec, g, 0.0, grid.tau0)
    elif k > 0:
        i = grid.atom_of(k)
        E[:, (i + 1) * n:(i + 2) * n] = np.eye(n)
    else:
        i = grid.atom_of(k)
        E[:, i * n:(i + 1) * n] = transfer_matrix(spec, i, 0.0)
    return E


def _vanishing_rows(spec: SystemSpec, grid: TauGrid, k: int) -> np.ndarray | None:
    # constraints expressing the support condition of N_k
    n, N = spec.n, spec.N
    if k == 0:
        return None
    i = grid.atom_of(k)
    if k > 0:
        gaps = range(0, i + 1)
    else:
        gaps = range(i + 1, N + 1)
    rows = np.zeros((n * len(gaps), n * (N + 1)), complex)
    for r, j in enumerate(gaps):
        rows[r * n:(r + 1) * n, j * n:(j + 1) * n] = np.eye(n)
    return rows


def nk_spaces(spec: SystemSpec, grid: TauGrid | None = None,
              tol: Tolerances | None = None) -> NkSpaces:
    """All ``N_k`` for the grid, from an orthonormal basis of ``L0``."""
    tol = resolve(tol)
    grid = tau_grid(spec) if grid is None else grid
    L0 = l0_coefficients(spec, tol)
    spaces = {}
    for k in grid.ks:
        rows = _vanishing_rows(spec, grid, k)
        if L0.shape[1] == 0:
            Z = L0
        elif rows is None:
            Z = L0
        else:
            Z = L0 @ linalg.kernel_basis(rows @ L0, tol.rank, ncols=L0.shape[1], scale=1.0)
        H = _evaluation(spec, grid, k) @ Z
        scale = float(np.linalg.norm(_evaluation(spec, grid, k), 2))
        if Z.shape[1]:
            linalg.stable_rank(H, tol.rank, f"dim N_{k}", scale)
        Q, _ = linalg.range_basis(H, tol.rank, scale) if Z.shape[1] else (
            np.zeros((spec.n, 0), complex), None)
        spaces[k] = NkSpace(k, grid.atom_of(k), Z, H, Q)
    return NkSpaces(grid, L0, spaces)


def _condition_value(path: BalancedPath, grid: TauGrid, k: int) -> np.ndarray:
    if k == 0:
        return path.gap_value(grid.gap, grid.tau0)
    i = grid.atom_of(k)
    return path.u_plus[i] if k > 0 else path.u_minus[i]


def satisfies_condition_k(path: BalancedPath, grid: TauGrid, nk: NkSpaces, k: int,
                          atol: float = 1e-10) -> bool:
    """Whether the one-sided value at ``tau_k`` is orthogonal to ``N_k``."""
    Q = nk[k].basis
    if Q.shape[1] == 0:
        return True
    v = _condition_value(path, grid, k)
    scale = max(1.0, float(np.max(np.abs(path.c))))
    return bool(np.linalg.norm(Q.conj().T @ v) <= atol * scale)


def canonicalize(spec: SystemSpec, path: BalancedPath, f=None, nk: NkSpaces | None = None,
                 tol: Tolerances | None = None) -> BalancedPath:
    """The unique representative of the class of ``path`` satisfying all conditions.

    ``f`` replaces the right-hand side of ``path`` when given.  Steps: fix
    the value at ``tau0``, sweep right over atoms, then sweep left; each
    step subtracts the ``L0`` element realizing the orthogonal projection
    of the current value onto ``N_k``.

    Raises
    ------
    ProjectionFailed
        If a projection is not realized by the admissible ``L0`` elements.
    """
    tol = resolve(tol)
    nk = nk_spaces(spec, tol=tol) if nk is None else nk
    rhs = path.rhs if f is None else f
    c = np.array(path.c, dtype=complex).reshape(-1)
    current = path if f is None else propagate_path(spec, path.lam, rhs, c)
    if nk.l0.shape[1] == 0:
        return current
    grid = nk.grid
    order = [0] + list(range(1, len(grid.right) + 1)) + [-i for i in range(1, len(grid.left) + 1)]
    scale = max(1.0, float(np.max(np.abs(c))))
    for k in order:
        sp = nk[k]
        if sp.dim == 0:
            continue
        v = _condition_value(current, grid, k)
        p = sp.basis @ (sp.basis.conj().T @ v)
        y = linalg.lstsq(sp.H, p, tol.rank)
        miss = float(np.linalg.norm(sp.H @ y - p))
        if miss > tol.lin * scale:
            raise ProjectionFailed(f"projection at tau_{k} not realized (residual {miss:.3g})")
        c = c - sp.Z @ y
        current = propagate_path(spec, path.lam, rhs, c)
    return current
