"""Closed-form reference for a periodic example with infinite-dimensional ``L0``.

``J = (0 -1; 1 0)``, ``q = S sum_k (delta_{2k} - delta_{2k+1})`` with
``S = (0 2; 2 0)`` and ``w = diag(2, 0) sum_k delta_k``, truncated to the
atoms ``1..4M`` on ``(1/2, 4M + 1/2)``.  Solutions are constant between
integers.  For ``lam != 0`` the canonical resolvent is supported on the odd
gaps ``(2k-1, 2k)`` where it equals ``(alpha, beta)`` with

    alpha = -(f1(2k-1) + f1(2k)) / lam,
    beta  = -(f1(2k-1) - f1(2k)) / 2,

and it takes half that value at the two end atoms of such a gap.
Nothing here uses linear algebra beyond these formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import SystemSpec, make_spec

J = np.array([[0, -1], [1, 0]], dtype=complex)
S = np.array([[0, 2], [2, 0]], dtype=complex)
DW = np.diag([2.0, 0.0]).astype(complex)


@dataclass(frozen=True)
class ExampleSpec:
    """Truncation with ``M`` periods of length 4."""

    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")

    @property
    def n_atoms(self) -> int:
        return 4 * self.M

    @property
    def a(self) -> float:
        return 0.5

    @property
    def b(self) -> float:
        return 4 * self.M + 0.5

    @cached_property
    def spec(self) -> SystemSpec:
        atoms = [(k, -S if k % 2 else S, DW) for k in range(1, self.n_atoms + 1)]
        return make_spec(J, atoms, self.a, self.b)

    def interior_atoms(self, margin: int = 2) -> list[int]:
        """1-based atom positions at distance ``>= margin`` from both ends."""
        return [k for k in range(1, self.n_atoms + 1)
                if k - self.a >= margin - 0.5 and self.b - k >= margin - 0.5]


def example_spec(M: int) -> ExampleSpec:
    return ExampleSpec(M)


def _first_components(M, f):
    f = np.asarray(f, dtype=complex)
    if f.ndim == 2:
        f = f[:, 0]
    if f.shape != (4 * M,):
        raise ValueError(f"expected {4 * M} atom values")
    return f


def odd_gap_values(M: int, lam: complex, f) -> np.ndarray:
    """``(alpha, beta)`` on each odd gap ``(2k-1, 2k)``, ``k = 1..2M``."""
    if lam == 0:
        raise ValueError("lam must be non-zero")
    f1 = _first_components(M, f)
    odd, even = f1[0::2], f1[1::2]
    alpha = -(odd + even) / lam
    beta = -(odd - even) / 2
    return np.stack([alpha, beta], axis=1)


def _locate(M: int, x: float):
    # ("gap", k) for the open odd gap (2k-1, 2k), ("atom", m) at integer m,
    # None elsewhere
    if not 0.5 <= x <= 4 * M + 0.5:
        raise ValueError(f"x={x} outside [0.5, {4 * M + 0.5}]")
    m = round(x)
    if x == m and 1 <= m <= 4 * M:
        return "atom", int(m)
    fl = int(np.floor(x))
    if fl % 2 == 1 and 1 <= fl < 4 * M:
        return "gap", (fl + 1) // 2
    return None


def example_resolvent(M: int, lam: complex, f, x: float) -> np.ndarray:
    """Canonical resolvent at ``x``; ``f`` holds atom values (``4M`` or ``4M x 2``)."""
    vals = odd_gap_values(M, lam, f)
    where = _locate(M, float(x))
    if where is None:
        return np.zeros(2, complex)
    kind, m = where
    if kind == "gap":
        return vals[m - 1].copy()
    return 0.5 * vals[(m + 1) // 2 - 1]


def example_norm_sq(M: int, lam: complex, f) -> float:
    """``|lam|^-2 sum_k |f1(2k-1) + f1(2k)|^2``."""
    f1 = _first_components(M, f)
    return float(np.sum(np.abs(f1[0::2] + f1[1::2]) ** 2) / abs(lam) ** 2)


def example_norm_sq_direct(M: int, lam: complex, f) -> float:
    """``sum_m 2 |u_1(m)|^2`` over atoms, using balanced atom values."""
    return float(sum(2 * abs(example_resolvent(M, lam, f, m)[0]) ** 2
                     for m in range(1, 4 * M + 1)))


def _chi_sharp(lo: float, hi: float, x: float) -> float:
    if lo < x < hi:
        return 1.0
    if x == lo or x == hi:
        return 0.5
    return 0.0


def example_green(M: int, x: float, y: float, lam: complex, balanced: bool = True) -> np.ndarray:
    """Displayed Green's kernel ``G(x, y, lam)``.

    For non-integer ``x`` the odd-gap formula with ``chi#`` in both
    variables; at integer ``x`` half the one-sided limit from inside the
    adjacent odd gap.  ``balanced=False`` evaluates the indicator in ``y``
    as 1 on the closed gap instead of 1/2 at its ends.
    """
    lam = complex(lam)
    x, y = float(x), float(y)
    m = round(x)
    if x == m and 1 <= m <= 4 * M:
        # half the limit from inside the adjacent odd gap
        factor = 0.5
        if m % 2 == 1:
            lo, hi = m, m + 1
            sgn = 1.0 if y <= m else -1.0
        else:
            lo, hi = m - 1, m
            sgn = 1.0 if y < m else -1.0
    else:
        fl = int(np.floor(x))
        if fl % 2 == 0 or not 1 <= fl < 4 * M:
            return np.zeros((2, 2), complex)
        lo, hi, factor = fl, fl + 1, 1.0
        sgn = float(np.sign(x - y))
    cy = _chi_sharp(lo, hi, y)
    if not balanced and cy:
        cy = 1.0
    core = -np.array([[1, 0], [0, 0]], complex) / lam + 0.5 * np.array([[0, 1], [-1, 0]]) * sgn
    return factor * cy * core


def example_kernel(M: int, x: float, atom: int, lam: complex, balanced: bool = True) -> np.ndarray:
    """``G(x, y, lam) dw(y)`` at the atom ``y = atom`` (1-based position)."""
    return example_green(M, x, float(atom), lam, balanced) @ DW


def tmax_decomposition(M: int):
    """Bases of ``H = {u1(2k-1) = u1(2k)}`` and ``H_inf = {f1(2k-1) = -f1(2k)}``.

    Columns are vectors of first components at the atoms ``1..4M``,
    orthonormal in ``C^{4M}``.
    """
    P = 2 * M
    H = np.zeros((4 * M, P), complex)
    Hinf = np.zeros((4 * M, P), complex)
    for k in range(P):
        H[2 * k, k] = H[2 * k + 1, k] = 1 / np.sqrt(2)
        Hinf[2 * k, k] = 1 / np.sqrt(2)
        Hinf[2 * k + 1, k] = -1 / np.sqrt(2)
    return H, Hinf
