"""Balanced solutions on gaps and across atoms.

On gap ``j`` the coefficients are constant, so the fundamental matrix is
``U_j(x, lam) = expm((x - x_j) A_j(lam))`` with
``A_j(lam) = J^{-1} (lam W_j - Q_j)``, and a solution of the
non-homogeneous equation reads

    u(x) = U_j(x, lam) (c_j + J^{-1} I_j(x)),
    I_j(x) = int_{x_j}^{x} U_j(t, conj(lam))^* W_j f_j dt.

The integral is evaluated in closed form with the Van Loan block
exponential.  Across an atom the path simply carries the next initial
vector ``c_{j+1} = u^+(x_{j+1})``; whether the jump relation holds is the
business of :func:`residual`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import OutOfDomain
from .model import SystemSpec, jump_matrices


def generator(spec: SystemSpec, j: int, lam: complex) -> np.ndarray:
    g = spec.gaps[j]
    return spec.Jinv @ (lam * g.Wd - g.Qd)


def transfer_matrix(spec: SystemSpec, j: int, lam: complex, x: float | None = None) -> np.ndarray:
    """``U_j(x, lam)``; ``x`` defaults to the right end of the gap."""
    left, right = spec.gap_bounds(j)
    x = right if x is None else float(x)
    if not left <= x <= right:
        raise OutOfDomain(f"x={x} outside gap {j} = [{left}, {right}]")
    return scipy.linalg.expm((x - left) * generator(spec, j, lam))


def _integral_of_adjoint_flow(spec, j, lam, length):
    # int_0^L expm(t A(conj lam))^* dt via expm([[B, I], [0, 0]] L), B = A^*
    n = spec.n
    B = generator(spec, j, np.conj(lam)).conj().T
    M = np.zeros((2 * n, 2 * n), complex)
    M[:n, :n] = B
    M[:n, n:] = np.eye(n)
    return scipy.linalg.expm(length * M)[:n, n:]


@dataclass(frozen=True, eq=False)
class RightHandSide:
    """Per-gap constant vectors and per-atom values of ``f``."""

    gaps: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gaps", np.array(self.gaps, dtype=complex))
        object.__setattr__(self, "atoms", np.array(self.atoms, dtype=complex))

    @classmethod
    def zeros(cls, spec: SystemSpec) -> "RightHandSide":
        return cls(np.zeros((spec.N + 1, spec.n)), np.zeros((spec.N, spec.n)))

    @classmethod
    def at_atoms(cls, spec: SystemSpec, values) -> "RightHandSide":
        values = np.asarray(values, dtype=complex).reshape(spec.N, spec.n)
        return cls(np.zeros((spec.N + 1, spec.n)), values)

    def __add__(self, other):
        return RightHandSide(self.gaps + other.gaps, self.atoms + other.atoms)

    def __mul__(self, s):
        return RightHandSide(s * self.gaps, s * self.atoms)

    __rmul__ = __mul__


def _rhs(spec, f):
    return RightHandSide.zeros(spec) if f is None else f


def gap_integral(spec: SystemSpec, j: int, lam: complex, f: RightHandSide | None,
                 x: float | None = None) -> np.ndarray:
    """``I_j`` over ``(x_j, x)``; the whole gap when ``x`` is None."""
    f = _rhs(spec, f)
    left, right = spec.gap_bounds(j)
    x = right if x is None else float(x)
    Wf = spec.gaps[j].Wd @ f.gaps[j]
    if not np.any(Wf) or x == left:
        return np.zeros(spec.n, complex)
    return _integral_of_adjoint_flow(spec, j, lam, x - left) @ Wf


@dataclass(frozen=True, eq=False)
class BalancedPath:
    """A balanced piecewise solution candidate.

    ``c[j] = u^+(x_j)`` for ``j = 0..N`` (``c[0] = u^+(a)``).  Atom triples
    are derived at construction; ``u_minus[i]``, ``u_sharp[i]`` and
    ``u_plus[i]`` refer to atom ``i`` (0-based, at ``x_{i+1}``).
    """

    spec: SystemSpec
    lam: complex
    rhs: RightHandSide
    c: np.ndarray
    u_minus: np.ndarray = field(repr=False, default=None)
    end_value: np.ndarray = field(repr=False, default=None)
    _U_end: tuple = field(repr=False, default=None)
    _I_end: tuple = field(repr=False, default=None)

    @property
    def u_plus(self) -> np.ndarray:
        return self.c[1:]

    @property
    def u_sharp(self) -> np.ndarray:
        return 0.5 * (self.u_minus + self.u_plus)

    @property
    def start_value(self) -> np.ndarray:
        """``u^+(a)``."""
        return self.c[0]

    def gap_value(self, j: int, x: float) -> np.ndarray:
        """Value on the closed gap ``j`` (one-sided limits at its ends)."""
        spec = self.spec
        left, right = spec.gap_bounds(j)
        if x == left:
            return self.c[j].copy()
        if x == right:
            return self._U_end[j] @ (self.c[j] + spec.Jinv @ self._I_end[j])
        U = transfer_matrix(spec, j, self.lam, x)
        Ix = gap_integral(spec, j, self.lam, self.rhs, x)
        return U @ (self.c[j] + spec.Jinv @ Ix)

    def combine(self, other: "BalancedPath", alpha=1.0, beta=1.0) -> "BalancedPath":
        """``alpha * self + beta * other`` (same system and ``lam``)."""
        return propagate_path(self.spec, self.lam, alpha * self.rhs + beta * other.rhs,
                              alpha * self.c + beta * other.c)


def propagate_path(spec: SystemSpec, lam: complex, f: RightHandSide | None, c) -> BalancedPath:
    """Materialize a path from the initial vectors ``c_0..c_N``."""
    f = _rhs(spec, f)
    c = np.array(c, dtype=complex).reshape(spec.N + 1, spec.n)
    U_end, I_end, ends = [], [], []
    for j in range(spec.N + 1):
        U = transfer_matrix(spec, j, lam)
        Ij = gap_integral(spec, j, lam, f)
        U_end.append(U)
        I_end.append(Ij)
        ends.append(U @ (c[j] + spec.Jinv @ Ij))
    ends = np.array(ends).reshape(spec.N + 1, spec.n)
    return BalancedPath(spec, complex(lam), f, c, ends[:-1], ends[-1], tuple(U_end), tuple(I_end))


def evaluate(path: BalancedPath, x: float):
    """``(u^-(x), u^#(x), u^+(x))``.

    At ``a`` only ``u^+(a)`` exists and at ``b`` only ``u^-(b)``; the
    triple then repeats that value.
    """
    spec = path.spec
    x = float(x)
    if x < spec.a or x > spec.b:
        raise OutOfDomain(f"x={x} outside [{spec.a}, {spec.b}]")
    if x == spec.a:
        v = path.c[0].copy()
        return v, v, v
    if x == spec.b:
        v = path.end_value.copy()
        return v, v, v
    i = spec.atom_index(x)
    if i is not None:
        return path.u_minus[i].copy(), path.u_sharp[i].copy(), path.u_plus[i].copy()
    v = path.gap_value(spec.gap_of(x), x)
    return v, v, v


def balanced_value(path: BalancedPath, x: float) -> np.ndarray:
    return evaluate(path, x)[1]


@dataclass
class ResidualReport:
    jump: np.ndarray
    gap: np.ndarray

    @property
    def max(self) -> float:
        vals = np.concatenate([self.jump, self.gap])
        return float(vals.max()) if vals.size else 0.0


def _cheb_derivative(values, left, right):
    # values sampled at Chebyshev-Lobatto points mapped to [left, right]
    K = values.shape[0]
    t = np.cos(np.pi * np.arange(K) / (K - 1))
    out = np.empty_like(values)
    for comp in range(values.shape[1]):
        for part in (np.real, np.imag):
            coef = np.polynomial.chebyshev.chebfit(t, part(values[:, comp]), K - 1)
            d = np.polynomial.chebyshev.chebval(t, np.polynomial.chebyshev.chebder(coef))
            if part is np.real:
                out[:, comp] = d
            else:
                out[:, comp] += 1j * d
    return out * (2.0 / (right - left)), t


def residual(path: BalancedPath, lam: complex | None = None,
             f: RightHandSide | None = None, samples: int = 24) -> ResidualReport:
    """Residuals of ``J u' + (q - lam w) u = w f`` along ``path``.

    Jump residual at each atom is ``|B_+ u^+ - B_- u^- - dw f(x_k)|``.  On
    each gap the path is sampled at Chebyshev points, differentiated
    spectrally and substituted into the constant-coefficient equation.
    """
    spec = path.spec
    lam = path.lam if lam is None else complex(lam)
    f = path.rhs if f is None else f
    jumps = np.zeros(spec.N)
    for i, at in enumerate(spec.atoms):
        jp = jump_matrices(at, spec.J, lam)
        r = jp.Bplus @ path.u_plus[i] - jp.Bminus @ path.u_minus[i] - at.dw @ f.atoms[i]
        jumps[i] = np.linalg.norm(r)
    gaps = np.zeros(spec.N + 1)
    for j, g in enumerate(spec.gaps):
        left, right = spec.gap_bounds(j)
        t = np.cos(np.pi * np.arange(samples) / (samples - 1))
        xs = left + (t + 1) * (right - left) / 2
        vals = np.array([path.gap_value(j, x) for x in xs])
        du, _ = _cheb_derivative(vals, left, right)
        Wf = g.Wd @ f.gaps[j]
        R = du @ spec.J.T + vals @ (g.Qd - lam * g.Wd).T - Wf
        gaps[j] = float(np.max(np.linalg.norm(R, axis=1)))
    return ResidualReport(jumps, gaps)
