"""Problem data for ``J u' + q u = w f`` with atomic coefficients.

A :class:`SystemSpec` describes the coefficients on a finite interval
``(a, b)``: Dirac masses ``dq``, ``dw`` at finitely many atoms and constant
densities ``Q``, ``W`` on the gaps between consecutive atoms.  This module
validates such data, forms the jump matrices

    B_plus(x, lam)  = J + (dq - lam dw) / 2
    B_minus(x, lam) = J - (dq - lam dw) / 2

and locates the spectral parameters (``bad_lambda_set``) and the atoms
(``xi_set``) at which a jump matrix is singular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import GenericityNotFound, SpecInvalid
from .tolerances import Tolerances, resolve


def _cmat(A, n=None):
    A = np.array(A, dtype=complex)
    if n is not None and A.shape != (n, n):
        raise ValueError(f"expected {n}x{n} matrix, got shape {A.shape}")
    return A


@dataclass(frozen=True, eq=False)
class Atom:
    """Point mass of ``q`` and ``w`` at position ``x``."""

    x: float
    dq: np.ndarray
    dw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "dq", _cmat(self.dq))
        object.__setattr__(self, "dw", _cmat(self.dw))


@dataclass(frozen=True, eq=False)
class GapDensity:
    """Constant densities of ``q`` and ``w`` on one gap."""

    Qd: np.ndarray
    Wd: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Qd", _cmat(self.Qd))
        object.__setattr__(self, "Wd", _cmat(self.Wd))

    @classmethod
    def zeros(cls, n: int) -> "GapDensity":
        return cls(np.zeros((n, n)), np.zeros((n, n)))


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """The triple ``(J, q, w)`` on ``(a, b)``.

    Gap ``j`` (``0 <= j <= N``) is the open interval between ``x_j`` and
    ``x_{j+1}`` with ``x_0 = a`` and ``x_{N+1} = b``; atom ``i`` (0-based)
    sits at ``x_{i+1}``.  Omitted gaps default to zero densities.
    """

    n: int
    a: float
    b: float
    J: np.ndarray
    atoms: tuple = ()
    gaps: tuple = None
    _Jinv: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n = int(self.n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "J", _cmat(self.J))
        atoms = tuple(a if isinstance(a, Atom) else Atom(**a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        gaps = self.gaps
        if gaps is None:
            gaps = tuple(GapDensity.zeros(n) for _ in range(len(atoms) + 1))
        object.__setattr__(self, "gaps", tuple(gaps))
        try:
            Jinv = np.linalg.inv(self.J)
        except np.linalg.LinAlgError:
            Jinv = None
        object.__setattr__(self, "_Jinv", Jinv)

    @property
    def N(self) -> int:
        return len(self.atoms)

    @property
    def Jinv(self) -> np.ndarray:
        return self._Jinv

    @property
    def nodes(self) -> np.ndarray:
        """``x_0, ..., x_{N+1}``."""
        return np.array([self.a] + [at.x for at in self.atoms] + [self.b])

    def gap_bounds(self, j: int) -> tuple[float, float]:
        x = self.nodes
        return float(x[j]), float(x[j + 1])

    @property
    def purely_atomic(self) -> bool:
        """True when no gap carries a ``w`` density."""
        return all(not np.any(g.Wd) for g in self.gaps)

    def atom_index(self, x: float, atol: float | None = None) -> int | None:
        """0-based index of the atom at ``x``, or None."""
        if atol is None:
            atol = 1e-12 * max(1.0, self.b - self.a)
        for i, at in enumerate(self.atoms):
            if abs(at.x - x) <= atol:
                return i
        return None

    def gap_of(self, x: float) -> int:
        """Gap containing the non-atom point ``x`` (closed at both ends)."""
        x_nodes = self.nodes
        j = int(np.searchsorted(x_nodes, x, side="right")) - 1
        return min(max(j, 0), self.N)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


def _herm_defect(A) -> float:
    scale = max(np.linalg.norm(A, 2), 1.0)
    return np.linalg.norm(A - A.conj().T, 2) / scale


def _min_eig_rel(A) -> float:
    H = (A + A.conj().T) / 2
    scale = max(np.linalg.norm(H, 2), 1.0)
    return float(np.linalg.eigvalsh(H).min()) / scale


def validate(spec: SystemSpec, tol: Tolerances | None = None) -> ValidationReport:
    """Check the structural hypotheses on the data; never raises."""
    tol = resolve(tol)
    rep = ValidationReport()
    bad = rep.violations.append
    n = spec.n
    if n < 1:
        bad("n must be a positive integer")
        return rep
    if not spec.a < spec.b:
        bad(f"need a < b, got a={spec.a}, b={spec.b}")
    J = spec.J
    if J.shape != (n, n):
        bad(f"J has shape {J.shape}, expected ({n}, {n})")
        return rep
    if np.linalg.norm(J + J.conj().T, 2) > tol.sym * max(np.linalg.norm(J, 2), 1.0):
        bad("J is not skew-Hermitian")
    s = np.linalg.svd(J, compute_uv=False)
    if s[0] == 0 or s[-1] <= tol.det * s[0]:
        bad("J is not invertible")
    prev = spec.a
    for i, at in enumerate(spec.atoms):
        where = f"atom {i} (x={at.x:g})"
        if not prev < at.x:
            bad(f"{where}: positions must increase strictly inside (a, b)")
        prev = at.x
        if at.dq.shape != (n, n) or at.dw.shape != (n, n):
            bad(f"{where}: dq/dw must be {n}x{n}")
            continue
        if _herm_defect(at.dq) > tol.sym:
            bad(f"{where}: dq is not Hermitian")
        if _herm_defect(at.dw) > tol.sym:
            bad(f"{where}: dw is not Hermitian")
        elif _min_eig_rel(at.dw) < -tol.sym:
            bad(f"{where}: dw is not positive semi-definite")
    if spec.atoms and not spec.atoms[-1].x < spec.b:
        bad("last atom must lie strictly below b")
    if len(spec.gaps) != spec.N + 1:
        bad(f"expected {spec.N + 1} gaps, got {len(spec.gaps)}")
    for j, g in enumerate(spec.gaps):
        where = f"gap {j}"
        if g.Qd.shape != (n, n) or g.Wd.shape != (n, n):
            bad(f"{where}: Q/W must be {n}x{n}")
            continue
        if _herm_defect(g.Qd) > tol.sym:
            bad(f"{where}: Q density is not Hermitian")
        if _herm_defect(g.Wd) > tol.sym:
            bad(f"{where}: W density is not Hermitian")
        elif _min_eig_rel(g.Wd) < -tol.sym:
            bad(f"{where}: W density is not positive semi-definite")
    return rep


def require_valid(spec: SystemSpec, tol: Tolerances | None = None) -> SystemSpec:
    rep = validate(spec, tol)
    if not rep.passed:
        raise SpecInvalid(rep)
    return spec


# --------------------------------------------------------------------------
# jump matrices and trouble sets


@dataclass(frozen=True, eq=False)
class JumpPair:
    Bminus: np.ndarray
    Bplus: np.ndarray
    lam: complex


def jump_matrices(atom: Atom, J, lam: complex) -> JumpPair:
    half = 0.5 * (atom.dq - lam * atom.dw)
    return JumpPair(J - half, J + half, complex(lam))


def is_singular(B, tol_det: float) -> bool:
    s = np.linalg.svd(B, compute_uv=False)
    return bool(s[0] == 0 or s[-1] <= tol_det * s[0])


@dataclass(frozen=True)
class BadLambdaSet:
    """Either all of C or a finite, conjugation-closed root list."""

    all_of_c: bool
    roots: tuple = ()

    def contains(self, lam: complex, tol_gap: float) -> bool:
        if self.all_of_c:
            return True
        return any(abs(lam - r) < tol_gap for r in self.roots)


def _finite_gen_eigs(A, B, tol):
    if not np.any(B):
        return []
    alpha, beta = scipy.linalg.eigvals(A, B, homogeneous_eigvals=True)
    out = []
    for al, be in zip(alpha, beta):
        if abs(be) > tol * max(abs(al), abs(be)):
            out.append(complex(al / be))
    return out


def bad_lambda_set(atom: Atom, J, tol: Tolerances | None = None) -> BadLambdaSet:
    """``{lam : det B_plus(x, lam) det B_minus(x, lam) = 0}``.

    Each determinant is a polynomial of degree at most ``n`` in ``lam``, so
    singularity at ``n + 1`` distinct sample points means it vanishes
    identically.  Otherwise the roots are the finite generalized eigenvalues
    of ``B_plus(x, 0) v = lam (dw/2) v`` and ``B_minus(x, 0) v = -lam (dw/2) v``.
    """
    tol = resolve(tol)
    n = J.shape[0]
    scale = 1.0 + np.linalg.norm(atom.dq, 2) + np.linalg.norm(atom.dw, 2)
    samples = [scale * np.exp(2j * np.pi * (k + 0.37) / (n + 1)) for k in range(n + 1)]
    for which in ("Bplus", "Bminus"):
        if all(is_singular(getattr(jump_matrices(atom, J, lam), which), tol.det)
               for lam in samples):
            return BadLambdaSet(True)
    jp = jump_matrices(atom, J, 0.0)
    half = 0.5 * atom.dw
    roots = _finite_gen_eigs(jp.Bplus, half, tol.det)
    roots += _finite_gen_eigs(jp.Bminus, -half, tol.det)
    roots.sort(key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    return BadLambdaSet(False, tuple(roots))


def xi_set(spec: SystemSpec, lam: complex, tol: Tolerances | None = None) -> list[int]:
    """0-based indices of atoms where a jump matrix is singular at ``lam``."""
    tol = resolve(tol)
    out = []
    for i, at in enumerate(spec.atoms):
        jp = jump_matrices(at, spec.J, lam)
        if is_singular(jp.Bplus, tol.det) or is_singular(jp.Bminus, tol.det):
            out.append(i)
    return out


# --------------------------------------------------------------------------
# sampling of generic spectral parameters


@dataclass(frozen=True)
class Rectangle:
    re_min: float = -2.0
    re_max: float = 2.0
    im_min: float = 0.25
    im_max: float = 2.0

    def sample(self, rng) -> complex:
        re = rng.uniform(self.re_min, self.re_max)
        im = rng.uniform(self.im_min, self.im_max)
        return complex(re, im)


@dataclass(frozen=True)
class Annulus:
    center: complex = 0j
    r_in: float = 0.5
    r_out: float = 2.0

    def sample(self, rng) -> complex:
        r = np.sqrt(rng.uniform(self.r_in ** 2, self.r_out ** 2))
        t = rng.uniform(0.0, 2 * np.pi)
        return complex(self.center + r * np.exp(1j * t))


def generic_lambda(spec: SystemSpec, region: Rectangle | Annulus | None = None,
                   seed: int = 0, tol: Tolerances | None = None) -> complex:
    """Sample a non-real ``lam`` with ``rank B(lam) == rank B(conj lam)``.

    Candidates closer than ``tol.gap`` to the real axis or to a finite bad
    set of some atom are rejected; atoms whose bad set is all of C are
    skipped (they are partition points by construction).
    """
    from .assembly import assemble

    tol = resolve(tol)
    region = Annulus() if region is None else region
    rng = np.random.default_rng(seed)
    finite = []
    for at in spec.atoms:
        bl = bad_lambda_set(at, spec.J, tol)
        if not bl.all_of_c:
            finite.extend(bl.roots)
    from .linalg import numerical_rank

    for _ in range(tol.max_tries):
        lam = region.sample(rng)
        if abs(lam.imag) < tol.gap:
            continue
        if any(abs(lam - r) < tol.gap or abs(lam.conjugate() - r) < tol.gap for r in finite):
            continue
        if spec.N == 0:
            return lam
        r1 = numerical_rank(assemble(spec, lam)[0].B, tol.rank)
        r2 = numerical_rank(assemble(spec, lam.conjugate())[0].B, tol.rank)
        if r1 == r2:
            return lam
    raise GenericityNotFound(f"no generic lambda after {tol.max_tries} samples")


def make_spec(J, atoms: Sequence, a: float, b: float, gaps=None) -> SystemSpec:
    """Convenience constructor taking ``(x, dq, dw)`` triples."""
    J = np.asarray(J, dtype=complex)
    ats = [at if isinstance(at, Atom) else Atom(*at) for at in atoms]
    gps = None
    if gaps is not None:
        gps = tuple(g if isinstance(g, GapDensity) else GapDensity(*g) for g in gaps)
    return SystemSpec(J.shape[0], a, b, J, tuple(ats), gps)
