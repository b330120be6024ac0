"""Random and engineered systems for property checks."""

from __future__ import annotations

import numpy as np

from .model import Atom, GapDensity, SystemSpec, jump_matrices
from .propagate import RightHandSide, transfer_matrix


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (A + A.conj().T) / 2


def random_psd(rng, n: int, rank: int | None = None, scale: float = 1.0) -> np.ndarray:
    rank = int(rng.integers(0, n + 1)) if rank is None else rank
    G = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return scale * (G @ G.conj().T) / max(n, 1)


def random_J(rng, n: int) -> np.ndarray:
    """Invertible skew-Hermitian ``J = i H`` with eigenvalues of ``H`` in ``+-[0.5, 1.5]``."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    ev = rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], n)
    return 1j * (Q * ev) @ Q.conj().T


def _positions(rng, N, a=0.0, b=1.0):
    # well separated atom positions
    cuts = np.sort(rng.uniform(0.15, 1.0, N + 1))
    widths = 0.25 + cuts
    nodes = a + (b - a) * np.cumsum(widths) / widths.sum()
    return nodes[:N]


def random_spec(seed_or_rng=None, n: int | None = None, N: int | None = None,
                densities: bool = False, a: float = 0.0, b: float = 1.0,
                max_n: int = 4, max_N: int = 6) -> SystemSpec:
    """Random valid system; ``densities`` adds constant gap densities of ``q`` and ``w``."""
    rng = _rng(seed_or_rng)
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    N = int(rng.integers(1, max_N + 1)) if N is None else N
    J = random_J(rng, n)
    xs = _positions(rng, N, a, b)
    atoms = tuple(Atom(x, random_hermitian(rng, n), random_psd(rng, n)) for x in xs)
    if densities:
        gaps = tuple(GapDensity(random_hermitian(rng, n), random_psd(rng, n))
                     for _ in range(N + 1))
    else:
        gaps = None
    return SystemSpec(n, a, b, J, atoms, gaps)


def random_rhs(seed_or_rng, spec: SystemSpec, atoms_only: bool = False) -> RightHandSide:
    rng = _rng(seed_or_rng)
    n, N = spec.n, spec.N
    at = rng.normal(size=(N, n)) + 1j * rng.normal(size=(N, n))
    if atoms_only:
        return RightHandSide.at_atoms(spec, at)
    gp = rng.normal(size=(N + 1, n)) + 1j * rng.normal(size=(N + 1, n))
    return RightHandSide(gp, at)


def _isotropic(rng, J):
    # unit k with k^* J k = 0, from one positive and one negative direction of iJ
    ev, V = np.linalg.eigh(1j * J)
    pos, neg = V[:, ev > 0], V[:, ev < 0]
    if not pos.shape[1] or not neg.shape[1]:
        raise ValueError("iJ must be indefinite")
    p = pos @ (rng.normal(size=pos.shape[1]) + 1j * rng.normal(size=pos.shape[1]))
    m = neg @ (rng.normal(size=neg.shape[1]) + 1j * rng.normal(size=neg.shape[1]))
    p = p / np.sqrt(abs(p.conj() @ (1j * J) @ p))
    m = m / np.sqrt(abs(m.conj() @ (1j * J) @ m))
    k = p + np.exp(2j * np.pi * rng.uniform()) * m
    return k / np.linalg.norm(k)


def hermitian_with_action(rng, k, h) -> np.ndarray:
    """A Hermitian ``H`` with ``H k = h``; requires ``k^* h`` real."""
    kk = np.real(k.conj() @ k)
    P = np.eye(k.size) - np.outer(k, k.conj()) / kk
    R = random_hermitian(rng, k.size)
    H = (np.outer(h, k.conj()) + np.outer(k, h.conj())) / kk \
        - np.real(k.conj() @ h) * np.outer(k, k.conj()) / kk ** 2
    return H + P @ R @ P


def _psd_killing(rng, n, vecs):
    # PSD matrix with every vector of vecs in its kernel, rank as large as possible
    V = np.column_stack(vecs) if vecs else np.zeros((n, 0))
    if V.shape[1]:
        Q, _ = np.linalg.qr(V)
        P = np.eye(n) - Q @ Q.conj().T
    else:
        P = np.eye(n)
    return P @ random_psd(rng, n, n) @ P


def _compact_solution_spec(rng, n, N, lam0, kill_norm):
    """System with a solution at real ``lam0`` vanishing near both endpoints."""
    if N < 2:
        raise ValueError("need at least two atoms")
    if kill_norm and lam0 != 0:
        raise ValueError("zero-norm construction needs lam0 = 0")
    J = random_J(rng, n)
    for _ in range(100):
        ev = np.linalg.eigvalsh(1j * J)
        if ev.min() < 0 < ev.max():
            break
        J = random_J(rng, n)
    else:
        raise ValueError("could not draw an indefinite J")
    xs = _positions(rng, N)
    spec0 = SystemSpec(n, 0.0, 1.0, J, tuple(Atom(x, np.zeros((n, n)), np.zeros((n, n))) for x in xs))
    k = _isotropic(rng, J)
    atoms = []
    sharp = []
    # first atom: B_+(lam0) k = 0 with zero left value
    dw = _psd_killing(rng, n, [k / 2] if kill_norm else [])
    dq = hermitian_with_action(rng, k, -2 * J @ k) + lam0 * dw
    atoms.append(Atom(xs[0], dq, dw))
    sharp.append(k / 2)
    u = k
    for i in range(1, N - 1):
        um = transfer_matrix(spec0, i, lam0) @ u
        for _ in range(100):
            dq = random_hermitian(rng, n)
            at = Atom(xs[i], dq, np.zeros((n, n)) if kill_norm else random_psd(rng, n))
            jp = jump_matrices(at, J, lam0)
            if np.linalg.cond(jp.Bplus) < 1e6:
                break
        up = np.linalg.solve(jp.Bplus, jp.Bminus @ um)
        if kill_norm:
            # lam0 = 0, so the jump does not involve dw
            at = Atom(xs[i], dq, _psd_killing(rng, n, [(um + up) / 2]))
        atoms.append(at)
        sharp.append((um + up) / 2)
        u = up
    p = transfer_matrix(spec0, N - 1, lam0) @ u
    dw = _psd_killing(rng, n, [p / 2]) if kill_norm else random_psd(rng, n)
    dq = hermitian_with_action(rng, p, 2 * J @ p) + lam0 * dw
    atoms.append(Atom(xs[-1], dq, dw))
    sharp.append(p / 2)
    return SystemSpec(n, 0.0, 1.0, J, tuple(atoms)), np.array(sharp)


def engineered_unsolvable(seed_or_rng=None, n: int = 2, N: int = 3, lam0: float = 0.0):
    """System, real ``lam0`` and ``f`` for which ``J u' + (q - lam0 w) u = w f`` has no solution.

    A solution ``v`` of the homogeneous equation vanishing near both
    endpoints is built in; ``f = v`` at the atoms then violates the
    orthogonality condition since ``int v^* w v > 0``.
    """
    rng = _rng(seed_or_rng)
    for _ in range(50):
        spec, sharp = _compact_solution_spec(rng, n, N, lam0, kill_norm=False)
        norm = sum(np.real(s.conj() @ at.dw @ s) for s, at in zip(sharp, spec.atoms))
        if norm > 1e-3:
            return spec, float(lam0), RightHandSide.at_atoms(spec, sharp)
    raise RuntimeError("failed to engineer an unsolvable instance")


def engineered_l0_spec(seed_or_rng=None, n: int = 2, N: int = 3) -> SystemSpec:
    """Purely atomic system whose ``L0`` is non-trivial."""
    rng = _rng(seed_or_rng)
    spec, _ = _compact_solution_spec(rng, n, N, 0.0, kill_norm=True)
    return spec
