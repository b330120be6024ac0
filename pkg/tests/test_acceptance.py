"""Acceptance criteria with pinned tolerances.

Each test prints one ``PASS``/``FAIL`` line; the lines are also collected
and repeated in the pytest terminal summary.  Run this file directly to get
just the lines.
"""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from measgreen import assembly, canonical, greens, linalg, reference, relations
from measgreen.model import generic_lambda
from measgreen.propagate import balanced_value, gap_integral, propagate_path, transfer_matrix
from measgreen.random_specs import (engineered_l0_spec, engineered_unsolvable, random_rhs,
                                    random_spec)

from conftest import two_atom_spec

TOL_EXAMPLE = 1e-9
TOL_OFF_SUPPORT = 1e-10
TOL_IDENTITY = 1e-10
TOL_ANGLE = 1e-8
TOL_ORTHO = 1e-9
TOL_IDEMPOTENT = 1e-12
TOL_INDEPENDENT = 1e-10
TOL_CLASS = 1e-12
TOL_LAGRANGE = 1e-10
TOL_ORACLE = 1e-10

EXAMPLE_LAMBDAS = (2j, 1 + 1j, -3j)
EXAMPLE_TRIALS = 20

RESULTS = []


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


# --------------------------------------------------------------------------
# periodic example


def _interior_f(ex, rng):
    f = np.zeros((ex.n_atoms, 2), complex)
    idx = np.array(ex.interior_atoms()) - 1
    f[idx, 0] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    return f


def _odd_gap_points(ex):
    return [k + 0.5 for k in range(1, ex.n_atoms, 2)]


def _even_gap_points(ex):
    return [k + 0.5 for k in range(2, ex.n_atoms, 2)]


_EXAMPLE_CACHE = {}


def example_runs():
    """Resolvent, norm and kernel comparisons shared by the first three criteria."""
    if _EXAMPLE_CACHE:
        return _EXAMPLE_CACHE
    rel = norm = kern = off = 0.0
    ratios = {True: [], False: []}
    rng = np.random.default_rng(2024)
    for M in (1, 2, 3):
        ex = reference.example_spec(M)
        spec = ex.spec
        T = relations.tmax_subspace(spec)
        pts = _odd_gap_points(ex) + _even_gap_points(ex) + list(range(1, ex.n_atoms + 1))
        odd = _odd_gap_points(ex)
        for lam in EXAMPLE_LAMBDAS:
            ctx = greens.ResolventContext.build(spec, T, lam)
            table = greens.greens_table(ctx, pts)
            for _ in range(EXAMPLE_TRIALS):
                f = _interior_f(ex, rng)
                path = greens.resolvent_apply(ctx, f)
                got = np.array([balanced_value(path, x) for x in odd])
                want = np.array([reference.example_resolvent(M, lam, f, x) for x in odd])
                rel = max(rel, np.linalg.norm(got - want) / np.linalg.norm(want))
                u = greens.resolvent_class(ctx, f)
                lhs = np.vdot(u, u).real
                rhs = reference.example_norm_sq(M, lam, f)
                norm = max(norm, abs(lhs - rhs) / rhs)
                full = np.array([balanced_value(path, x) for x in pts])
                kern = max(kern, float(np.abs(table.apply(f) - full).max()))
            # kernel blocks that must vanish: points in even gaps, and atoms
            # outside the odd gap containing x
            for p, x in enumerate(pts):
                for k in range(ex.n_atoms):
                    y = k + 1
                    inside = (x in odd and int(x) <= y <= int(x) + 1)
                    at_atom = float(x).is_integer()
                    if not inside and not at_atom:
                        off = max(off, float(np.abs(table.K[p, k]).max()))
            for bal in (True, False):
                disp = np.array([[reference.example_kernel(M, x, k + 1, lam, bal)
                                  for k in range(ex.n_atoms)] for x in pts])
                mask = np.abs(table.K) > 1e-12
                ratios[bal].extend(np.abs(disp[mask] / table.K[mask]).tolist())
    _EXAMPLE_CACHE.update(rel=rel, norm=norm, kern=kern, off=off,
                          balanced=float(np.median(ratios[True])),
                          unbalanced=float(np.median(ratios[False])))
    return _EXAMPLE_CACHE


def test_criterion_01_example_resolvent():
    r = example_runs()
    report(1, "example resolvent matches closed form on interior gaps",
           r["rel"] <= TOL_EXAMPLE, f"max relative error {r['rel']:.2e} <= {TOL_EXAMPLE:g}")


def test_criterion_02_example_norm_identity():
    r = example_runs()
    report(2, "example norm identity", r["norm"] <= TOL_EXAMPLE,
           f"max relative error {r['norm']:.2e} <= {TOL_EXAMPLE:g}")


def test_criterion_03_example_kernel():
    r = example_runs()
    ok = r["kern"] <= TOL_EXAMPLE and r["off"] <= TOL_OFF_SUPPORT
    report(3, "kernel table reproduces resolvent, off-support blocks vanish", ok,
           f"table error {r['kern']:.2e} <= {TOL_EXAMPLE:g}, off-support {r['off']:.2e} <= "
           f"{TOL_OFF_SUPPORT:g}; displayed kernel ratio balanced {r['balanced']:.6f}, "
           f"unbalanced {r['unbalanced']:.6f}")


# --------------------------------------------------------------------------
# block system


def test_criterion_04_block_identities():
    worst = 0.0
    for seed in range(50):
        spec = random_spec(1000 + seed, densities=True)
        for t in range(5):
            lam = generic_lambda(spec, seed=t)
            ids = assembly.structural_identities(spec, lam)
            worst = max(worst, ids["full_identity"] / ids["scale"],
                        ids["middle_identity"] / ids["scale"])
    report(4, "block identities on 50 specs x 5 generic lambda", worst <= TOL_IDENTITY,
           f"max residual / scale {worst:.2e} <= {TOL_IDENTITY:g}")


def test_criterion_05_integer_identities():
    bad = 0
    for s in range(100):
        spec = random_spec(2000 + s, densities=bool(s % 2))
        lam = generic_lambda(spec, seed=s)
        n = spec.n
        a = assembly.n_tilde(spec, lam)
        b = assembly.n_tilde(spec, np.conj(lam))
        d = assembly.kernel_dims(spec, lam)
        if a + b != 2 * n or a != n or d["ker_B"] != n + d["ker_B_adj"]:
            bad += 1
    report(5, "integer identities on 100 (spec, lambda) samples", bad == 0, f"{bad} failures")


def test_criterion_06_solvability_equivalence():
    disagree = engineered = unsolvable = 0
    for s in range(100):
        if s % 8 == 0:
            spec, lam, f = engineered_unsolvable(3000 + s, n=2 + s % 3, N=2 + s % 4)
            engineered += 1
        else:
            spec = random_spec(3000 + s, densities=bool(s % 2))
            lam = generic_lambda(spec, seed=s)
            f = random_rhs(s, spec)
        r = assembly.solvable(spec, lam, f)
        disagree += r.rank_test != r.orthogonality_test
        unsolvable += not r.rank_test
    ok = disagree == 0 and engineered >= 10
    report(6, "rank test equals orthogonality test on 100 triples", ok,
           f"{disagree} disagreements, {engineered} engineered, {unsolvable} unsolvable")


# --------------------------------------------------------------------------
# relations


def test_criterion_07_deficiency_bounds():
    bad = 0
    for s in range(50):
        spec = random_spec(4000 + s)
        defs = relations.deficiency_pair(spec)
        if defs.plus.n > spec.n or defs.minus.n > spec.n or defs.plus.n != defs.minus.n:
            bad += 1
    spec = two_atom_spec()
    defs = relations.deficiency_pair(spec)
    l0 = relations.l0_coefficients(spec).shape[1]
    ok = bad == 0 and (defs.plus.n, defs.minus.n, l0) == (2, 2, 1)
    report(7, "deficiency bounds on 50 specs and the two-atom example", ok,
           f"{bad} violations; two-atom n+={defs.plus.n}, n-={defs.minus.n}, dim L0={l0}")


def test_criterion_08_adjoint_and_von_neumann():
    angle = ortho = 0.0
    bad = 0
    for s in range(25):
        spec = random_spec(5000 + s)
        tmax = relations.tmax_subspace(spec)
        tmin = relations.tmin_closure_subspace(spec)
        adj = relations.adjoint_subspace(spec, tmin)
        if adj.dim != tmax.dim:
            bad += 1
        angle = max(angle, linalg.max_principal_angle(adj.basis, tmax.basis))
        defs = relations.deficiency_pair(spec)
        if tmax.dim != tmin.dim + defs.plus.n + defs.minus.n:
            bad += 1
        parts = [tmin.basis, defs.plus.subspace.basis, defs.minus.subspace.basis]
        for i in range(3):
            for j in range(i + 1, 3):
                if parts[i].shape[1] and parts[j].shape[1]:
                    ortho = max(ortho, float(np.abs(parts[i].conj().T @ parts[j]).max()))
    ok = bad == 0 and angle <= TOL_ANGLE and ortho <= TOL_ORTHO
    report(8, "adjoint of T_min is T_max and von Neumann count on 25 specs", ok,
           f"{bad} dimension mismatches, angle {angle:.2e} <= {TOL_ANGLE:g}, "
           f"orthogonality {ortho:.2e} <= {TOL_ORTHO:g}")


def test_criterion_09_classification():
    wrong = built = 0
    for s in range(25):
        spec = random_spec(6000 + s, n=2 + s % 3, N=2 + s % 4)
        defs = relations.deficiency_pair(spec)
        tmax = relations.tmax_subspace(spec)
        rng = np.random.default_rng(s)
        d = defs.plus.n
        U = None
        if d:
            U, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        r = relations.restriction_from_conditions(
            spec, relations.self_adjoint_conditions(spec, U, defs), tmax=tmax)
        adj = relations.adjoint_subspace(spec, r.T)
        built += 1
        if not r.self_adjoint or linalg.max_principal_angle(adj.basis, r.T.basis) > TOL_ANGLE:
            wrong += 1
        for m in range(min(defs.plus.n, defs.minus.n) + 1):
            bd = relations.symmetric_conditions(spec, m, defs=defs)
            r = relations.restriction_from_conditions(spec, bd, tmax=tmax)
            adj = relations.adjoint_subspace(spec, r.T)
            built += 1
            if not r.symmetric or linalg.containment_defect(r.T.basis, adj.basis) > TOL_ANGLE:
                wrong += 1
    report(9, "self-adjoint and symmetric restrictions confirmed by the adjoint", wrong == 0,
           f"{wrong} misclassifications among {built} restrictions on 25 specs")


def _canonical_metrics(spec, rng, perturbations=20):
    nk = canonical.nk_spaces(spec)
    L0 = nk.l0
    space = relations.L2wSpace(spec)
    tmax = relations.tmax_subspace(spec)
    z = rng.normal(size=tmax.dim) + 1j * rng.normal(size=tmax.dim)
    path = tmax.path(z)
    can = canonical.canonicalize(spec, path, nk=nk)
    scale = max(1.0, float(np.abs(can.c).max()))
    idem = float(np.abs(canonical.canonicalize(spec, can, nk=nk).c - can.c).max()) / scale
    cls = float(np.abs(space.coords(can.u_sharp) - space.coords(path.u_sharp)).max()) / scale
    indep = 0.0
    for _ in range(perturbations):
        y = rng.normal(size=L0.shape[1]) + 1j * rng.normal(size=L0.shape[1])
        q = propagate_path(spec, path.lam, path.rhs, path.c.ravel() + L0 @ y)
        indep = max(indep, float(np.abs(canonical.canonicalize(spec, q, nk=nk).c - can.c).max())
                    / scale)
    return L0.shape[1], idem, indep, cls


def test_criterion_10_canonicalization():
    rng = np.random.default_rng(10)
    idem = indep = cls = 0.0
    small = 0
    specs = [reference.example_spec(M).spec for M in (1, 2)]
    specs += [engineered_l0_spec(7000 + s, n=2 + s % 3, N=2 + s % 4) for s in range(25)]
    for spec in specs:
        dim, a, b, c = _canonical_metrics(spec, rng)
        small += dim < 1
        idem, indep, cls = max(idem, a), max(indep, b), max(cls, c)
    ok = (small == 0 and idem <= TOL_IDEMPOTENT and indep <= TOL_INDEPENDENT
          and cls <= TOL_CLASS)
    report(10, "canonicalization on 2 example truncations and 25 specs with L0", ok,
           f"idempotence {idem:.2e} <= {TOL_IDEMPOTENT:g}, independence {indep:.2e} <= "
           f"{TOL_INDEPENDENT:g}, class {cls:.2e} <= {TOL_CLASS:g}, {small} specs without L0")


def test_criterion_11_lagrange_identity():
    worst = 0.0
    for s in range(25):
        spec = random_spec(8000 + s)
        tmax = relations.tmax_subspace(spec)
        pairs = [tmax.pair(i) for i in range(tmax.dim)]
        for p in pairs:
            for q in pairs:
                bf = relations.boundary_form(spec, p, q, check=False)
                worst = max(worst, abs(bf - relations.lagrange_rhs(p, q)))
    report(11, "Lagrange identity on T_max bases of 25 specs", worst <= TOL_LAGRANGE,
           f"max deviation {worst:.2e} <= {TOL_LAGRANGE:g}")


# --------------------------------------------------------------------------
# transfer matrices


def _ivp(spec, j, lam, x):
    g = spec.gaps[j]
    A = spec.Jinv @ (lam * g.Wd - g.Qd)
    n = spec.n
    sol = solve_ivp(lambda t, y: (A @ y.reshape(n, n)).ravel(), (spec.gap_bounds(j)[0], x),
                    np.eye(n, dtype=complex).ravel(), method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[:, -1].reshape(n, n)


def _quadrature(spec, j, lam, f, x, nodes=64):
    left = spec.gap_bounds(j)[0]
    t, w = np.polynomial.legendre.leggauss(nodes)
    ts = left + (t + 1) * (x - left) / 2
    Wf = spec.gaps[j].Wd @ f.gaps[j]
    vals = [transfer_matrix(spec, j, np.conj(lam), ti).conj().T @ Wf for ti in ts]
    return (x - left) / 2 * np.tensordot(w, np.array(vals), axes=1)


def test_criterion_12_transfer_oracle():
    rng = np.random.default_rng(12)
    worst_u = worst_i = 0.0
    count = seed = 0
    while count < 50:
        spec = random_spec(9000 + seed, densities=True)
        seed += 1
        f = random_rhs(rng, spec)
        for j in range(spec.N + 1):
            if count == 50:
                break
            lam = complex(rng.normal(), rng.normal())
            lo, hi = spec.gap_bounds(j)
            x = lo + rng.uniform(0.2, 1.0) * (hi - lo)
            worst_u = max(worst_u, float(np.abs(transfer_matrix(spec, j, lam, x)
                                                - _ivp(spec, j, lam, x)).max()))
            worst_i = max(worst_i, float(np.abs(gap_integral(spec, j, lam, f, x)
                                                - _quadrature(spec, j, lam, f, x)).max()))
            count += 1
    ok = worst_u <= TOL_ORACLE and worst_i <= TOL_ORACLE
    report(12, "transfer matrices and gap integrals against oracles on 50 gaps", ok,
           f"transfer {worst_u:.2e}, integral {worst_i:.2e} <= {TOL_ORACLE:g}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
