"""Property suite run by ``measgreen verify``.

Each check records a measured value and the threshold it is held to.  The
suite samples spectral parameters and right-hand sides from a seeded
generator, so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import assembly, canonical, greens, linalg, reference, relations
from .errors import MeasGreenError
from .model import SystemSpec, generic_lambda, require_valid
from .propagate import propagate_path, residual
from .random_specs import random_rhs
from .tolerances import Tolerances, resolve


@dataclass
class Check:
    name: str
    passed: bool
    value: float | int | None = None
    threshold: float | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "threshold": self.threshold, "detail": self.detail}


@dataclass
class SuiteResult:
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, detail="", compare="le"):
        ok = value <= threshold if compare == "le" else value == threshold
        self.checks.append(Check(name, bool(ok), _num(value), _num(threshold), detail))

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.as_dict() for c in self.checks],
                "warnings": list(self.warnings)}


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _guard(result: SuiteResult, name: str, fn):
    try:
        fn()
    except MeasGreenError as exc:
        result.checks.append(Check(name, False, None, None, f"{type(exc).__name__}: {exc}"))


def _assembly_checks(res, spec, lams, rng, tol):
    n = spec.n
    worst_id = 0.0
    int_fail = []
    for lam in lams:
        ids = assembly.structural_identities(spec, lam)
        worst_id = max(worst_id, max(ids["full_identity"], ids["middle_identity"]) / ids["scale"])
        a = assembly.n_tilde(spec, lam, tol)
        b = assembly.n_tilde(spec, np.conj(lam), tol)
        dims = assembly.kernel_dims(spec, lam, tol)
        if a + b != 2 * n or a != n or dims["ker_B"] != n + dims["ker_B_adj"]:
            int_fail.append(complex(lam))
    res.add("block identities (relative Frobenius residual)", worst_id, 1e-10)
    res.add("integer identities failures", len(int_fail), 0, compare="eq")
    disagree = 0
    worst_res = 0.0
    for lam in lams:
        f = random_rhs(rng, spec)
        try:
            s = assembly.solvable(spec, lam, f, tol)
        except MeasGreenError:
            disagree += 1
            continue
        if s.rank_test:
            sol = assembly.solve_nonhomogeneous(spec, lam, f, tol)
            r = residual(sol.path()).max
            worst_res = max(worst_res, r / max(1.0, float(np.abs(sol.path().c).max())))
    res.add("solvability tests disagreements", disagree, 0, compare="eq")
    res.add("particular solution residual", worst_res, 1e-8)


def _relation_checks(res, spec, rng, trials, tol):
    n = spec.n
    tmax = relations.tmax_subspace(spec, tol)
    tmin = relations.tmin_closure_subspace(spec, tol)
    defs = relations.deficiency_pair(spec, tol)
    npl, nmi = defs.plus.n, defs.minus.n
    res.add("n+ <= n and n- <= n", int(npl > n or nmi > n), 0, f"n+={npl}, n-={nmi}", "eq")
    res.add("n+ == n-", abs(npl - nmi), 0, compare="eq")
    adj = relations.adjoint_subspace(spec, tmin, tol)
    angle = linalg.max_principal_angle(adj.basis, tmax.basis)
    res.add("adjoint of T_min equals T_max (angle)", angle, 1e-8)
    res.add("dim T_max - dim T_min - n+ - n-", tmax.dim - tmin.dim - npl - nmi, 0, compare="eq")
    parts = [tmin.basis, defs.plus.subspace.basis, defs.minus.subspace.basis]
    ortho = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            if parts[i].shape[1] and parts[j].shape[1]:
                ortho = max(ortho, float(np.abs(parts[i].conj().T @ parts[j]).max()))
    res.add("T_min, D_i, D_-i mutually orthogonal", ortho, 1e-9)
    worst = 0.0
    for i in range(tmax.dim):
        pi = tmax.pair(i)
        for j in range(tmax.dim):
            pj = tmax.pair(j)
            bf = relations.boundary_form(spec, pi, pj, check=False)
            worst = max(worst, abs(bf - relations.lagrange_rhs(pi, pj)))
    res.add("Lagrange identity on T_max basis", worst, 1e-10)
    if npl == nmi:
        r = relations.restriction_from_conditions(
            spec, relations.self_adjoint_conditions(spec, defs=defs, tol=tol), tol, tmax)
        res.add("unitary conditions give a self-adjoint restriction",
                int(not r.self_adjoint), 0, r.classification, "eq")
    nk = canonical.nk_spaces(spec, tol=tol)
    L0 = nk.l0
    idem = indep = 0.0
    for _ in range(trials):
        z = rng.normal(size=tmax.dim) + 1j * rng.normal(size=tmax.dim)
        p = tmax.path(z)
        c1 = canonical.canonicalize(spec, p, nk=nk, tol=tol)
        c2 = canonical.canonicalize(spec, c1, nk=nk, tol=tol)
        idem = max(idem, float(np.abs(c1.c - c2.c).max()))
        if L0.shape[1]:
            y = rng.normal(size=L0.shape[1]) + 1j * rng.normal(size=L0.shape[1])
            q = propagate_path(spec, p.lam, p.rhs, p.c.ravel() + L0 @ y)
            c3 = canonical.canonicalize(spec, q, nk=nk, tol=tol)
            indep = max(indep, float(np.abs(c1.c - c3.c).max()))
    res.add("canonicalization idempotent", idem, 1e-12, f"dim L0 = {L0.shape[1]}")
    res.add("canonicalization independent of representative", indep, 1e-10)


def _example_checks(res, M, rng, trials, tol):
    ex = reference.example_spec(M)
    spec = ex.spec
    T = relations.tmax_subspace(spec, tol)
    inner = ex.interior_atoms()
    xs = [k + 0.5 for k in range(1, ex.n_atoms)] + [float(k) for k in range(1, ex.n_atoms + 1)]
    worst = worst_norm = worst_k = 0.0
    ratios = set()
    for lam in (2j, 1 + 1j, -3j):
        ctx = greens.ResolventContext.build(spec, T, lam, tol)
        table = greens.greens_table(ctx, xs)
        for _ in range(trials):
            f = np.zeros((ex.n_atoms, 2), complex)
            idx = np.array(inner) - 1
            f[idx, 0] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
            path = greens.resolvent_apply(ctx, f)
            got = np.array([path.gap_value(spec.gap_of(x), x) if spec.atom_index(x) is None
                            else path.u_sharp[spec.atom_index(x)] for x in xs])
            want = np.array([reference.example_resolvent(M, lam, f, x) for x in xs])
            worst = max(worst, float(np.abs(got - want).max() / max(1.0, np.abs(want).max())))
            u = greens.resolvent_class(ctx, f)
            worst_norm = max(worst_norm, abs(np.vdot(u, u).real - reference.example_norm_sq(M, lam, f)))
            worst_k = max(worst_k, float(np.abs(table.apply(f) - got).max()))
        for bal in (True, False):
            disp = np.array([[reference.example_kernel(M, x, k + 1, lam, bal)
                              for k in range(ex.n_atoms)] for x in xs])
            mask = np.abs(table.K) > 1e-12
            if mask.any():
                ratios.add((bal, round(float(np.median(np.abs(disp[mask] / table.K[mask]))), 6)))
    res.add("example resolvent matches closed form", worst, 1e-9)
    res.add("example norm identity", worst_norm, 1e-9)
    res.add("kernel table reproduces resolvent", worst_k, 1e-9)
    ratio = dict(ratios)
    res.add("displayed kernel / computed kernel (balanced)", abs(ratio.get(True, 1.0) - 1.0), 1e-9,
            f"unbalanced ratio {ratio.get(False)}")
    H, Hinf = reference.tmax_decomposition(M)
    space = relations.L2wSpace(spec, tol)

    def lift(V):
        out = []
        for col in V.T:
            vals = np.zeros((ex.n_atoms, 2), complex)
            vals[:, 0] = col
            out.append(space.coords(vals))
        return linalg.orthonormalize(np.column_stack(out))

    Hc, Hic = lift(H), lift(Hinf)
    r = space.dim
    D = np.zeros((2 * r, Hc.shape[1] + Hic.shape[1]), complex)
    D[:r, :Hc.shape[1]] = Hc
    D[r:, Hc.shape[1]:] = Hic
    res.add("T_max = (H x 0) + (0 x H_inf)", linalg.max_principal_angle(D, T.basis), 1e-8)


def run_suite(spec: SystemSpec, seed: int = 0, trials: int = 5, tol: Tolerances | None = None,
              example_M: int | None = None) -> SuiteResult:
    """All checks applicable to ``spec``; ``example_M`` adds the closed-form comparisons."""
    tol = resolve(tol)
    require_valid(spec, tol)
    res = SuiteResult()
    if trials <= 0:
        res.warnings.append("no trials requested: suite passes vacuously")
        return res
    rng = np.random.default_rng(seed)
    if spec.N:
        def run_assembly():
            lams = [generic_lambda(spec, seed=seed + t, tol=tol) for t in range(trials)]
            _assembly_checks(res, spec, lams, rng, tol)
        _guard(res, "assembly", run_assembly)
    else:
        res.warnings.append("no atoms: block-system checks skipped")
    if spec.N and spec.purely_atomic:
        _guard(res, "relations", lambda: _relation_checks(res, spec, rng, trials, tol))
    elif spec.N:
        res.warnings.append("w has gap densities: relation checks skipped")
    if example_M is not None:
        _guard(res, "example", lambda: _example_checks(res, example_M, rng, trials, tol))
    return res
