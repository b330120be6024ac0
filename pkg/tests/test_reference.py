import numpy as np
import pytest

from measgreen import greens, linalg, reference, relations
from measgreen.errors import NotInResolventSet
from measgreen.propagate import balanced_value


def test_geometry():
    ex = reference.example_spec(2)
    assert ex.n_atoms == 8 and (ex.a, ex.b) == (0.5, 8.5)
    assert ex.interior_atoms() == [2, 3, 4, 5, 6, 7]
    assert [at.x for at in ex.spec.atoms] == list(range(1, 9))
    with pytest.raises(ValueError):
        reference.example_spec(0)


def test_hand_computed_values():
    # M = 1, f1 = (1, 2, 3, 4), lam = 2: alpha = -(1+2)/2, beta = -(1-2)/2
    f = np.array([1.0, 2.0, 3.0, 4.0])
    v = reference.odd_gap_values(1, 2.0, f)
    np.testing.assert_allclose(v, [[-1.5, 0.5], [-3.5, 0.5]])
    np.testing.assert_allclose(reference.example_resolvent(1, 2.0, f, 1.5), [-1.5, 0.5])
    np.testing.assert_allclose(reference.example_resolvent(1, 2.0, f, 2.0), [-0.75, 0.25])
    np.testing.assert_allclose(reference.example_resolvent(1, 2.0, f, 2.5), [0, 0])
    assert reference.example_norm_sq(1, 2.0, f) == pytest.approx((9 + 49) / 4)
    with pytest.raises(ValueError):
        reference.odd_gap_values(1, 0.0, f)
    with pytest.raises(ValueError):
        reference.example_resolvent(1, 1j, f, 9.0)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_norm_formula_matches_atom_sum(M):
    rng = np.random.default_rng(M)
    f = rng.normal(size=4 * M) + 1j * rng.normal(size=4 * M)
    for lam in (2j, 1 + 1j):
        assert reference.example_norm_sq(M, lam, f) == pytest.approx(
            reference.example_norm_sq_direct(M, lam, f), rel=1e-12)


@pytest.mark.parametrize("M", [1, 2])
def test_generic_pipeline_matches_closed_form(M):
    ex = reference.example_spec(M)
    spec = ex.spec
    T = relations.tmax_subspace(spec)
    defs = relations.deficiency_pair(spec)
    assert (defs.plus.n, defs.minus.n) == (0, 0)
    rng = np.random.default_rng(10 + M)
    xs = [k + 0.5 for k in range(1, ex.n_atoms)] + list(range(1, ex.n_atoms + 1))
    idx = np.array(ex.interior_atoms()) - 1
    for lam in (2j, 1 + 1j, -3j):
        ctx = greens.ResolventContext.build(spec, T, lam)
        f = np.zeros((ex.n_atoms, 2), complex)
        f[idx, 0] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
        path = greens.resolvent_apply(ctx, f)
        for x in xs:
            np.testing.assert_allclose(balanced_value(path, x),
                                       reference.example_resolvent(M, lam, f, x), atol=1e-10)
        u = greens.resolvent_class(ctx, f)
        assert np.vdot(u, u).real == pytest.approx(reference.example_norm_sq(M, lam, f), rel=1e-10)


def test_zero_is_not_in_the_resolvent_set():
    spec = reference.example_spec(1).spec
    with pytest.raises(NotInResolventSet):
        greens.ResolventContext.build(spec, relations.tmax_subspace(spec), 0.0)


@pytest.mark.parametrize("M", [1, 2])
def test_displayed_kernel_balanced_and_unbalanced(M):
    ex = reference.example_spec(M)
    spec = ex.spec
    ctx = greens.ResolventContext.build(spec, relations.tmax_subspace(spec), 2j)
    xs = [k + 0.5 for k in range(1, ex.n_atoms)] + list(range(1, ex.n_atoms + 1))
    table = greens.greens_table(ctx, xs)
    bal = np.array([[reference.example_kernel(M, x, k + 1, 2j) for k in range(ex.n_atoms)]
                    for x in xs])
    np.testing.assert_allclose(bal, table.K, atol=1e-10)
    unbal = np.array([[reference.example_kernel(M, x, k + 1, 2j, balanced=False)
                       for k in range(ex.n_atoms)] for x in xs])
    mask = np.abs(table.K) > 1e-12
    np.testing.assert_allclose(unbal[mask] / table.K[mask], 2.0, atol=1e-10)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_tmax_splits_into_graph_and_multivalued_part(M):
    H, Hinf = reference.tmax_decomposition(M)
    np.testing.assert_allclose(H.conj().T @ H, np.eye(2 * M), atol=1e-14)
    np.testing.assert_allclose(H.conj().T @ Hinf, 0, atol=1e-14)
    spec = reference.example_spec(M).spec
    space = relations.L2wSpace(spec)
    T = relations.tmax_subspace(spec)

    def lift(V):
        cols = []
        for col in V.T:
            vals = np.zeros((4 * M, 2), complex)
            vals[:, 0] = col
            cols.append(space.coords(vals))
        return linalg.orthonormalize(np.column_stack(cols))

    r = space.dim
    A, B = lift(H), lift(Hinf)
    D = np.zeros((2 * r, A.shape[1] + B.shape[1]), complex)
    D[:r, :A.shape[1]] = A
    D[r:, A.shape[1]:] = B
    assert linalg.max_principal_angle(D, T.basis) < 1e-8
