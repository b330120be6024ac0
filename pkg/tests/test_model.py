import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from measgreen.errors import GenericityNotFound, SpecInvalid
from measgreen.linalg import numerical_rank
from measgreen.assembly import assemble
from measgreen.model import (Annulus, Atom, GapDensity, Rectangle, SystemSpec, bad_lambda_set,
                             generic_lambda, jump_matrices, make_spec, require_valid, validate,
                             xi_set)
from measgreen.random_specs import random_spec
from measgreen.tolerances import Tolerances

from conftest import J2, S, W, two_atom_spec


def test_periodic_example_validates(periodic):
    assert validate(periodic.spec).passed


def test_identity_J_fails_validation():
    spec = make_spec(np.eye(2), [(1.0, S, W)], 0.0, 2.0)
    rep = validate(spec)
    assert not rep.passed
    assert any("skew-Hermitian" in v for v in rep.violations)


def test_negative_weight_fails_validation():
    spec = make_spec(J2, [(1.0, S, np.diag([1.0, -0.5]))], 0.0, 2.0)
    rep = validate(spec)
    assert any("positive semi-definite" in v for v in rep.violations)
    with pytest.raises(SpecInvalid):
        require_valid(spec)


def test_validation_reports_every_problem():
    spec = make_spec(np.eye(2), [(2.5, np.array([[0, 1], [0, 0]]), np.diag([1.0, -1.0])),
                                 (1.0, S, W)], 0.0, 2.0)
    rep = validate(spec)
    text = " ".join(rep.violations)
    assert "skew-Hermitian" in text
    assert "dq is not Hermitian" in text
    assert "positive semi-definite" in text
    assert "increase strictly" in text


def test_gap_density_checks():
    gaps = [GapDensity(np.zeros((2, 2)), np.zeros((2, 2))),
            GapDensity(np.array([[0, 1], [0, 0]]), -np.eye(2))]
    spec = make_spec(J2, [(1.0, S, W)], 0.0, 2.0, gaps)
    text = " ".join(validate(spec).violations)
    assert "gap 1: Q density is not Hermitian" in text
    assert "gap 1: W density is not positive semi-definite" in text


def test_odd_atom_jump_matrices():
    lam = 0.7 - 0.2j
    jp = jump_matrices(Atom(1.0, -S, W), J2, lam)
    np.testing.assert_allclose(jp.Bminus, [[lam, 0], [2, 0]], atol=1e-15)
    np.testing.assert_allclose(jp.Bplus, [[-lam, -2], [0, 0]], atol=1e-15)


def test_no_atom_jump_matrices_equal_J():
    z = np.zeros((2, 2))
    jp = jump_matrices(Atom(1.0, z, z), J2, 3 + 1j)
    np.testing.assert_array_equal(jp.Bplus, J2)
    np.testing.assert_array_equal(jp.Bminus, J2)


def test_scalar_jump_matrices():
    jp = jump_matrices(Atom(0.5, [[0]], [[2]]), np.array([[1j]]), 1j)
    np.testing.assert_allclose(jp.Bplus, [[0]], atol=1e-15)
    np.testing.assert_allclose(jp.Bminus, [[2j]], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), re=st.floats(-5, 5), im=st.floats(-5, 5))
def test_jump_pair_invariants(seed, re, im):
    spec = random_spec(seed)
    lam = complex(re, im)
    for at in spec.atoms:
        jp = jump_matrices(at, spec.J, lam)
        np.testing.assert_allclose(jp.Bplus + jp.Bminus, 2 * spec.J, atol=1e-12)
        np.testing.assert_allclose(jp.Bplus - jp.Bminus, at.dq - lam * at.dw, atol=1e-12)
        other = jump_matrices(at, spec.J, np.conj(lam))
        np.testing.assert_allclose(jp.Bminus, -other.Bplus.conj().T, atol=1e-12)


def test_odd_atom_bad_set_is_everything():
    assert bad_lambda_set(Atom(1.0, -S, W), J2).all_of_c


def test_weightless_invertible_atom_has_no_bad_points():
    bl = bad_lambda_set(Atom(1.0, 0.3 * S, np.zeros((2, 2))), J2)
    assert not bl.all_of_c and bl.roots == ()


def test_scalar_bad_set_roots():
    bl = bad_lambda_set(Atom(0.5, [[0]], [[2]]), np.array([[1j]]))
    assert not bl.all_of_c
    assert sorted(bl.roots, key=lambda z: z.imag) == pytest.approx([-1j, 1j])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_bad_sets_closed_under_conjugation(seed):
    spec = random_spec(seed)
    tol = Tolerances()
    for at in spec.atoms:
        bl = bad_lambda_set(at, spec.J, tol)
        if bl.all_of_c:
            continue
        for r in bl.roots:
            assert min(abs(np.conj(r) - s) for s in bl.roots) < 1e-6 * max(1.0, abs(r))
            # each root makes one of the jump matrices singular
            jp = jump_matrices(at, spec.J, r)
            smin = min(np.linalg.svd(jp.Bplus, compute_uv=False)[-1],
                       np.linalg.svd(jp.Bminus, compute_uv=False)[-1])
            assert smin < 1e-6 * (1 + abs(r))


def test_xi_set_periodic_example_is_every_atom(periodic):
    for lam in (0.0, 2j, 1 + 1j):
        assert xi_set(periodic.spec, lam) == list(range(periodic.n_atoms))


def test_xi_set_without_atoms_is_empty():
    assert xi_set(make_spec(J2, [], 0.0, 1.0), 1j) == []


def test_xi_set_two_atoms_at_zero(two_atoms):
    assert xi_set(two_atoms, 0.0) == [0, 1]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31), re=st.floats(-3, 3), im=st.floats(-3, 3))
def test_xi_set_conjugation_symmetric(seed, re, im):
    spec = random_spec(seed)
    lam = complex(re, im)
    assert xi_set(spec, lam) == xi_set(spec, np.conj(lam))


def test_generic_lambda_periodic_example():
    spec = two_atom_spec()
    lam = generic_lambda(spec, seed=1)
    assert lam.imag != 0
    tol = Tolerances()
    assert numerical_rank(assemble(spec, lam)[0].B, tol.rank) == \
        numerical_rank(assemble(spec, np.conj(lam))[0].B, tol.rank)


def test_generic_lambda_no_atoms_accepts_any_nonreal():
    lam = generic_lambda(make_spec(J2, [], 0.0, 1.0), seed=3)
    assert lam.imag != 0


def test_generic_lambda_avoids_roots():
    spec = make_spec(np.array([[1j]]), [(0.5, [[0]], [[2]])], 0.0, 1.0)
    tol = Tolerances()
    lam = generic_lambda(spec, Annulus(0j, 0.9, 1.1), seed=5, tol=tol)
    assert min(abs(lam - 1j), abs(lam + 1j)) >= tol.gap


def test_generic_lambda_deterministic(two_atoms):
    assert generic_lambda(two_atoms, seed=9) == generic_lambda(two_atoms, seed=9)
    assert generic_lambda(two_atoms, Rectangle(), seed=9) == generic_lambda(two_atoms, Rectangle(), seed=9)


def test_generic_lambda_gives_up():
    spec = make_spec(np.array([[1j]]), [(0.5, [[0]], [[2]])], 0.0, 1.0)
    tight = Tolerances(max_tries=20, gap=10.0)
    with pytest.raises(GenericityNotFound):
        generic_lambda(spec, seed=0, tol=tight)


def test_spec_geometry(two_atoms):
    assert two_atoms.N == 2
    assert two_atoms.gap_bounds(1) == (1.0, 2.0)
    assert two_atoms.atom_index(2.0) == 1
    assert two_atoms.atom_index(1.5) is None
    assert two_atoms.gap_of(1.5) == 1
    assert two_atoms.purely_atomic
    spec = SystemSpec(2, 0, 1, J2, (), (GapDensity(np.zeros((2, 2)), np.eye(2)),))
    assert not spec.purely_atomic
