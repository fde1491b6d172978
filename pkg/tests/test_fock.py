import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockforge.fock import (
    Basis,
    FockState,
    HamiltonianSpec,
    MonomialTerm,
    Spin,
    SpinChannel,
    anticommutator,
    apply_monomial,
    assemble_operator,
    commutator,
    interior_mask,
    ladder_action,
)
from fockforge.models import ModifiedJCParams, modified_jc
from oracles import dense_hamiltonian

UP, DOWN = Spin.UP, Spin.DOWN
I, SZ, SP, SM = SpinChannel

channels = st.sampled_from(list(SpinChannel))
exponents = st.tuples(*[st.integers(0, 2)] * 4)
coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=7)
terms = st.builds(MonomialTerm, coeffs, exponents, channels)
specs = st.lists(terms, min_size=1, max_size=6).map(HamiltonianSpec.from_terms)
states = st.builds(FockState, st.integers(0, 5), st.integers(0, 5), st.sampled_from([UP, DOWN]))



# apply_monomial


def test_number_operator_on_three():
    assert apply_monomial(MonomialTerm(1, (1, 1, 0, 0)), FockState(3, 0, UP)) == [(FockState(3, 0, UP), 3.0)]


def test_sigma_plus_kills_up():
    assert apply_monomial(MonomialTerm(1, (0, 0, 0, 0), SP), FockState(0, 0, UP)) == []


def test_stepwise_amplitude():
    (image, amp), = apply_monomial(MonomialTerm(1, (2, 1, 0, 0)), FockState(1, 0, DOWN))
    assert image == FockState(2, 0, DOWN)
    assert amp == pytest.approx(math.sqrt(2), abs=1e-15)
    # same thing from three dense elementary operators
    a = np.diag(np.sqrt(np.arange(1, 4.0)), 1)
    vec = np.zeros(4)
    vec[1] = 1
    assert (a.T @ a.T @ a @ vec)[2] == pytest.approx(math.sqrt(2), abs=1e-15)


def test_annihilation_underflow_is_empty():
    assert apply_monomial(MonomialTerm(1, (0, 2, 0, 0)), FockState(1, 3, UP)) == []
    assert apply_monomial(MonomialTerm(1, (0, 0, 0, 4)), FockState(1, 3, UP)) == []


def test_sigma0_sign_on_down():
    (image, amp), = apply_monomial(MonomialTerm(Fraction(1, 2), (0, 0, 0, 0), SZ), FockState(2, 2, DOWN))
    assert image == FockState(2, 2, DOWN) and amp == -0.5


def test_ladder_action_is_exact_integer():
    image, sign, q = ladder_action(MonomialTerm(1, (1, 2, 3, 0), SM), FockState(4, 1, UP))
    assert image == FockState(3, 4, DOWN)
    assert sign == 1 and q == 4 * 3 * 3 * (2 * 3 * 4)


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        MonomialTerm(1, (0, -1, 0, 0))


def test_nonfinite_coefficient_rejected():
    with pytest.raises(ValueError):
        MonomialTerm(float("nan"))


# specs


def test_merge_on_insert():
    spec = HamiltonianSpec.from_terms([MonomialTerm(1, (1, 1, 0, 0)), MonomialTerm(2, (1, 1, 0, 0))])
    assert len(spec) == 1 and spec.coefficient((1, 1, 0, 0)) == 3


def test_cancelling_terms_drop_out():
    spec = HamiltonianSpec.from_terms([MonomialTerm(1, (0, 1, 0, 0), SP), MonomialTerm(-1, (0, 1, 0, 0), SP)])
    assert len(spec) == 0


@given(specs)
def test_document_round_trip(spec):
    text = spec.dumps()
    again = HamiltonianSpec.loads(text)
    assert again == spec
    assert again.dumps() == text


@given(specs)
def test_adjoint_is_involution(spec):
    assert spec.adjoint().adjoint() == spec


# basis and interior


def test_basis_order_and_size():
    basis = Basis((2, 1))
    assert len(basis) == 3 * 2 * 2
    assert basis.states[:4] == (
        FockState(0, 0, UP),
        FockState(0, 0, DOWN),
        FockState(0, 1, UP),
        FockState(0, 1, DOWN),
    )
    assert all(basis.ordinal(s) == i for i, s in enumerate(basis.states))


def test_interior_examples():
    basis = Basis((3, 0))
    assert [basis.states[i].n1 for i in interior_mask(basis, (1, 0))] == [0, 0, 1, 1, 2, 2]
    assert len(interior_mask(Basis((5, 5)), (2, 2))) == 4 * 4 * 2
    assert len(interior_mask(basis, (0, 0))) == len(basis)


def test_interior_too_deep():
    with pytest.raises(ValueError):
        interior_mask(Basis((2, 2)), (3, 0))


# assembly


def test_scaled_number_operator_diagonal():
    op = assemble_operator(HamiltonianSpec.monomial((1, 1, 0, 0), coefficient=2), Basis((2, 0)))
    assert np.array_equal(op.toarray(), np.diag([0.0, 0, 2, 2, 4, 4]))


def test_decoupled_jc_is_diagonal():
    m = assemble_operator(modified_jc(ModifiedJCParams(1, 1, 0, 0)), Basis((4, 4))).toarray()
    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0


def test_jc_symmetric():
    m = assemble_operator(modified_jc(ModifiedJCParams(1, 0.8, 0.3, 0.5)), Basis((6, 6))).toarray()
    assert np.array_equal(m, m.T)


@given(specs, st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_assembly_matches_dense_kron(spec, cutoff):
    got = assemble_operator(spec, Basis(cutoff)).toarray()
    want = dense_hamiltonian([(t.coefficient, t.exponents, t.channel.value) for t in spec], cutoff)
    assert np.allclose(got, want, atol=1e-12, rtol=1e-12)


@given(specs, states)
def test_columns_match_apply_monomial(spec, state):
    basis = Basis((6, 6))
    col = assemble_operator(spec, basis).toarray()[:, basis.ordinal(state)]
    want = np.zeros(len(basis))
    for term in spec:
        for image, amp in apply_monomial(term, state):
            if image in basis:
                want[basis.ordinal(image)] += amp
    assert np.allclose(col, want, atol=1e-13)


@given(specs, specs)
def test_linearity(s1, s2):
    basis = Basis((3, 3))
    total = assemble_operator(s1 + s2, basis).toarray()
    parts = assemble_operator(s1, basis).toarray() + assemble_operator(s2, basis).toarray()
    # merged coefficients multiply the same sqrt once, so only rounding can differ
    assert np.allclose(total, parts, rtol=0, atol=1e-13 * max(1.0, np.abs(parts).max()))


@given(terms, terms)
def test_linearity_exact_for_single_terms(t1, t2):
    # with one contribution per entry on each side the float sums are identical;
    # three or more contributions can associate differently (covered above)
    basis = Basis((3, 3))
    s1, s2 = HamiltonianSpec.from_terms([t1]), HamiltonianSpec.from_terms([t2])
    total = assemble_operator(s1 + s2, basis).toarray()
    parts = assemble_operator(s1, basis).toarray() + assemble_operator(s2, basis).toarray()
    if t1.key == t2.key:
        assert np.allclose(total, parts, rtol=0, atol=1e-13 * max(1.0, np.abs(parts).max()))
    else:
        assert np.array_equal(total, parts)


@given(specs)
def test_hermitian_when_closed_under_adjoint(spec):
    herm = spec + spec.adjoint()
    basis = Basis((6, 6))
    m = assemble_operator(herm, basis).toarray()
    d1, d2 = herm.max_degree() if len(herm) else (0, 0)
    mask = interior_mask(basis, (d1, d2))
    sub = m[np.ix_(mask, mask)]
    assert np.abs(sub - sub.T).max(initial=0) < 1e-12


# commutators


def _ladder(mode, dagger, basis):
    exps = [0, 0, 0, 0]
    exps[2 * mode + (0 if dagger else 1)] = 1
    return assemble_operator(HamiltonianSpec.monomial(tuple(exps)), basis)


def test_canonical_commutator_interior():
    basis = Basis((8, 0))
    c = commutator(_ladder(0, False, basis), _ladder(0, True, basis))
    mask = interior_mask(basis, (1, 0))
    assert np.abs(c.restrict(mask) - np.eye(len(mask))).max() < 1e-12


@pytest.mark.parametrize("m1,d1,m2,d2", [(0, False, 1, True), (0, True, 1, True), (0, False, 1, False), (1, True, 0, False)])
def test_cross_mode_commutators_vanish(m1, d1, m2, d2):
    basis = Basis((5, 5))
    c = commutator(_ladder(m1, d1, basis), _ladder(m2, d2, basis))
    assert c.max_abs(interior_mask(basis, (1, 1))) < 1e-12


def test_mode_two_commutator():
    basis = Basis((3, 7))
    c = commutator(_ladder(1, False, basis), _ladder(1, True, basis))
    mask = interior_mask(basis, (0, 1))
    assert np.abs(c.restrict(mask) - np.eye(len(mask))).max() < 1e-12


def test_self_commutator_zero():
    op = assemble_operator(modified_jc(ModifiedJCParams(1, 0.8, 0.3, 0.5)), Basis((4, 4)))
    assert commutator(op, op).max_abs() == 0


def test_sigma_anticommutator():
    basis = Basis((0, 0))
    sp_ = assemble_operator(HamiltonianSpec.monomial(channel=SP), basis)
    sm_ = assemble_operator(HamiltonianSpec.monomial(channel=SM), basis)
    assert np.array_equal(anticommutator(sp_, sm_).toarray(), np.eye(2))


def test_mismatched_bases():
    with pytest.raises(ValueError):
        commutator(_ladder(0, False, Basis((2, 2))), _ladder(0, False, Basis((3, 2))))
